//! Six-level code `α|0⟩ + β|3⟩` against the shift errors `X` and `X²`.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{make_x, ComplexMatrix, DensityMatrix, C64, ONE, ZERO};
use crate::rng::RngSeed;

pub const QECC_DIM: usize = 6;
const NORM_TOL: f64 = 1e-12;

/// Syndrome class: the error power `X^i` whose image subspace
/// `span{|i⟩, |i+3⟩}` the state occupies.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Syndrome {
    C0,
    C1,
    C2,
}

impl Syndrome {
    pub const ALL: [Syndrome; 3] = [Syndrome::C0, Syndrome::C1, Syndrome::C2];

    pub fn index(self) -> usize {
        self as usize
    }

    fn projector(self) -> ComplexMatrix {
        let i = self.index();
        let mut p = ComplexMatrix::zeros(QECC_DIM);
        p.set(i, i, ONE);
        p.set(i + 3, i + 3, ONE);
        p
    }
}

fn check_amplitudes(alpha: C64, beta: C64) -> Result<()> {
    let n = alpha.norm_sqr() + beta.norm_sqr();
    if (n - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidState(format!("|alpha|^2 + |beta|^2 = {n}")));
    }
    Ok(())
}

fn check_error_probs(p: [f64; 3]) -> Result<()> {
    if p.iter().any(|x| !(0.0..=1.0).contains(x)) || (p.iter().sum::<f64>() - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidProbabilities(format!("{p:?} must be in [0,1] and sum to 1")));
    }
    Ok(())
}

fn codeword(alpha: C64, beta: C64) -> [C64; QECC_DIM] {
    let mut psi = [ZERO; QECC_DIM];
    psi[0] = alpha;
    psi[3] = beta;
    psi
}

fn conjugate(u: &ComplexMatrix, rho: &ComplexMatrix) -> ComplexMatrix {
    &(u * rho) * &u.adjoint()
}

/// `|ψ0⟩⟨ψ0|` with `|ψ0⟩ = α|0⟩ + β|3⟩`.
pub fn qecc_encode(alpha: C64, beta: C64) -> Result<DensityMatrix> {
    check_amplitudes(alpha, beta)?;
    DensityMatrix::from_pure(&codeword(alpha, beta))
}

/// Applies `X^i` with `i` drawn from `(p0, p1, p2)`; returns the state and `i`.
pub fn qecc_apply_noise(state: &DensityMatrix, p: [f64; 3], seed: RngSeed) -> Result<(DensityMatrix, usize)> {
    check_error_probs(p)?;
    if state.dim() != QECC_DIM {
        return Err(Error::DimensionMismatch { left: QECC_DIM, right: state.dim() });
    }
    let u: f64 = seed.rng().random();
    let i = if u < p[0] {
        0
    } else if u < p[0] + p[1] {
        1
    } else {
        2
    };
    let x = make_x(QECC_DIM)?.pow(i as u32);
    Ok((DensityMatrix::new(conjugate(&x, state.matrix()))?, i))
}

/// `Tr(P_c ρ)` for the three syndrome projectors.
pub fn qecc_syndrome_probabilities(state: &DensityMatrix) -> Result<[f64; 3]> {
    if state.dim() != QECC_DIM {
        return Err(Error::DimensionMismatch { left: QECC_DIM, right: state.dim() });
    }
    let m = state.matrix();
    Ok([0, 1, 2].map(|i| (m.get(i, i).re + m.get(i + 3, i + 3).re).max(0.0)))
}

/// Measures the stabilizer; returns the outcome and the post-measurement state.
pub fn qecc_syndrome(state: &DensityMatrix, seed: RngSeed) -> Result<(Syndrome, DensityMatrix)> {
    let probs = qecc_syndrome_probabilities(state)?;
    let u: f64 = seed.rng().random::<f64>() * probs.iter().sum::<f64>();
    let mut acc = 0.0;
    let mut outcome = Syndrome::C2;
    for s in Syndrome::ALL {
        acc += probs[s.index()];
        if u < acc {
            outcome = s;
            break;
        }
    }
    let proj = outcome.projector();
    let post = conjugate(&proj, state.matrix()).scale_re(1.0 / probs[outcome.index()]);
    Ok((outcome, DensityMatrix::new(post)?))
}

/// Undoes `X^i` for outcome `c_i`.
pub fn qecc_recover(state: &DensityMatrix, outcome: Syndrome) -> Result<DensityMatrix> {
    if state.dim() != QECC_DIM {
        return Err(Error::DimensionMismatch { left: QECC_DIM, right: state.dim() });
    }
    let inv = make_x(QECC_DIM)?.pow(outcome.index() as u32).adjoint();
    DensityMatrix::new(conjugate(&inv, state.matrix()))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QeccDemoConfig {
    #[serde(with = "crate::operators::complex_pair")]
    pub alpha: C64,
    #[serde(with = "crate::operators::complex_pair")]
    pub beta: C64,
    /// `(p0, p1, p2)` for `1`, `X`, `X²`.
    pub error_probs: [f64; 3],
    pub trials: usize,
    pub seed: RngSeed,
}

impl QeccDemoConfig {
    pub fn validate(&self) -> Result<()> {
        check_amplitudes(self.alpha, self.beta)?;
        check_error_probs(self.error_probs)?;
        if self.trials == 0 {
            return Err(Error::InvalidConfig("need at least one trial".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QeccReport {
    pub trials: usize,
    pub syndrome_counts: [u64; 3],
    pub syndrome_frequencies: [f64; 3],
    /// Trials where the outcome named the error actually applied.
    pub correctly_identified: usize,
    pub min_fidelity: f64,
    pub max_fidelity_deviation: f64,
    /// Syndrome probabilities of the averaged state `Σ p_i X^i ρ X^{-i}`.
    pub mixture_syndrome_probabilities: [f64; 3],
    /// Fidelity after measuring and correcting the averaged state.
    pub mixture_fidelity: f64,
}

/// Per-trial noise, syndrome and recovery, compared with the same steps
/// applied to the averaged state.
pub fn run_qecc_demo(cfg: &QeccDemoConfig) -> Result<QeccReport> {
    cfg.validate()?;
    let psi = codeword(cfg.alpha, cfg.beta);
    let encoded = qecc_encode(cfg.alpha, cfg.beta)?;
    let mut counts = [0u64; 3];
    let mut identified = 0;
    let mut min_fidelity = f64::INFINITY;
    let mut max_dev: f64 = 0.0;
    for t in 0..cfg.trials {
        let (noisy, err) = qecc_apply_noise(&encoded, cfg.error_probs, cfg.seed.derive(30, t as u64))?;
        let (outcome, post) = qecc_syndrome(&noisy, cfg.seed.derive(31, t as u64))?;
        counts[outcome.index()] += 1;
        identified += usize::from(outcome.index() == err);
        let f = qecc_recover(&post, outcome)?.fidelity_with_pure(&psi)?;
        min_fidelity = min_fidelity.min(f);
        max_dev = max_dev.max((f - 1.0).abs());
    }

    let x = make_x(QECC_DIM)?;
    let mut mixed = ComplexMatrix::zeros(QECC_DIM);
    for (i, p) in cfg.error_probs.iter().enumerate() {
        mixed = &mixed + &conjugate(&x.pow(i as u32), encoded.matrix()).scale_re(*p);
    }
    let mixed = DensityMatrix::new(mixed)?;
    let mixture_probs = qecc_syndrome_probabilities(&mixed)?;
    let mut corrected = ComplexMatrix::zeros(QECC_DIM);
    for s in Syndrome::ALL {
        let branch = conjugate(&s.projector(), mixed.matrix());
        corrected = &corrected + &conjugate(&x.pow(s.index() as u32).adjoint(), &branch);
    }
    let mixture_fidelity = DensityMatrix::new(corrected)?.fidelity_with_pure(&psi)?;

    let n = cfg.trials as f64;
    Ok(QeccReport {
        trials: cfg.trials,
        syndrome_counts: counts,
        syndrome_frequencies: counts.map(|c| c as f64 / n),
        correctly_identified: identified,
        min_fidelity,
        max_fidelity_deviation: max_dev,
        mixture_syndrome_probabilities: mixture_probs,
        mixture_fidelity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn amps() -> (C64, C64) {
        (C64::new(0.6, 0.0), C64::new(0.0, 0.8))
    }

    #[test]
    fn no_error_gives_c0_and_unit_fidelity() {
        let (a, b) = amps();
        let rep = run_qecc_demo(&QeccDemoConfig {
            alpha: a,
            beta: b,
            error_probs: [1.0, 0.0, 0.0],
            trials: 50,
            seed: RngSeed::new(1),
        })
        .unwrap();
        assert_eq!(rep.syndrome_counts, [50, 0, 0]);
        assert!(rep.max_fidelity_deviation <= 1e-15);
    }

    #[test]
    fn each_error_is_identified_and_undone() {
        let (a, b) = amps();
        let psi = codeword(a, b);
        let rho = qecc_encode(a, b).unwrap();
        for i in 0..3 {
            let mut p = [0.0; 3];
            p[i] = 1.0;
            let (noisy, err) = qecc_apply_noise(&rho, p, RngSeed::new(i as u64)).unwrap();
            assert_eq!(err, i);
            let (s, post) = qecc_syndrome(&noisy, RngSeed::new(9)).unwrap();
            assert_eq!(s.index(), i);
            let f = qecc_recover(&post, s).unwrap().fidelity_with_pure(&psi).unwrap();
            assert!((f - 1.0).abs() <= 1e-12);
        }
    }

    #[test]
    fn mixture_matches_error_weights() {
        let (a, b) = amps();
        let rep = run_qecc_demo(&QeccDemoConfig {
            alpha: a,
            beta: b,
            error_probs: [0.5, 0.3, 0.2],
            trials: 200,
            seed: RngSeed::new(2),
        })
        .unwrap();
        for (got, want) in rep.mixture_syndrome_probabilities.iter().zip([0.5, 0.3, 0.2]) {
            assert!((got - want).abs() < 1e-15);
        }
        assert!((rep.mixture_fidelity - 1.0).abs() < 1e-12);
        assert_eq!(rep.correctly_identified, 200);
    }

    #[test]
    fn rejects_invalid_inputs() {
        assert!(qecc_encode(C64::new(0.6, 0.0), C64::new(0.6, 0.0)).is_err());
        let rho = qecc_encode(ONE, ZERO).unwrap();
        assert!(qecc_apply_noise(&rho, [0.5, 0.5, 0.5], RngSeed::new(0)).is_err());
        assert!(qecc_apply_noise(&rho, [1.2, -0.2, 0.0], RngSeed::new(0)).is_err());
    }
}

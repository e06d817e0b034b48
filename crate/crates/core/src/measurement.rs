//! Finite-shot projective measurement.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::hermitian_eigen;
use crate::operators::{hermitian_parts, ComplexMatrix, DensityMatrix, C64, ZERO};
use crate::rng::RngSeed;

/// Hermiticity tolerance for observables.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues closer than this are one outcome.
pub const MERGE_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Outcome {
    pub eigenvalue: f64,
    pub probability: f64,
}

/// Outcome distribution of measuring `h` on `rho`, eigenvalues descending.
pub fn born_probabilities(rho: &DensityMatrix, h: &ComplexMatrix) -> Result<Vec<Outcome>> {
    if h.dim() != rho.dim() {
        return Err(Error::DimensionMismatch {
            left: rho.dim(),
            right: h.dim(),
        });
    }
    let err = h.hermiticity_error();
    if err > HERMITIAN_TOL {
        return Err(Error::NotHermitian(err));
    }
    let (values, vectors) = hermitian_eigen(h.as_array());
    let n = h.dim();
    let m = rho.matrix();
    let mut outcomes: Vec<Outcome> = Vec::new();
    for j in (0..n).rev() {
        // <v|ρ|v>
        let mut p = ZERO;
        for r in 0..n {
            for c in 0..n {
                p += vectors[[r, j]].conj() * m.get(r, c) * vectors[[c, j]];
            }
        }
        let p = p.re;
        if p < -1e-10 {
            return Err(Error::InvalidState(format!("negative outcome probability {p}")));
        }
        match outcomes.last_mut() {
            Some(last) if (last.eigenvalue - values[j]).abs() <= MERGE_TOL => last.probability += p,
            _ => outcomes.push(Outcome {
                eigenvalue: values[j],
                probability: p,
            }),
        }
    }
    for o in outcomes.iter_mut() {
        o.probability = o.probability.clamp(0.0, 1.0);
    }
    let total: f64 = outcomes.iter().map(|o| o.probability).sum();
    for o in outcomes.iter_mut() {
        o.probability /= total;
    }
    Ok(outcomes)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimationResult {
    #[serde(with = "crate::operators::complex_pair")]
    pub estimate: C64,
    /// Standard error of the real part (sample deviation over `√shots`).
    pub standard_error: f64,
    /// Standard error of the imaginary part; zero for Hermitian observables.
    pub standard_error_imag: f64,
    pub shots: u64,
    pub observable_label: String,
}

impl EstimationResult {
    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.observable_label = label.into();
        self
    }
}

/// Outcome counts for `shots` i.i.d. draws, by sequential binomials.
fn multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0u64; probs.len()];
    let mut left = shots;
    let mut mass = 1.0f64;
    for (i, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if i + 1 == probs.len() || mass <= 0.0 {
            counts[i] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = Binomial::new(left, q).expect("valid binomial").sample(rng);
        counts[i] = k;
        left -= k;
        mass -= p;
    }
    counts
}

fn mean_and_se(outcomes: &[Outcome], counts: &[u64], shots: u64) -> (f64, f64) {
    let mean = outcomes
        .iter()
        .zip(counts)
        .map(|(o, &k)| o.eigenvalue * k as f64)
        .sum::<f64>()
        / shots as f64;
    if shots < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = outcomes
        .iter()
        .zip(counts)
        .map(|(o, &k)| k as f64 * (o.eigenvalue - mean).powi(2))
        .sum();
    let sd = (ss / (shots - 1) as f64).sqrt();
    (mean, sd / (shots as f64).sqrt())
}

pub fn measure_observable_with<R: Rng + ?Sized>(
    rho: &DensityMatrix,
    h: &ComplexMatrix,
    shots: u64,
    rng: &mut R,
) -> Result<EstimationResult> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    let outcomes = born_probabilities(rho, h)?;
    let probs: Vec<f64> = outcomes.iter().map(|o| o.probability).collect();
    let counts = multinomial(&probs, shots, rng);
    let (mean, se) = mean_and_se(&outcomes, &counts, shots);
    Ok(EstimationResult {
        estimate: C64::new(mean, 0.0),
        standard_error: se,
        standard_error_imag: 0.0,
        shots,
        observable_label: String::new(),
    })
}

/// Sample mean of `shots` projective measurements of `h`.
pub fn measure_observable(rho: &DensityMatrix, h: &ComplexMatrix, shots: u64, seed: RngSeed) -> Result<EstimationResult> {
    measure_observable_with(rho, h, shots, &mut seed.rng())
}

/// `<O> = <H1> + i<H2>` with the shots split between the Hermitian parts;
/// an odd total gives the extra shot to the real part.
pub fn estimate_expectation(rho: &DensityMatrix, op: &ComplexMatrix, shots: u64, seed: RngSeed) -> Result<EstimationResult> {
    if shots < 2 {
        return Err(Error::InvalidConfig("complex estimation needs at least 2 shots".into()));
    }
    let (h1, h2) = hermitian_parts(op);
    let re = measure_observable(rho, &h1, shots - shots / 2, seed.derive(0, 0))?;
    let im = measure_observable(rho, &h2, shots / 2, seed.derive(0, 1))?;
    Ok(EstimationResult {
        estimate: C64::new(re.estimate.re, im.estimate.re),
        standard_error: re.standard_error,
        standard_error_imag: im.standard_error,
        shots,
        observable_label: String::new(),
    })
}

//! Remote transfer of a measurement direction through a singlet whose
//! second qubit crossed a depolarizing channel.
//!
//! The channel is `p0·ρ + p·Σ σ_i ρ σ_i` on qubit 2 with `p0 + 3p = 1`,
//! which turns the singlet into `¼(1 - α σ₁·σ₂)` with `α = 1 - 4p`. In the
//! catalog's form `(1 - p_dep)ρ + p_dep·1/2` this is `p_dep = 1 - α = 4p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{check_unit_vector, trace_first};
use crate::channels::KrausChannel;
use crate::error::{Error, Result};
use crate::measurement::measure_observable;
use crate::operators::{sigma_x, sigma_y, sigma_z, ComplexMatrix, DensityMatrix};
use crate::rng::RngSeed;

/// Smallest admissible `|α|`.
pub const ALPHA_FLOOR: f64 = 0.05;
/// Smallest admissible `|m_i|`.
const COMPONENT_FLOOR: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AliceOutcome {
    Plus,
    Minus,
}

impl AliceOutcome {
    fn sign(self) -> f64 {
        match self {
            Self::Plus => 1.0,
            Self::Minus => -1.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemoteTransferConfig {
    /// Alice's measurement direction `m̂`.
    pub direction: [f64; 3],
    /// Per-Pauli corruption weight `p`.
    pub p: f64,
    /// Total shots on Bob's side, split evenly over `σx, σy, σz`.
    pub shots: u64,
    /// Alice's announced outcome; Bob's state is conditioned on it.
    pub branch: AliceOutcome,
    pub seed: RngSeed,
}

impl RemoteTransferConfig {
    pub fn new(direction: [f64; 3], p: f64, shots: u64, seed: RngSeed) -> Self {
        Self {
            direction,
            p,
            shots,
            branch: AliceOutcome::Plus,
            seed,
        }
    }

    pub fn alpha(&self) -> f64 {
        1.0 - 4.0 * self.p
    }

    pub fn validate(&self) -> Result<()> {
        check_unit_vector("direction", self.direction)?;
        if let Some(c) = self.direction.iter().find(|c| c.abs() < COMPONENT_FLOOR) {
            return Err(Error::InvalidConfig(format!(
                "direction component {c} is below {COMPONENT_FLOOR} in magnitude"
            )));
        }
        if !(0.0..=1.0 / 3.0).contains(&self.p) {
            return Err(Error::InvalidConfig(format!("p = {} outside [0, 1/3]", self.p)));
        }
        if self.alpha().abs() < ALPHA_FLOOR {
            return Err(Error::InvalidConfig(format!(
                "alpha = {} is below {ALPHA_FLOOR} in magnitude",
                self.alpha()
            )));
        }
        if self.shots < 6 {
            return Err(Error::InvalidConfig("need at least 6 shots".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RemoteTransferResult {
    pub alpha: f64,
    /// Probability of Alice's announced outcome.
    pub branch_probability: f64,
    /// Exact Bloch vector of Bob's conditional state.
    pub bob_bloch: [f64; 3],
    /// Bob's estimates of `⟨σx⟩, ⟨σy⟩, ⟨σz⟩` and their standard errors.
    pub expectations: [f64; 3],
    pub expectation_errors: [f64; 3],
    pub i1: f64,
    pub i2: f64,
    /// Propagated standard errors of `i1`, `i2`.
    pub i1_error: f64,
    pub i2_error: f64,
    /// `m_y/m_x` and `m_y/m_z`.
    pub true_i1: f64,
    pub true_i2: f64,
    pub abs_error_i1: f64,
    pub abs_error_i2: f64,
}

/// The singlet after qubit 2 passes through `p0·ρ + p·Σ σ_i ρ σ_i`.
pub fn singlet_through_depolarizing(p: f64) -> Result<DensityMatrix> {
    if !(0.0..=1.0 / 3.0).contains(&p) {
        return Err(Error::ParameterOutOfRange(format!("p = {p} outside [0, 1/3]")));
    }
    let id = ComplexMatrix::identity(2);
    let mut singlet = ComplexMatrix::identity(4);
    for sig in [sigma_x(), sigma_y(), sigma_z()] {
        singlet = &singlet - &sig.kron(&sig);
    }
    let singlet = DensityMatrix::new(singlet.scale_re(0.25))?;
    let p0 = 1.0 - 3.0 * p;
    let mut kraus = vec![id.kron(&id).scale_re(p0.sqrt())];
    for sig in [sigma_x(), sigma_y(), sigma_z()] {
        kraus.push(id.kron(&sig).scale_re(p.sqrt()));
    }
    let params = BTreeMap::from([("p".to_string(), vec![p])]);
    KrausChannel::new("singlet_depolarizing", 4, kraus, params)?.apply(&singlet)
}

fn ratio_error(a: f64, sa: f64, b: f64, sb: f64) -> f64 {
    (a / b).abs() * ((sa / a).powi(2) + (sb / b).powi(2)).sqrt()
}

/// Alice measures `σ·m̂` on qubit 1 and announces the outcome; Bob estimates
/// his three Pauli expectations on the conditional state.
pub fn run_remote_transfer(cfg: &RemoteTransferConfig) -> Result<RemoteTransferResult> {
    cfg.validate()?;
    let shared = singlet_through_depolarizing(cfg.p)?;
    let m = cfg.direction;
    let sm = &(&sigma_x().scale_re(m[0]) + &sigma_y().scale_re(m[1])) + &sigma_z().scale_re(m[2]);
    let proj = (&ComplexMatrix::identity(2) + &sm.scale_re(cfg.branch.sign())).scale_re(0.5);
    let lift = proj.kron(&ComplexMatrix::identity(2));
    let post = &(&lift * shared.matrix()) * &lift;
    let prob = post.trace().re;
    let bob = DensityMatrix::new(trace_first(&post).scale_re(1.0 / prob))?;
    let bob_bloch = super::bloch_vector(&bob)?;

    let per = cfg.shots / 3;
    let mut e = [0.0; 3];
    let mut se = [0.0; 3];
    for (i, sig) in [sigma_x(), sigma_y(), sigma_z()].iter().enumerate() {
        let r = measure_observable(&bob, sig, per, cfg.seed.derive(20, i as u64))?;
        e[i] = r.estimate.re;
        se[i] = r.standard_error;
    }
    let (i1, i2) = (e[1] / e[0], e[1] / e[2]);
    let (true_i1, true_i2) = (m[1] / m[0], m[1] / m[2]);
    Ok(RemoteTransferResult {
        alpha: cfg.alpha(),
        branch_probability: prob,
        bob_bloch,
        expectations: e,
        expectation_errors: se,
        i1,
        i2,
        i1_error: ratio_error(e[1], se[1], e[0], se[0]),
        i2_error: ratio_error(e[1], se[1], e[2], se[2]),
        true_i1,
        true_i2,
        abs_error_i1: (i1 - true_i1).abs(),
        abs_error_i2: (i2 - true_i2).abs(),
    })
}

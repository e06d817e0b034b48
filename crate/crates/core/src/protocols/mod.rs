//! End-to-end simulations that carry information in channel invariants.

mod qecc;
mod qkd;
mod remote;

pub use qecc::{
    qecc_apply_noise, qecc_encode, qecc_recover, qecc_syndrome, qecc_syndrome_probabilities, run_qecc_demo,
    QeccDemoConfig, QeccReport, Syndrome, QECC_DIM,
};
pub use qkd::{
    decode_key_symbol, default_threshold, eve_entangle_measure, eve_intercept_resend, intercept_resend_average,
    run_qkd, DecoyCheck, EveModel, Pauli, QkdConfig, QkdTranscript, RoundRecord, SiftingReveal, StateEstimate,
    BLOCH_FLOOR, MAX_RESAMPLES,
};
pub use remote::{
    run_remote_transfer, singlet_through_depolarizing, AliceOutcome, RemoteTransferConfig, RemoteTransferResult,
    ALPHA_FLOOR,
};

use crate::error::{Error, Result};
use crate::operators::{expectation, sigma_x, sigma_y, sigma_z, ComplexMatrix, DensityMatrix, ZERO};

/// `(⟨σx⟩, ⟨σy⟩, ⟨σz⟩)` of a qubit state.
pub fn bloch_vector(rho: &DensityMatrix) -> Result<[f64; 3]> {
    if rho.dim() != 2 {
        return Err(Error::DimensionMismatch { left: 2, right: rho.dim() });
    }
    Ok([
        expectation(rho, &sigma_x())?.re(),
        expectation(rho, &sigma_y())?.re(),
        expectation(rho, &sigma_z())?.re(),
    ])
}

/// Reduced state of the second qubit of a two-qubit operator.
pub(crate) fn trace_first(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2);
    for b in 0..2 {
        for c in 0..2 {
            let mut acc = ZERO;
            for a in 0..2 {
                acc += m.get(2 * a + b, 2 * a + c);
            }
            out.set(b, c, acc);
        }
    }
    out
}

/// Reduced state of the first qubit.
#[cfg(test)]
fn trace_second(m: &ComplexMatrix) -> ComplexMatrix {
    let mut out = ComplexMatrix::zeros(2);
    for a in 0..2 {
        for c in 0..2 {
            let mut acc = ZERO;
            for b in 0..2 {
                acc += m.get(2 * a + b, 2 * c + b);
            }
            out.set(a, c, acc);
        }
    }
    out
}

fn check_unit_vector(name: &str, v: [f64; 3]) -> Result<()> {
    let len = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !len.is_finite() || (len - 1.0).abs() > 1e-12 {
        return Err(Error::InvalidConfig(format!("{name} has length {len}, expected 1")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partial_traces_of_a_product() {
        let a = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
        let b = DensityMatrix::from_bloch([0.6, 0.0, 0.0]).unwrap();
        let ab = a.matrix().kron(b.matrix());
        assert!(trace_first(&ab).max_abs_diff(b.matrix()) < 1e-15);
        assert!(trace_second(&ab).max_abs_diff(a.matrix()) < 1e-15);
    }

    #[test]
    fn bloch_round_trip() {
        let r = [0.1, -0.4, 0.3];
        let got = bloch_vector(&DensityMatrix::from_bloch(r).unwrap()).unwrap();
        for i in 0..3 {
            assert!((got[i] - r[i]).abs() < 1e-15);
        }
    }
}

//! Invariants of noisy channels: functions `∏ <O_α>^{r_α}` of expectation
//! values that a channel leaves unchanged.

mod certify;
mod curated;
mod discovery;
mod superop;

pub use certify::{certify_invariant, CertificationReport, CertifyOptions};
pub use curated::{
    adjudicate_tabulated, count_independent, curated_invariants, hint_operators, tabulated_invariants, InvariantCount,
    TableAdjudication,
};
pub use discovery::{
    discover, discover_family1, discover_family2, discover_family3, match_curated, CuratedMatch, Discovery,
    DiscoveryOptions, Family3Search,
};
pub use superop::{
    adjoint_superoperator, align_groups, eigen_operators, group_by_eigenvalue, lambda_of, EigenDecomposition,
    EigenGroup, EigenOperator, Superoperator, DEFECT_TOL, GROUP_TOL, SPAN_TOL, ZERO_LAMBDA,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{expectation, ComplexMatrix, DensityMatrix, C64, ONE};

/// Denominator factors smaller than this make an invariant undefined.
pub const DENOMINATOR_FLOOR: f64 = 1e-10;
/// Operator tolerance for the Hermitian-up-to-phase test in counting.
const COUNT_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum InvariantKind {
    /// `<O>` with `λ = 1`.
    Family1,
    /// `<O1>/<O2>` with equal eigenvalues.
    Family2Ratio,
    /// `∏ <O_α>^{r_α}` with `∏ λ_α^{r_α} = 1`.
    Family3Product,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    Curated,
    Discovered,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct InvariantSpec {
    pub kind: InvariantKind,
    pub operators: Vec<ComplexMatrix>,
    pub exponents: Vec<i32>,
    pub label: String,
    pub provenance: Provenance,
    /// Eigenvalue of each operator, when known.
    #[serde(default, skip_serializing_if = "Vec::is_empty", with = "crate::operators::complex_list")]
    pub lambdas: Vec<C64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl InvariantSpec {
    pub fn new(
        kind: InvariantKind,
        operators: Vec<ComplexMatrix>,
        exponents: Vec<i32>,
        label: impl Into<String>,
        provenance: Provenance,
    ) -> Result<Self> {
        if operators.is_empty() || operators.len() != exponents.len() {
            return Err(Error::InvalidConfig(format!(
                "{} operators with {} exponents",
                operators.len(),
                exponents.len()
            )));
        }
        let n = operators[0].dim();
        if let Some(bad) = operators.iter().find(|o| o.dim() != n) {
            return Err(Error::DimensionMismatch {
                left: n,
                right: bad.dim(),
            });
        }
        Ok(Self {
            kind,
            operators,
            exponents,
            label: label.into(),
            provenance,
            lambdas: Vec::new(),
            note: None,
        })
    }

    pub fn family1(op: ComplexMatrix, label: impl Into<String>, provenance: Provenance) -> Self {
        Self::new(InvariantKind::Family1, vec![op], vec![1], label, provenance).unwrap()
    }

    pub fn ratio(num: ComplexMatrix, den: ComplexMatrix, label: impl Into<String>, provenance: Provenance) -> Result<Self> {
        Self::new(InvariantKind::Family2Ratio, vec![num, den], vec![1, -1], label, provenance)
    }

    pub fn dim(&self) -> usize {
        self.operators[0].dim()
    }

    /// Real parameters carried: one when every `<O_α>` is confined to a
    /// line through the origin (so the value has a fixed phase), else two.
    pub fn real_count(&self) -> usize {
        if self.operators.iter().all(|o| o.is_hermitian_up_to_phase(COUNT_TOL)) {
            1
        } else {
            2
        }
    }

    /// Indices of factors with negative exponent.
    pub fn denominators(&self) -> impl Iterator<Item = usize> + '_ {
        self.exponents.iter().enumerate().filter(|(_, r)| **r < 0).map(|(i, _)| i)
    }

    /// Expectation values `<O_α>` on `rho`.
    pub fn factors(&self, rho: &DensityMatrix) -> Result<Vec<C64>> {
        self.operators.iter().map(|o| Ok(expectation(rho, o)?.value)).collect()
    }

    /// `∏ v_α^{r_α}` from precomputed factors.
    pub fn combine(&self, factors: &[C64]) -> Result<C64> {
        let mut value = ONE;
        for ((v, r), i) in factors.iter().zip(&self.exponents).zip(0..) {
            if *r < 0 && v.norm() < DENOMINATOR_FLOOR {
                return Err(Error::DenominatorUnderflow {
                    label: format!("{} (factor {i})", self.label),
                    magnitude: v.norm(),
                });
            }
            value *= v.powi(*r);
        }
        Ok(value)
    }
}

/// `∏ <O_α>^{r_α}`.
pub fn evaluate_invariant(inv: &InvariantSpec, rho: &DensityMatrix) -> Result<C64> {
    if rho.dim() != inv.dim() {
        return Err(Error::DimensionMismatch {
            left: inv.dim(),
            right: rho.dim(),
        });
    }
    inv.combine(&inv.factors(rho)?)
}

/// Row of the exported invariant catalog.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CatalogEntry {
    pub label: String,
    pub kind: InvariantKind,
    pub exponents: Vec<i32>,
    pub operators: Vec<ComplexMatrix>,
    #[serde(with = "crate::operators::complex_list")]
    pub lambda: Vec<C64>,
    pub certified: Option<bool>,
    pub max_drift: Option<f64>,
}

impl CatalogEntry {
    pub fn new(inv: &InvariantSpec, report: Option<&CertificationReport>) -> Self {
        Self {
            label: inv.label.clone(),
            kind: inv.kind,
            exponents: inv.exponents.clone(),
            operators: inv.operators.clone(),
            lambda: inv.lambdas.clone(),
            certified: report.map(|r| r.certified),
            max_drift: report.map(|r| r.max_relative_drift),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operators::{make_x, sigma_x, sigma_z};

    #[test]
    fn family1_value_is_the_expectation() {
        let inv = InvariantSpec::family1(sigma_x(), "<sx>", Provenance::Curated);
        let rho = DensityMatrix::from_bloch([0.6, 0.0, 0.8]).unwrap();
        assert!((evaluate_invariant(&inv, &rho).unwrap() - 0.6).norm() < 1e-14);
    }

    #[test]
    fn ratio_on_maximally_mixed_state_underflows() {
        let inv = InvariantSpec::ratio(sigma_x(), sigma_z(), "<sx>/<sz>", Provenance::Curated).unwrap();
        let rho = DensityMatrix::maximally_mixed(2).unwrap();
        assert!(matches!(evaluate_invariant(&inv, &rho), Err(Error::DenominatorUnderflow { .. })));
    }

    #[test]
    fn real_count_distinguishes_unitary_powers() {
        assert_eq!(InvariantSpec::family1(make_x(3).unwrap(), "x", Provenance::Curated).real_count(), 2);
        assert_eq!(InvariantSpec::family1(make_x(4).unwrap().pow(2), "x2", Provenance::Curated).real_count(), 1);
        assert_eq!(InvariantSpec::family1(sigma_x(), "sx", Provenance::Curated).real_count(), 1);
    }

    #[test]
    fn mismatched_exponents_are_rejected() {
        assert!(InvariantSpec::new(InvariantKind::Family2Ratio, vec![sigma_x()], vec![1, -1], "bad", Provenance::Curated).is_err());
    }
}

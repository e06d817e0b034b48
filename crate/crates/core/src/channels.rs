//! Catalog of noisy channels as Kraus sets.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::{
    make_d, make_x, make_y, make_z, sigma_minus, sigma_plus, sigma_x, sigma_y, sigma_z, ComplexMatrix,
    DensityMatrix, C64, ONE,
};

/// Entrywise tolerance on `Σ E†E - 1`.
pub const CPTP_TOL: f64 = 1e-9;
/// Probability vectors within this of unit sum are renormalized; further
/// off they are rejected.
pub const PROB_SUM_TOL: f64 = 1e-12;
/// Default interval for sampled channel parameters.
pub const SAMPLE_RANGE: (f64, f64) = (0.05, 0.95);

/// A CPTP map `ρ ↦ Σ E ρ E†` given by its Kraus elements.
#[derive(Clone, Debug, Serialize)]
pub struct KrausChannel {
    pub name: String,
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
    pub params: BTreeMap<String, Vec<f64>>,
    #[serde(skip)]
    deviation: f64,
}

/// Outcome of checking `Σ E†E = 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CptpReport {
    pub max_deviation: f64,
    pub ok: bool,
}

fn completeness_deviation(dim: usize, kraus: &[ComplexMatrix]) -> f64 {
    let mut sum = ComplexMatrix::zeros(dim);
    for e in kraus {
        sum = &sum + &(&e.adjoint() * e);
    }
    sum.max_abs_diff(&ComplexMatrix::identity(dim))
}

/// Checks trace preservation of an arbitrary Kraus list.
pub fn validate_kraus(dim: usize, kraus: &[ComplexMatrix]) -> CptpReport {
    if kraus.is_empty() || kraus.iter().any(|e| e.dim() != dim) {
        return CptpReport {
            max_deviation: f64::INFINITY,
            ok: false,
        };
    }
    let max_deviation = completeness_deviation(dim, kraus);
    CptpReport {
        max_deviation,
        ok: max_deviation <= CPTP_TOL,
    }
}

impl KrausChannel {
    /// Builds a channel without requiring completeness; [`KrausChannel::apply`]
    /// refuses to act with a non-CPTP set.
    pub fn from_kraus(
        name: impl Into<String>,
        dim: usize,
        kraus: Vec<ComplexMatrix>,
        params: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidDimension(dim));
        }
        if kraus.is_empty() {
            return Err(Error::EmptyChannel);
        }
        if let Some(bad) = kraus.iter().find(|e| e.dim() != dim) {
            return Err(Error::DimensionMismatch {
                left: dim,
                right: bad.dim(),
            });
        }
        let deviation = completeness_deviation(dim, &kraus);
        Ok(Self {
            name: name.into(),
            dim,
            kraus,
            params,
            deviation,
        })
    }

    /// Like [`KrausChannel::from_kraus`] but rejects non-CPTP sets.
    pub fn new(
        name: impl Into<String>,
        dim: usize,
        kraus: Vec<ComplexMatrix>,
        params: BTreeMap<String, Vec<f64>>,
    ) -> Result<Self> {
        let ch = Self::from_kraus(name, dim, kraus, params)?;
        if ch.deviation > CPTP_TOL {
            return Err(Error::NotCptp(ch.deviation));
        }
        Ok(ch)
    }

    pub fn validate_cptp(&self) -> CptpReport {
        CptpReport {
            max_deviation: self.deviation,
            ok: self.deviation <= CPTP_TOL,
        }
    }

    pub fn is_cptp(&self) -> bool {
        self.deviation <= CPTP_TOL
    }

    /// `Σ E ρ E†`.
    pub fn apply(&self, rho: &DensityMatrix) -> Result<DensityMatrix> {
        if rho.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: rho.dim(),
            });
        }
        if !self.is_cptp() {
            return Err(Error::NotCptp(self.deviation));
        }
        let mut out = ComplexMatrix::zeros(self.dim);
        for e in &self.kraus {
            out = &out + &(&(e * rho.matrix()) * &e.adjoint());
        }
        let herm = (&out + &out.adjoint()).scale_re(0.5);
        Ok(DensityMatrix::from_matrix_unchecked(herm))
    }

    /// Heisenberg-picture action `Σ E† O E`.
    pub fn adjoint_apply(&self, op: &ComplexMatrix) -> Result<ComplexMatrix> {
        if op.dim() != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: op.dim(),
            });
        }
        let mut out = ComplexMatrix::zeros(self.dim);
        for e in &self.kraus {
            out = &out + &(&(&e.adjoint() * op) * e);
        }
        Ok(out)
    }

    /// Sequential composition: `other` after `self`.
    pub fn then(&self, other: &KrausChannel) -> Result<KrausChannel> {
        if other.dim != self.dim {
            return Err(Error::DimensionMismatch {
                left: self.dim,
                right: other.dim,
            });
        }
        let kraus = other
            .kraus
            .iter()
            .flat_map(|b| self.kraus.iter().map(move |a| b * a))
            .collect();
        KrausChannel::from_kraus(
            format!("{}+{}", self.name, other.name),
            self.dim,
            kraus,
            BTreeMap::new(),
        )
    }
}

fn single(name: &str, value: f64) -> BTreeMap<String, Vec<f64>> {
    BTreeMap::from([(name.to_string(), vec![value])])
}

fn check_unit(name: &str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) || !value.is_finite() {
        return Err(Error::ParameterOutOfRange(format!("{name} = {value} not in [0, 1]")));
    }
    Ok(())
}

fn check_dim(n: usize) -> Result<()> {
    if n < 2 {
        return Err(Error::InvalidDimension(n));
    }
    Ok(())
}

/// Validates a probability vector; sums within [`PROB_SUM_TOL`] of one are
/// renormalized.
pub fn normalize_probabilities(p: &[f64]) -> Result<Vec<f64>> {
    if p.is_empty() {
        return Err(Error::InvalidProbabilities("empty vector".into()));
    }
    if let Some(bad) = p.iter().find(|x| !x.is_finite() || **x < 0.0) {
        return Err(Error::InvalidProbabilities(format!("entry {bad} is negative or not finite")));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > PROB_SUM_TOL {
        return Err(Error::InvalidProbabilities(format!("entries sum to {sum}, not 1")));
    }
    Ok(p.iter().map(|x| x / sum).collect())
}

fn weighted_unitaries(
    name: &str,
    dim: usize,
    weights: &[f64],
    unitaries: Vec<ComplexMatrix>,
    params: BTreeMap<String, Vec<f64>>,
) -> Result<KrausChannel> {
    let kraus: Vec<ComplexMatrix> = weights
        .iter()
        .zip(unitaries)
        .filter(|(w, _)| **w > 0.0)
        .map(|(w, u)| u.scale_re(w.sqrt()))
        .collect();
    let kraus = if kraus.is_empty() {
        vec![ComplexMatrix::identity(dim)]
    } else {
        kraus
    };
    KrausChannel::new(name, dim, kraus, params)
}

pub fn identity(n: usize) -> Result<KrausChannel> {
    check_dim(n)?;
    KrausChannel::new("identity", n, vec![ComplexMatrix::identity(n)], BTreeMap::new())
}

/// Generalized Pauli channel with Kraus elements `√p_rs X^r Z^s`; `p` is
/// the row-major `N×N` table indexed by `(r, s)`.
pub fn generalized_pauli(n: usize, p: &[f64]) -> Result<KrausChannel> {
    check_dim(n)?;
    if p.len() != n * n {
        return Err(Error::InvalidProbabilities(format!(
            "expected {} entries, got {}",
            n * n,
            p.len()
        )));
    }
    let p = normalize_probabilities(p)?;
    let (x, z) = (make_x(n)?, make_z(n)?);
    let unitaries = (0..n)
        .flat_map(|r| (0..n).map(move |s| (r, s)))
        .map(|(r, s)| &x.pow(r as u32) * &z.pow(s as u32))
        .collect();
    weighted_unitaries("generalized_pauli", n, &p, unitaries, BTreeMap::from([("p".into(), p.clone())]))
}

fn powers_channel(name: &str, n: usize, p: &[f64], u: ComplexMatrix) -> Result<KrausChannel> {
    check_dim(n)?;
    if p.len() != n {
        return Err(Error::InvalidProbabilities(format!("expected {n} entries, got {}", p.len())));
    }
    let p = normalize_probabilities(p)?;
    let unitaries = (0..n).map(|r| u.pow(r as u32)).collect();
    weighted_unitaries(name, n, &p, unitaries, BTreeMap::from([("p".into(), p.clone())]))
}

/// `Σ_r p_r X^r ρ X^{-r}`.
pub fn generalized_flip(n: usize, p: &[f64]) -> Result<KrausChannel> {
    powers_channel("generalized_flip", n, p, make_x(n)?)
}

/// `Σ_r p_r Z^r ρ Z^{-r}`.
pub fn generalized_phase(n: usize, p: &[f64]) -> Result<KrausChannel> {
    powers_channel("generalized_phase", n, p, make_z(n)?)
}

/// `Σ_r p_r Y^r ρ Y^{-r}` with `Y = XZ`.
pub fn generalized_flip_phase(n: usize, p: &[f64]) -> Result<KrausChannel> {
    powers_channel("generalized_flip_phase", n, p, make_y(n)?)
}

/// `ρ ↦ (1-p)ρ + p/N`, realized by the Weyl set with weights
/// `1 - p(N²-1)/N²` on the identity and `p/N²` elsewhere.
pub fn depolarizing(n: usize, p: f64) -> Result<KrausChannel> {
    check_dim(n)?;
    check_unit("p", p)?;
    let n2 = (n * n) as f64;
    let mut weights = vec![p / n2; n * n];
    weights[0] = 1.0 - p * (n2 - 1.0) / n2;
    let (x, z) = (make_x(n)?, make_z(n)?);
    let unitaries = (0..n)
        .flat_map(|r| (0..n).map(move |s| (r, s)))
        .map(|(r, s)| &x.pow(r as u32) * &z.pow(s as u32))
        .collect();
    weighted_unitaries("depolarizing", n, &weights, unitaries, single("p", p))
}

/// Kraus elements `√p_j (1 - 2|j><j|)` for `j < N` and `√p_N 1`.
pub fn dephasing(n: usize, p: &[f64]) -> Result<KrausChannel> {
    check_dim(n)?;
    if p.len() != n + 1 {
        return Err(Error::InvalidProbabilities(format!(
            "expected {} entries, got {}",
            n + 1,
            p.len()
        )));
    }
    let p = normalize_probabilities(p)?;
    let id = ComplexMatrix::identity(n);
    let mut unitaries: Vec<ComplexMatrix> = (0..n)
        .map(|j| Ok(&id - &make_d(j, n)?.scale_re(2.0)))
        .collect::<Result<_>>()?;
    unitaries.push(id);
    weighted_unitaries("dephasing", n, &p, unitaries, BTreeMap::from([("p".into(), p.clone())]))
}

/// Rates `γ_nm` for `n > m` flattened in order `(1,0), (2,0), (2,1), (3,0), ...`.
pub fn flatten_rates(gamma: &[Vec<f64>]) -> Vec<f64> {
    let n = gamma.len();
    (1..n).flat_map(|i| (0..i).map(move |m| gamma[i][m])).collect()
}

/// Inverse of [`flatten_rates`].
pub fn unflatten_rates(n: usize, flat: &[f64]) -> Result<Vec<Vec<f64>>> {
    if flat.len() != n * (n - 1) / 2 {
        return Err(Error::ParameterOutOfRange(format!(
            "expected {} rates, got {}",
            n * (n - 1) / 2,
            flat.len()
        )));
    }
    let mut gamma = vec![vec![0.0; n]; n];
    let mut it = flat.iter();
    for (i, row) in gamma.iter_mut().enumerate().skip(1) {
        for cell in row.iter_mut().take(i) {
            *cell = *it.next().unwrap();
        }
    }
    Ok(gamma)
}

/// quNit amplitude damping. `gamma[n][m]` (for `m < n`) is the rate from
/// level `n` to level `m`; entries on or above the diagonal must vanish.
pub fn amplitude_damping(n: usize, gamma: &[Vec<f64>]) -> Result<KrausChannel> {
    check_dim(n)?;
    if gamma.len() != n || gamma.iter().any(|r| r.len() != n) {
        return Err(Error::ParameterOutOfRange(format!("rate table must be {n}x{n}")));
    }
    for (i, row) in gamma.iter().enumerate() {
        for (m, &g) in row.iter().enumerate() {
            if m >= i && g != 0.0 {
                return Err(Error::ParameterOutOfRange(format!(
                    "rate gamma[{i}][{m}] must be zero (only downward transfer)"
                )));
            }
            check_unit(&format!("gamma[{i}][{m}]"), g)?;
        }
    }
    let xi: Vec<f64> = gamma.iter().map(|r| r.iter().sum()).collect();
    if let Some((i, x)) = xi.iter().enumerate().find(|(_, x)| **x > 1.0 + PROB_SUM_TOL) {
        return Err(Error::ParameterOutOfRange(format!("xi_{i} = {x} exceeds 1")));
    }
    let diag: Vec<C64> = xi
        .iter()
        .enumerate()
        .map(|(i, x)| if i == 0 { ONE } else { C64::new((1.0 - x).max(0.0).sqrt(), 0.0) })
        .collect();
    let mut kraus = vec![ComplexMatrix::from_diag(&diag)];
    for (i, row) in gamma.iter().enumerate() {
        for (m, &g) in row.iter().enumerate().take(i) {
            if g > 0.0 {
                let mut e = ComplexMatrix::zeros(n);
                e.set(m, i, C64::new(g.sqrt(), 0.0));
                kraus.push(e);
            }
        }
    }
    KrausChannel::new(
        "amplitude_damping",
        n,
        kraus,
        BTreeMap::from([("gamma".into(), flatten_rates(gamma))]),
    )
}

fn qubit_mixture(name: &str, p: f64, u: ComplexMatrix) -> Result<KrausChannel> {
    check_unit("p", p)?;
    KrausChannel::new(
        name,
        2,
        vec![ComplexMatrix::identity(2).scale_re((1.0 - p).sqrt()), u.scale_re(p.sqrt())],
        single("p", p),
    )
}

pub fn bit_flip(p: f64) -> Result<KrausChannel> {
    qubit_mixture("bit_flip", p, sigma_x())
}

pub fn phase_flip(p: f64) -> Result<KrausChannel> {
    qubit_mixture("phase_flip", p, sigma_z())
}

pub fn bit_phase_flip(p: f64) -> Result<KrausChannel> {
    qubit_mixture("bit_phase_flip", p, sigma_y())
}

/// `√(1-3p/4) 1`, `√(p/4) σx`, `√(p/4) σy`, `√(p/4) σz`.
pub fn depolarizing_qubit(p: f64) -> Result<KrausChannel> {
    check_unit("p", p)?;
    let a = (1.0 - 0.75 * p).sqrt();
    let b = (0.25 * p).sqrt();
    KrausChannel::new(
        "depolarizing_qubit",
        2,
        vec![
            ComplexMatrix::identity(2).scale_re(a),
            sigma_x().scale_re(b),
            sigma_y().scale_re(b),
            sigma_z().scale_re(b),
        ],
        single("p", p),
    )
}

/// `½((1 ± √(1-q)) 1 ± (1 ∓ √(1-q)) σz)`: the damping diagonal, with the
/// sign choosing which level decays.
fn damping_diagonal(q: f64, decay_upper: bool) -> ComplexMatrix {
    let s = (1.0 - q).sqrt();
    let id = ComplexMatrix::identity(2).scale_re(1.0 + s);
    let z = sigma_z().scale_re(1.0 - s);
    let m = if decay_upper { &id + &z } else { &id - &z };
    m.scale_re(0.5)
}

/// `E0 = ½((1+√(1-q))1 + (1-√(1-q))σz)`, `E1 = √q σ+/2`.
pub fn adc_qubit(q: f64) -> Result<KrausChannel> {
    check_unit("q", q)?;
    KrausChannel::new(
        "adc_qubit",
        2,
        vec![damping_diagonal(q, true), sigma_plus().scale_re(q.sqrt() / 2.0)],
        single("q", q),
    )
}

/// Generalized amplitude damping with `p2 = 1 - p1`.
pub fn gadc_qubit(q: f64, p1: f64) -> Result<KrausChannel> {
    check_unit("q", q)?;
    check_unit("p1", p1)?;
    let p2 = 1.0 - p1;
    let kraus = vec![
        damping_diagonal(q, true).scale_re(p1.sqrt()),
        sigma_plus().scale_re((p1 * q).sqrt() / 2.0),
        damping_diagonal(q, false).scale_re(p2.sqrt()),
        sigma_minus().scale_re((p2 * q).sqrt() / 2.0),
    ];
    KrausChannel::new(
        "gadc_qubit",
        2,
        kraus,
        BTreeMap::from([("q".into(), vec![q]), ("p1".into(), vec![p1])]),
    )
}

/// Every constructor of the catalog.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Identity,
    GeneralizedPauli,
    GeneralizedFlip,
    GeneralizedPhase,
    GeneralizedFlipPhase,
    Depolarizing,
    Dephasing,
    AmplitudeDamping,
    BitFlip,
    PhaseFlip,
    BitPhaseFlip,
    DepolarizingQubit,
    AdcQubit,
    GadcQubit,
}

impl ChannelKind {
    pub const ALL: [ChannelKind; 14] = [
        ChannelKind::Identity,
        ChannelKind::GeneralizedPauli,
        ChannelKind::GeneralizedFlip,
        ChannelKind::GeneralizedPhase,
        ChannelKind::GeneralizedFlipPhase,
        ChannelKind::Depolarizing,
        ChannelKind::Dephasing,
        ChannelKind::AmplitudeDamping,
        ChannelKind::BitFlip,
        ChannelKind::PhaseFlip,
        ChannelKind::BitPhaseFlip,
        ChannelKind::DepolarizingQubit,
        ChannelKind::AdcQubit,
        ChannelKind::GadcQubit,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            ChannelKind::Identity => "identity",
            ChannelKind::GeneralizedPauli => "generalized_pauli",
            ChannelKind::GeneralizedFlip => "generalized_flip",
            ChannelKind::GeneralizedPhase => "generalized_phase",
            ChannelKind::GeneralizedFlipPhase => "generalized_flip_phase",
            ChannelKind::Depolarizing => "depolarizing",
            ChannelKind::Dephasing => "dephasing",
            ChannelKind::AmplitudeDamping => "amplitude_damping",
            ChannelKind::BitFlip => "bit_flip",
            ChannelKind::PhaseFlip => "phase_flip",
            ChannelKind::BitPhaseFlip => "bit_phase_flip",
            ChannelKind::DepolarizingQubit => "depolarizing_qubit",
            ChannelKind::AdcQubit => "adc_qubit",
            ChannelKind::GadcQubit => "gadc_qubit",
        }
    }

    /// Qubit-only constructors.
    pub fn fixed_dim(&self) -> Option<usize> {
        match self {
            ChannelKind::BitFlip
            | ChannelKind::PhaseFlip
            | ChannelKind::BitPhaseFlip
            | ChannelKind::DepolarizingQubit
            | ChannelKind::AdcQubit
            | ChannelKind::GadcQubit => Some(2),
            _ => None,
        }
    }

    pub fn param_specs(&self, n: usize) -> Vec<ParamSpec> {
        let spec = |name: &str, len: usize, constraint: &str| ParamSpec {
            name: name.into(),
            len,
            min: 0.0,
            max: 1.0,
            constraint: constraint.into(),
        };
        match self {
            ChannelKind::Identity => vec![],
            ChannelKind::GeneralizedPauli => vec![spec("p", n * n, "row-major p[r][s], sums to 1")],
            ChannelKind::GeneralizedFlip | ChannelKind::GeneralizedPhase | ChannelKind::GeneralizedFlipPhase => {
                vec![spec("p", n, "p[r] for the r-th power, sums to 1")]
            }
            ChannelKind::Depolarizing => vec![spec("p", 1, "white-noise weight")],
            ChannelKind::Dephasing => vec![spec("p", n + 1, "p[j] for 1-2|j><j| (j<N), p[N] for identity; sums to 1")],
            ChannelKind::AmplitudeDamping => vec![spec(
                "gamma",
                n * (n - 1) / 2,
                "gamma[n][m] for m<n in order (1,0),(2,0),(2,1),...; each row sum <= 1",
            )],
            ChannelKind::BitFlip | ChannelKind::PhaseFlip | ChannelKind::BitPhaseFlip | ChannelKind::DepolarizingQubit => {
                vec![spec("p", 1, "error probability")]
            }
            ChannelKind::AdcQubit => vec![spec("q", 1, "damping probability")],
            ChannelKind::GadcQubit => vec![spec("q", 1, "damping probability"), spec("p1", 1, "p2 = 1 - p1")],
        }
    }
}

impl fmt::Display for ChannelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ChannelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        ChannelKind::ALL
            .iter()
            .copied()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::UnknownChannel(s.to_string()))
    }
}

/// A named parameter with its admissible range.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ParamSpec {
    pub name: String,
    pub len: usize,
    pub min: f64,
    pub max: f64,
    pub constraint: String,
}

/// A channel constructor at fixed dimension together with a sampler of
/// admissible parameter draws.
#[derive(Clone, Debug, Serialize)]
pub struct ChannelFamily {
    pub name: String,
    pub dim: usize,
    pub params: Vec<ParamSpec>,
    #[serde(skip)]
    pub kind: ChannelKind,
    #[serde(skip)]
    pub draw_range: (f64, f64),
}

fn param<'a>(params: &'a BTreeMap<String, Vec<f64>>, name: &str, len: usize) -> Result<&'a [f64]> {
    let v = params
        .get(name)
        .ok_or_else(|| Error::ParameterOutOfRange(format!("missing parameter `{name}`")))?;
    if v.len() != len {
        return Err(Error::ParameterOutOfRange(format!(
            "parameter `{name}` needs {len} values, got {}",
            v.len()
        )));
    }
    Ok(v)
}

impl ChannelFamily {
    pub fn new(kind: ChannelKind, dim: usize) -> Result<Self> {
        check_dim(dim)?;
        if let Some(fixed) = kind.fixed_dim() {
            if fixed != dim {
                return Err(Error::InvalidDimension(dim));
            }
        }
        Ok(Self {
            name: kind.name().into(),
            dim,
            params: kind.param_specs(dim),
            kind,
            draw_range: SAMPLE_RANGE,
        })
    }

    pub fn by_name(name: &str, dim: usize) -> Result<Self> {
        Self::new(name.parse()?, dim)
    }

    /// Builds the channel from explicit parameters.
    pub fn build(&self, params: &BTreeMap<String, Vec<f64>>) -> Result<KrausChannel> {
        let n = self.dim;
        let scalar = |name: &str| -> Result<f64> { Ok(param(params, name, 1)?[0]) };
        match self.kind {
            ChannelKind::Identity => identity(n),
            ChannelKind::GeneralizedPauli => generalized_pauli(n, param(params, "p", n * n)?),
            ChannelKind::GeneralizedFlip => generalized_flip(n, param(params, "p", n)?),
            ChannelKind::GeneralizedPhase => generalized_phase(n, param(params, "p", n)?),
            ChannelKind::GeneralizedFlipPhase => generalized_flip_phase(n, param(params, "p", n)?),
            ChannelKind::Depolarizing => depolarizing(n, scalar("p")?),
            ChannelKind::Dephasing => dephasing(n, param(params, "p", n + 1)?),
            ChannelKind::AmplitudeDamping => {
                let flat = param(params, "gamma", n * (n - 1) / 2)?;
                amplitude_damping(n, &unflatten_rates(n, flat)?)
            }
            ChannelKind::BitFlip => bit_flip(scalar("p")?),
            ChannelKind::PhaseFlip => phase_flip(scalar("p")?),
            ChannelKind::BitPhaseFlip => bit_phase_flip(scalar("p")?),
            ChannelKind::DepolarizingQubit => depolarizing_qubit(scalar("p")?),
            ChannelKind::AdcQubit => adc_qubit(scalar("q")?),
            ChannelKind::GadcQubit => gadc_qubit(scalar("q")?, scalar("p1")?),
        }
    }

    /// Draws admissible parameters away from the boundary.
    pub fn sample_params<R: Rng + ?Sized>(&self, rng: &mut R) -> BTreeMap<String, Vec<f64>> {
        let (lo, hi) = self.draw_range;
        let n = self.dim;
        let mut draw = || rng.random_range(lo..hi);
        let mut simplex = |len: usize| -> Vec<f64> {
            let w: Vec<f64> = (0..len).map(|_| draw()).collect();
            let s: f64 = w.iter().sum();
            let mut p: Vec<f64> = w.iter().map(|x| x / s).collect();
            // exact unit sum
            let rest: f64 = p[1..].iter().sum();
            p[0] = 1.0 - rest;
            p
        };
        let mut out = BTreeMap::new();
        match self.kind {
            ChannelKind::Identity => {}
            ChannelKind::GeneralizedPauli => {
                out.insert("p".into(), simplex(n * n));
            }
            ChannelKind::GeneralizedFlip | ChannelKind::GeneralizedPhase | ChannelKind::GeneralizedFlipPhase => {
                out.insert("p".into(), simplex(n));
            }
            ChannelKind::Dephasing => {
                out.insert("p".into(), simplex(n + 1));
            }
            ChannelKind::AmplitudeDamping => {
                let mut gamma = vec![vec![0.0; n]; n];
                for (i, row) in gamma.iter_mut().enumerate().skip(1) {
                    let total = rng.random_range(lo..hi);
                    let w: Vec<f64> = (0..i).map(|_| rng.random_range(lo..hi)).collect();
                    let s: f64 = w.iter().sum();
                    for (m, wm) in w.iter().enumerate() {
                        row[m] = total * wm / s;
                    }
                }
                out.insert("gamma".into(), flatten_rates(&gamma));
            }
            ChannelKind::Depolarizing
            | ChannelKind::BitFlip
            | ChannelKind::PhaseFlip
            | ChannelKind::BitPhaseFlip
            | ChannelKind::DepolarizingQubit => {
                out.insert("p".into(), vec![rng.random_range(lo..hi)]);
            }
            ChannelKind::AdcQubit => {
                out.insert("q".into(), vec![rng.random_range(lo..hi)]);
            }
            ChannelKind::GadcQubit => {
                out.insert("q".into(), vec![rng.random_range(lo..hi)]);
                out.insert("p1".into(), vec![rng.random_range(lo..hi)]);
            }
        }
        out
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<KrausChannel> {
        let params = self.sample_params(rng);
        self.build(&params)
    }
}

/// On-disk channel definition.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ChannelFile {
    pub name: String,
    pub dim: usize,
    pub kraus: Vec<ComplexMatrix>,
    #[serde(default)]
    pub params: BTreeMap<String, serde_json::Value>,
}

fn numeric_params(raw: &BTreeMap<String, serde_json::Value>) -> BTreeMap<String, Vec<f64>> {
    raw.iter()
        .filter_map(|(k, v)| {
            let values = match v {
                serde_json::Value::Number(x) => vec![x.as_f64()?],
                serde_json::Value::Array(xs) => xs.iter().map(|x| x.as_f64()).collect::<Option<Vec<_>>>()?,
                _ => return None,
            };
            Some((k.clone(), values))
        })
        .collect()
}

impl ChannelFile {
    pub fn parse(json: &str) -> Result<Self> {
        serde_json::from_str(json).map_err(|e| Error::Parse(e.to_string()))
    }

    /// The Kraus set as a channel without enforcing completeness.
    pub fn to_channel_unchecked(&self) -> Result<KrausChannel> {
        KrausChannel::from_kraus(self.name.clone(), self.dim, self.kraus.clone(), numeric_params(&self.params))
    }

    /// The channel, rejected unless CPTP within [`CPTP_TOL`].
    pub fn to_channel(&self) -> Result<KrausChannel> {
        let ch = self.to_channel_unchecked()?;
        if !ch.is_cptp() {
            return Err(Error::NotCptp(ch.validate_cptp().max_deviation));
        }
        Ok(ch)
    }

    pub fn from_channel(ch: &KrausChannel) -> Self {
        Self {
            name: ch.name.clone(),
            dim: ch.dim,
            kraus: ch.kraus.clone(),
            params: ch
                .params
                .iter()
                .map(|(k, v)| (k.clone(), serde_json::json!(v)))
                .collect(),
        }
    }
}

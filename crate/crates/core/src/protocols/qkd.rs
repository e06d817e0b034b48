//! Key distribution over a depolarizing channel with the key carried by the
//! signs of `I1 = ⟨σx⟩/⟨σz⟩` and `I2 = ⟨σy⟩/⟨σz⟩`, checked by decoys.

use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{bloch_vector, check_unit_vector, trace_first};
use crate::error::{Error, Result};
use crate::operators::{random_pure_state_with, ComplexMatrix, DensityMatrix, ONE};
use crate::rng::RngSeed;

/// Message states need `min |⟨σ_i⟩|` at least this large.
pub const BLOCH_FLOOR: f64 = 0.2;
/// Draws allowed per message state before giving up.
pub const MAX_RESAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EveModel {
    None,
    InterceptResend,
    EntangleMeasure,
}

impl FromStr for EveModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "intercept" | "intercept_resend" => Ok(Self::InterceptResend),
            "entangle" | "entangle_measure" => Ok(Self::EntangleMeasure),
            _ => Err(Error::Parse(format!("unknown eavesdropper `{s}` (none, intercept, entangle)"))),
        }
    }
}

impl fmt::Display for EveModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::None => "none",
            Self::InterceptResend => "intercept_resend",
            Self::EntangleMeasure => "entangle_measure",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Pauli {
    #[serde(rename = "sx")]
    X,
    #[serde(rename = "sy")]
    Y,
    #[serde(rename = "sz")]
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    pub fn index(self) -> usize {
        self as usize
    }
}

/// Alice's abort threshold on decoy disagreement when the channel strength
/// is `p`: a matching-axis decoy disagrees with probability `p/2` without
/// an eavesdropper.
pub fn default_threshold(p: f64) -> f64 {
    (p / 2.0 + 0.05).max(0.1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QkdConfig {
    /// `k`, the number of message states.
    pub message_states: usize,
    /// `M`, copies of each message state.
    pub copies: usize,
    /// Probability that a round carries a decoy.
    pub decoy_fraction: f64,
    /// The two decoy axes; each must be a Pauli axis so that Bob's random
    /// basis choice can match it.
    pub decoy_axes: [[f64; 3]; 2],
    pub eve: EveModel,
    /// Depolarizing strength, `ρ ↦ (1-p)ρ + p·1/2`.
    pub channel_p: f64,
    pub detection_threshold: f64,
    /// Keep every round and the sifting reveal in the transcript.
    pub record_rounds: bool,
    pub seed: RngSeed,
}

impl QkdConfig {
    /// Decoys on `ẑ` and `x̂`, a tenth of the rounds, default threshold.
    pub fn new(message_states: usize, copies: usize, channel_p: f64, eve: EveModel, seed: RngSeed) -> Self {
        Self {
            message_states,
            copies,
            decoy_fraction: 0.1,
            decoy_axes: [[0.0, 0.0, 1.0], [1.0, 0.0, 0.0]],
            eve,
            channel_p,
            detection_threshold: default_threshold(channel_p),
            record_rounds: false,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.message_states == 0 {
            return Err(Error::InvalidConfig("need at least one message state".into()));
        }
        if self.copies < 100 {
            return Err(Error::InvalidConfig(format!("{} copies per state; need at least 100", self.copies)));
        }
        if !(self.decoy_fraction > 0.0 && self.decoy_fraction < 1.0) {
            return Err(Error::InvalidConfig(format!("decoy fraction {} not in (0,1)", self.decoy_fraction)));
        }
        if !(self.detection_threshold > 0.0 && self.detection_threshold < 1.0) {
            return Err(Error::InvalidConfig(format!(
                "detection threshold {} not in (0,1)",
                self.detection_threshold
            )));
        }
        if !(0.0..=1.0).contains(&self.channel_p) {
            return Err(Error::InvalidConfig(format!("channel p = {} not in [0,1]", self.channel_p)));
        }
        for a in &self.decoy_axes {
            pauli_axis(*a)?;
        }
        Ok(())
    }
}

/// `(axis index, sign)` of a unit vector along a coordinate axis.
fn pauli_axis(v: [f64; 3]) -> Result<(usize, f64)> {
    check_unit_vector("decoy axis", v)?;
    (0..3)
        .find(|&i| (v[i].abs() - 1.0).abs() <= 1e-12)
        .map(|i| (i, v[i].signum()))
        .ok_or_else(|| Error::InvalidConfig(format!("decoy axis {v:?} is not along x, y or z")))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundRecord {
    pub round: u64,
    pub decoy: bool,
    /// Message state index, or decoy index `0..4` (axis `i/2`, sign `+` for even `i`).
    pub state: usize,
    pub observable: Pauli,
    pub outcome: i8,
}

/// What Alice announces: decoy positions, then the rounds of each message state.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SiftingReveal {
    pub decoy_rounds: Vec<u64>,
    pub state_rounds: Vec<Vec<u64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoyCheck {
    pub axis: [f64; 3],
    /// Decoy rounds where Bob measured along this axis.
    pub checks: u64,
    pub disagreements: u64,
    pub rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateEstimate {
    pub state: usize,
    /// Alice's Bloch vector.
    pub prepared: [f64; 3],
    /// Bob's measurement counts per Pauli.
    pub counts: [u64; 3],
    /// Bob's sample means of `σx, σy, σz`.
    pub expectations: [f64; 3],
    pub i1: f64,
    pub i2: f64,
    pub exact_i1: f64,
    pub exact_i2: f64,
    pub bits: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QkdTranscript {
    pub config: QkdConfig,
    pub total_rounds: u64,
    pub decoy_rounds: u64,
    pub decoy_checks: Vec<DecoyCheck>,
    /// Largest per-axis disagreement rate; the abort statistic.
    pub disagreement_rate: f64,
    /// Disagreement pooled over both axes.
    pub pooled_disagreement_rate: f64,
    pub aborted: bool,
    /// Empty when aborted: Alice never reveals the grouping.
    pub estimates: Vec<StateEstimate>,
    /// Bob's key; present iff not aborted.
    pub key_bits: Option<String>,
    /// Key implied by the exact invariants of Alice's states.
    pub alice_key: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub records: Option<Vec<RoundRecord>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sifting: Option<SiftingReveal>,
}

impl QkdTranscript {
    pub fn key_matches(&self) -> bool {
        self.key_bits.as_deref() == Some(self.alice_key.as_str())
    }
}

/// Sign map `(+,+) → 00, (+,-) → 01, (-,+) → 10, (-,-) → 11`.
pub fn decode_key_symbol(i1: f64, i2: f64) -> Result<[u8; 2]> {
    if i1 == 0.0 || i2 == 0.0 || !i1.is_finite() || !i2.is_finite() {
        return Err(Error::ZeroInvariant);
    }
    Ok([u8::from(i1 < 0.0), u8::from(i2 < 0.0)])
}

fn symbol_string(bits: [u8; 2]) -> String {
    format!("{}{}", bits[0], bits[1])
}

fn axis_vector(i: usize, s: f64) -> [f64; 3] {
    let mut v = [0.0; 3];
    v[i] = s;
    v
}

/// Outcome `±1` of measuring `σ_i` on Bloch vector `r`.
fn measure_axis<R: Rng + ?Sized>(r: &[f64; 3], i: usize, rng: &mut R) -> f64 {
    if rng.random::<f64>() < 0.5 * (1.0 + r[i]) {
        1.0
    } else {
        -1.0
    }
}

fn intercept_bloch<R: Rng + ?Sized>(r: &[f64; 3], rng: &mut R) -> [f64; 3] {
    let axis = rng.random_range(0..3);
    axis_vector(axis, measure_axis(r, axis, rng))
}

fn entangle_bloch(r: &[f64; 3]) -> [f64; 3] {
    [0.0, 0.0, r[2]]
}

/// Eve measures a uniformly chosen Pauli and forwards the eigenstate she saw.
pub fn eve_intercept_resend(state: &DensityMatrix, seed: RngSeed) -> Result<DensityMatrix> {
    let r = bloch_vector(state)?;
    DensityMatrix::from_bloch(intercept_bloch(&r, &mut seed.rng()))
}

/// Average of [`eve_intercept_resend`] over Eve's basis and outcome: every
/// Bloch component shrinks to a third.
pub fn intercept_resend_average(state: &DensityMatrix) -> Result<DensityMatrix> {
    let r = bloch_vector(state)?;
    DensityMatrix::from_bloch([r[0] / 3.0, r[1] / 3.0, r[2] / 3.0])
}

/// Eve couples the flying qubit to a fresh ancilla with a controlled-NOT and
/// measures the ancilla in `σz`. Returns Bob's reduced state, which does not
/// depend on Eve's unannounced result, and that result (`±1`).
pub fn eve_entangle_measure(state: &DensityMatrix, seed: RngSeed) -> Result<(DensityMatrix, i8)> {
    if state.dim() != 2 {
        return Err(Error::DimensionMismatch { left: 2, right: state.dim() });
    }
    let mut cnot = ComplexMatrix::zeros(4);
    // ancilla is the first factor, flying qubit the second
    for (row, col) in [(0, 0), (1, 3), (2, 2), (3, 1)] {
        cnot.set(row, col, ONE);
    }
    let ancilla = DensityMatrix::basis_state(0, 2)?;
    let joint = ancilla.matrix().kron(state.matrix());
    let coupled = &(&cnot * &joint) * &cnot.adjoint();
    let p_plus = coupled.get(0, 0).re + coupled.get(1, 1).re;
    let eve = if seed.rng().random::<f64>() < p_plus { 1 } else { -1 };
    let bob = trace_first(&coupled);
    Ok((DensityMatrix::new(bob)?, eve))
}

fn draw_message_state<R: Rng + ?Sized>(rng: &mut R) -> Result<[f64; 3]> {
    for _ in 0..MAX_RESAMPLES {
        let r = bloch_vector(&random_pure_state_with(2, rng)?)?;
        if r.iter().all(|c| c.abs() >= BLOCH_FLOOR) {
            return Ok(r);
        }
    }
    Err(Error::DegenerateState(format!(
        "no message state with all |<s_i>| >= {BLOCH_FLOOR} in {MAX_RESAMPLES} draws"
    )))
}

/// Runs the protocol round by round. Eve, when present, acts on the flying
/// qubit before it enters the channel.
pub fn run_qkd(cfg: &QkdConfig) -> Result<QkdTranscript> {
    cfg.validate()?;
    let k = cfg.message_states;
    let mut state_rng = cfg.seed.derive(10, 0).rng();
    let alice: Vec<[f64; 3]> = (0..k).map(|_| draw_message_state(&mut state_rng)).collect::<Result<_>>()?;
    let mut alice_key = String::with_capacity(2 * k);
    for r in &alice {
        alice_key.push_str(&symbol_string(decode_key_symbol(r[0] / r[2], r[1] / r[2])?));
    }
    let decoys: Vec<(usize, f64)> = cfg
        .decoy_axes
        .iter()
        .flat_map(|a| {
            let (i, s) = pauli_axis(*a).expect("validated");
            [(i, s), (i, -s)]
        })
        .collect();

    let mut order: Vec<u32> = (0..k as u32).flat_map(|s| std::iter::repeat_n(s, cfg.copies)).collect();
    order.shuffle(&mut cfg.seed.derive(10, 1).rng());

    let mut rng = cfg.seed.derive(10, 2).rng();
    let shrink = 1.0 - cfg.channel_p;
    let mut sums = vec![[0.0f64; 3]; k];
    let mut counts = vec![[0u64; 3]; k];
    let mut checks = [0u64; 2];
    let mut wrong = [0u64; 2];
    let mut records = cfg.record_rounds.then(Vec::new);
    let mut sifting = cfg.record_rounds.then(|| SiftingReveal {
        decoy_rounds: Vec::new(),
        state_rounds: vec![Vec::new(); k],
    });
    let mut round: u64 = 0;
    let mut next = 0usize;
    let mut decoy_rounds = 0u64;
    while next < order.len() {
        let decoy = rng.random::<f64>() < cfg.decoy_fraction;
        let (id, input) = if decoy {
            let d = rng.random_range(0..4);
            (d, axis_vector(decoys[d].0, decoys[d].1))
        } else {
            let s = order[next] as usize;
            next += 1;
            (s, alice[s])
        };
        let sent = match cfg.eve {
            EveModel::None => input,
            EveModel::InterceptResend => intercept_bloch(&input, &mut rng),
            EveModel::EntangleMeasure => entangle_bloch(&input),
        };
        let received = [sent[0] * shrink, sent[1] * shrink, sent[2] * shrink];
        let axis = rng.random_range(0..3);
        let outcome = measure_axis(&received, axis, &mut rng);
        if decoy {
            decoy_rounds += 1;
            let (da, ds) = decoys[id];
            if axis == da {
                checks[id / 2] += 1;
                if outcome != ds {
                    wrong[id / 2] += 1;
                }
            }
        } else {
            sums[id][axis] += outcome;
            counts[id][axis] += 1;
        }
        if let Some(recs) = records.as_mut() {
            recs.push(RoundRecord {
                round,
                decoy,
                state: id,
                observable: Pauli::ALL[axis],
                outcome: outcome as i8,
            });
        }
        if let Some(s) = sifting.as_mut() {
            if decoy {
                s.decoy_rounds.push(round);
            } else {
                s.state_rounds[id].push(round);
            }
        }
        round += 1;
    }

    let decoy_checks: Vec<DecoyCheck> = (0..2)
        .map(|j| DecoyCheck {
            axis: cfg.decoy_axes[j],
            checks: checks[j],
            disagreements: wrong[j],
            rate: if checks[j] > 0 { wrong[j] as f64 / checks[j] as f64 } else { 0.0 },
        })
        .collect();
    let disagreement_rate = decoy_checks.iter().map(|c| c.rate).fold(0.0, f64::max);
    let total_checks = checks[0] + checks[1];
    let pooled = if total_checks > 0 {
        (wrong[0] + wrong[1]) as f64 / total_checks as f64
    } else {
        0.0
    };
    let aborted = disagreement_rate > cfg.detection_threshold;

    let mut estimates = Vec::new();
    let mut key_bits = None;
    if !aborted {
        let mut key = String::with_capacity(2 * k);
        for s in 0..k {
            let mut e = [0.0; 3];
            for a in 0..3 {
                if counts[s][a] == 0 {
                    return Err(Error::DegenerateState(format!("state {s} never measured along axis {a}")));
                }
                e[a] = sums[s][a] / counts[s][a] as f64;
            }
            let (i1, i2) = (e[0] / e[2], e[1] / e[2]);
            let bits = symbol_string(decode_key_symbol(i1, i2)?);
            key.push_str(&bits);
            let r = alice[s];
            estimates.push(StateEstimate {
                state: s,
                prepared: r,
                counts: counts[s],
                expectations: e,
                i1,
                i2,
                exact_i1: r[0] / r[2],
                exact_i2: r[1] / r[2],
                bits,
            });
        }
        key_bits = Some(key);
    }

    Ok(QkdTranscript {
        config: cfg.clone(),
        total_rounds: round,
        decoy_rounds,
        decoy_checks,
        disagreement_rate,
        pooled_disagreement_rate: pooled,
        aborted,
        estimates,
        key_bits,
        alice_key,
        records,
        sifting,
    })
}

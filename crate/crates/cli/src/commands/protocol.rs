use clap::{Subcommand, ValueEnum};
use invlab_core::protocols::{
    run_qecc_demo, run_qkd, run_remote_transfer, AliceOutcome, EveModel, QeccDemoConfig, QkdConfig,
    RemoteTransferConfig,
};
use invlab_core::{RngSeed, C64};
use serde_json::{json, Value};

use super::attach_config;
use crate::report::{num, Status, Table};
use crate::{CliError, GlobalArgs, Output};

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum EveArg {
    None,
    Intercept,
    Entangle,
}

impl From<EveArg> for EveModel {
    fn from(e: EveArg) -> Self {
        match e {
            EveArg::None => EveModel::None,
            EveArg::Intercept => EveModel::InterceptResend,
            EveArg::Entangle => EveModel::EntangleMeasure,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum BranchArg {
    Plus,
    Minus,
}

#[derive(Subcommand, Debug)]
pub enum ProtocolCmd {
    /// Invariant-encoded key distribution with decoys.
    Qkd {
        /// Number of message states k.
        #[arg(long, default_value_t = 4)]
        states: usize,
        /// Copies M of each message state.
        #[arg(long, default_value_t = 300_000)]
        copies: usize,
        /// Depolarizing strength.
        #[arg(long)]
        p: f64,
        #[arg(long, value_enum, default_value = "none")]
        eve: EveArg,
        #[arg(long, default_value_t = 0.1)]
        decoy_fraction: f64,
        /// Abort threshold; defaults to max(0.1, p/2 + 0.05).
        #[arg(long)]
        threshold: Option<f64>,
        /// Keep per-round records and the sifting reveal.
        #[arg(long)]
        rounds: bool,
    },
    /// Remote transfer of a measurement direction through a singlet.
    Remote {
        /// Direction m as x,y,z.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, required = true)]
        m: Vec<f64>,
        /// Per-Pauli weight p of the channel p0 + 3p = 1.
        #[arg(long)]
        p: f64,
        #[arg(long, default_value_t = 1_000_000)]
        shots: u64,
        #[arg(long, value_enum, default_value = "plus")]
        branch: BranchArg,
    },
    /// Six-level code with X and X^2 errors.
    Qecc {
        #[arg(long, allow_hyphen_values = true)]
        alpha_re: f64,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        alpha_im: f64,
        /// Defaults to sqrt(1 - |alpha|^2).
        #[arg(long, allow_hyphen_values = true)]
        beta_re: Option<f64>,
        #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
        beta_im: f64,
        #[arg(long)]
        p0: f64,
        #[arg(long)]
        p1: f64,
        #[arg(long)]
        p2: f64,
        #[arg(long, default_value_t = 10_000)]
        trials: usize,
    },
}

impl ProtocolCmd {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Qkd { .. } => "qkd",
            Self::Remote { .. } => "remote",
            Self::Qecc { .. } => "qecc",
        }
    }

    pub(crate) fn run(&self, g: &GlobalArgs) -> Result<Output, CliError> {
        let seed = RngSeed::new(g.seed);
        match self {
            Self::Qkd {
                states,
                copies,
                p,
                eve,
                decoy_fraction,
                threshold,
                rounds,
            } => {
                let mut cfg = QkdConfig::new(*states, *copies, *p, (*eve).into(), seed);
                cfg.decoy_fraction = *decoy_fraction;
                if let Some(t) = threshold {
                    cfg.detection_threshold = *t;
                }
                cfg.record_rounds = *rounds && !g.summary_only;
                let config = serde_json::to_value(&cfg).expect("config serializes");
                attach_config(qkd(cfg, *rounds), &config)
            }
            Self::Remote { m, p, shots, branch } => {
                let direction: [f64; 3] = m
                    .as_slice()
                    .try_into()
                    .map_err(|_| CliError::usage("--m needs three components"))?;
                let mut cfg = RemoteTransferConfig::new(direction, *p, *shots, seed);
                cfg.branch = match branch {
                    BranchArg::Plus => AliceOutcome::Plus,
                    BranchArg::Minus => AliceOutcome::Minus,
                };
                let config = serde_json::to_value(&cfg).expect("config serializes");
                attach_config(remote(cfg), &config)
            }
            Self::Qecc {
                alpha_re,
                alpha_im,
                beta_re,
                beta_im,
                p0,
                p1,
                p2,
                trials,
            } => {
                let alpha = C64::new(*alpha_re, *alpha_im);
                let beta_re = beta_re.unwrap_or_else(|| (1.0 - alpha.norm_sqr() - beta_im * beta_im).max(0.0).sqrt());
                let cfg = QeccDemoConfig {
                    alpha,
                    beta: C64::new(beta_re, *beta_im),
                    error_probs: [*p0, *p1, *p2],
                    trials: *trials,
                    seed,
                };
                let config = serde_json::to_value(&cfg).expect("config serializes");
                attach_config(qecc(cfg), &config)
            }
        }
    }
}

fn qkd(cfg: QkdConfig, rounds: bool) -> Result<Output, CliError> {
    let t = run_qkd(&cfg)?;
    let mut notes = Vec::new();
    for c in &t.decoy_checks {
        notes.push(format!(
            "decoy axis {:?}: {} disagreements in {} checks (rate {:.4})",
            c.axis, c.disagreements, c.checks, c.rate
        ));
    }
    notes.push(format!(
        "disagreement {:.4} vs threshold {:.4}: {}",
        t.disagreement_rate,
        cfg.detection_threshold,
        if t.aborted { "abort" } else { "accept" }
    ));
    match &t.key_bits {
        Some(k) => notes.push(format!("key {k} (Alice {}, match {})", t.alice_key, t.key_matches())),
        None => notes.push("no key".into()),
    }
    let table = match (&t.records, rounds) {
        (Some(recs), true) => {
            let mut tb = Table::new(&["round", "decoy", "state", "observable", "outcome"]);
            for r in recs {
                tb.push(vec![
                    r.round.to_string(),
                    r.decoy.to_string(),
                    r.state.to_string(),
                    format!("{:?}", r.observable).to_lowercase(),
                    r.outcome.to_string(),
                ]);
            }
            tb
        }
        _ => {
            let mut tb = Table::new(&["state", "sx", "sy", "sz", "i1", "i2", "exact_i1", "exact_i2", "bits"]);
            for e in &t.estimates {
                tb.push(vec![
                    e.state.to_string(),
                    format!("{:.5}", e.expectations[0]),
                    format!("{:.5}", e.expectations[1]),
                    format!("{:.5}", e.expectations[2]),
                    format!("{:.5}", e.i1),
                    format!("{:.5}", e.i2),
                    format!("{:.5}", e.exact_i1),
                    format!("{:.5}", e.exact_i2),
                    e.bits.clone(),
                ]);
            }
            tb
        }
    };
    let mut payload = serde_json::to_value(&t).expect("transcript serializes");
    if let Value::Object(m) = &mut payload {
        // config is echoed at the top level of the report
        m.remove("config");
        m.insert("key_matches".into(), json!(t.key_matches()));
    }
    Ok(Output {
        config: Value::Null,
        payload,
        table,
        notes,
        status: if t.aborted { Status::Failed } else { Status::Ok },
    })
}

fn remote(cfg: RemoteTransferConfig) -> Result<Output, CliError> {
    let r = run_remote_transfer(&cfg)?;
    let mut table = Table::new(&["ratio", "estimate", "std_error", "true", "abs_error"]);
    table.push(vec![
        "I1 = <sy>/<sx>".into(),
        num(r.i1),
        num(r.i1_error),
        num(r.true_i1),
        num(r.abs_error_i1),
    ]);
    table.push(vec![
        "I2 = <sy>/<sz>".into(),
        num(r.i2),
        num(r.i2_error),
        num(r.true_i2),
        num(r.abs_error_i2),
    ]);
    Ok(Output {
        config: Value::Null,
        payload: serde_json::to_value(&r).expect("result serializes"),
        table,
        notes: vec![format!("alpha = {}", num(r.alpha))],
        status: Status::Ok,
    })
}

fn qecc(cfg: QeccDemoConfig) -> Result<Output, CliError> {
    let r = run_qecc_demo(&cfg)?;
    let mut table = Table::new(&["syndrome", "count", "frequency", "p", "mixture_probability"]);
    for i in 0..3 {
        table.push(vec![
            format!("c{i}"),
            r.syndrome_counts[i].to_string(),
            num(r.syndrome_frequencies[i]),
            num(cfg.error_probs[i]),
            num(r.mixture_syndrome_probabilities[i]),
        ]);
    }
    let ok = r.max_fidelity_deviation <= 1e-12;
    Ok(Output {
        config: Value::Null,
        payload: serde_json::to_value(&r).expect("report serializes"),
        table,
        notes: vec![format!(
            "min fidelity {} (max deviation {:e}); mixture fidelity {}",
            num(r.min_fidelity),
            r.max_fidelity_deviation,
            num(r.mixture_fidelity)
        )],
        status: if ok { Status::Ok } else { Status::Failed },
    })
}

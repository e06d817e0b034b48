use clap::Subcommand;
use invlab_core::channels::ChannelFamily;
use invlab_core::invariants::{
    adjudicate_tabulated, count_independent, curated_invariants, discover, hint_operators,
    match_curated, tabulated_invariants, CatalogEntry, CertifyOptions, DiscoveryOptions, InvariantKind, InvariantSpec,
};
use invlab_core::operators::random_mixed_state;
use invlab_core::{Error, RngSeed};
use serde_json::{json, Value};

use super::{attach_config, channel_from, drop_operators, family};
use crate::report::{num, sci, Status, Table};
use crate::{CliError, GlobalArgs, Output};

/// Denominators below this skip the state, as in certification.
const SKIP_FLOOR: f64 = 1e-6;

#[derive(Subcommand, Debug)]
pub enum InvariantsCmd {
    /// Closed-form invariants and counts.
    Curated {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        dim: Option<usize>,
    },
    /// Eigen-decomposition and the three invariant families.
    Discover {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        dim: Option<usize>,
        /// Channel parameters as name=v1,v2,... (repeatable); drawn from the seed when absent.
        #[arg(long)]
        params: Vec<String>,
        #[arg(long, default_value_t = 3)]
        max_exp: i32,
        #[arg(long, default_value_t = 3)]
        max_support: usize,
        /// Cap on exponent vectors examined.
        #[arg(long, default_value_t = 10_000_000)]
        budget: u64,
        /// Do not align eigenspace bases with the curated operators.
        #[arg(long)]
        no_hints: bool,
    },
    /// Certification over fresh parameter draws, including tabulated entries.
    Certify {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long, default_value_t = 5)]
        draws: usize,
        #[arg(long, default_value_t = 20)]
        states: usize,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Before/after drift of the curated invariants under one channel.
    Verify {
        #[arg(long)]
        channel: String,
        #[arg(long)]
        dim: Option<usize>,
        #[arg(long)]
        params: Vec<String>,
        /// Number of random states.
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

impl InvariantsCmd {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Curated { .. } => "curated",
            Self::Discover { .. } => "discover",
            Self::Certify { .. } => "certify",
            Self::Verify { .. } => "verify",
        }
    }

    pub(crate) fn run(&self, g: &GlobalArgs) -> Result<Output, CliError> {
        match self {
            Self::Curated { channel, dim } => {
                let config = json!({ "channel": channel, "dim": dim });
                attach_config(curated(channel, *dim, g).map(|o| with_config(o, &config)), &config)
            }
            Self::Discover {
                channel,
                dim,
                params,
                max_exp,
                max_support,
                budget,
                no_hints,
            } => {
                let config = json!({
                    "channel": channel, "dim": dim, "params": params, "max_exp": max_exp,
                    "max_support": max_support, "budget": budget, "hints": !no_hints,
                });
                let opts = DiscoveryOptions {
                    max_exponent: *max_exp,
                    max_support: *max_support,
                    budget: *budget,
                    ..DiscoveryOptions::default()
                };
                let r = discover_cmd(channel, *dim, params, opts, !no_hints, g);
                attach_config(r.map(|o| with_config(o, &config)), &config)
            }
            Self::Certify {
                channel,
                dim,
                draws,
                states,
                tol,
            } => {
                let config = json!({ "channel": channel, "dim": dim, "draws": draws, "states": states, "tol": tol });
                let r = certify_cmd(channel, *dim, *draws, *states, *tol, g);
                attach_config(r.map(|o| with_config(o, &config)), &config)
            }
            Self::Verify {
                channel,
                dim,
                params,
                trials,
                tol,
            } => {
                let config = json!({ "channel": channel, "dim": dim, "params": params, "trials": trials, "tol": tol });
                let r = verify_cmd(channel, *dim, params, *trials, *tol, g);
                attach_config(r.map(|o| with_config(o, &config)), &config)
            }
        }
    }
}

fn with_config(mut o: Output, config: &Value) -> Output {
    o.config = config.clone();
    o
}

fn kind_name(k: InvariantKind) -> &'static str {
    match k {
        InvariantKind::Family1 => "family1",
        InvariantKind::Family2Ratio => "family2",
        InvariantKind::Family3Product => "family3",
    }
}

fn exps(inv: &InvariantSpec) -> String {
    inv.exponents.iter().map(|e| e.to_string()).collect::<Vec<_>>().join(" ")
}

fn finish(mut payload: Value, g: &GlobalArgs) -> Value {
    if g.summary_only {
        drop_operators(&mut payload);
    }
    payload
}

fn curated(channel: &str, dim: Option<usize>, g: &GlobalArgs) -> Result<Output, CliError> {
    let fam = family(channel, dim)?;
    let invs = curated_invariants(fam.kind, fam.dim)?;
    let table_list = tabulated_invariants(fam.kind, fam.dim)?;
    let count = count_independent(fam.kind, fam.dim)?;
    let mut table = Table::new(&["label", "family", "exponents", "real_params"]);
    for inv in &invs {
        table.push(vec![inv.label.clone(), kind_name(inv.kind).into(), exps(inv), inv.real_count().to_string()]);
    }
    let differs: Vec<&str> = table_list
        .iter()
        .filter(|t| !invs.iter().any(|c| c.label == t.label))
        .map(|t| t.label.as_str())
        .collect();
    let mut notes = vec![format!(
        "count {} (first family {}, other families {}), information loss {}",
        count.count, count.first_family, count.other_families, count.information_loss
    )];
    for inv in invs.iter().filter(|i| i.note.is_some()) {
        notes.push(format!("{}: {}", inv.label, inv.note.as_deref().unwrap_or_default()));
    }
    let entries: Vec<CatalogEntry> = invs.iter().map(|i| CatalogEntry::new(i, None)).collect();
    let payload = json!({
        "channel": fam.name,
        "dim": fam.dim,
        "invariants": entries,
        "notes": invs.iter().map(|i| json!({"label": i.label, "note": i.note})).filter(|v| !v["note"].is_null()).collect::<Vec<_>>(),
        "tabulated_only": differs,
        "count": count,
    });
    Ok(Output {
        config: Value::Null,
        payload: finish(payload, g),
        table,
        notes,
        status: Status::Ok,
    })
}

fn lambda_text(inv: &InvariantSpec) -> String {
    inv.lambdas
        .iter()
        .map(|l| format!("{:.6}{:+.6}i", l.re, l.im))
        .collect::<Vec<_>>()
        .join(" ")
}

fn discover_cmd(
    channel: &str,
    dim: Option<usize>,
    params: &[String],
    mut opts: DiscoveryOptions,
    hints: bool,
    g: &GlobalArgs,
) -> Result<Output, CliError> {
    let fam = family(channel, dim)?;
    let ch = channel_from(&fam, params, g.seed)?;
    let curated = curated_invariants(fam.kind, fam.dim)?;
    if hints {
        opts.hints = hint_operators(&curated);
    }
    let d = discover(&ch, &opts)?;
    let probe: Vec<_> = (0..20)
        .map(|t| random_mixed_state(fam.dim, RngSeed::new(g.seed).derive(3, t)))
        .collect::<Result<_, Error>>()?;
    let matches: Vec<_> = curated.iter().map(|inv| match_curated(&d, inv, &probe)).collect();

    let mut table = Table::new(&["family", "label", "exponents", "lambda"]);
    for inv in d.all() {
        table.push(vec![kind_name(inv.kind).into(), inv.label.clone(), exps(inv), lambda_text(inv)]);
    }
    let nontrivial = d.all().count();
    let groups: Vec<Value> = d
        .groups
        .iter()
        .map(|gr| json!({ "id": gr.id, "lambda": [gr.lambda.re, gr.lambda.im], "dim": gr.orthonormal.len() }))
        .collect();
    let entries = |v: &[InvariantSpec]| v.iter().map(|i| CatalogEntry::new(i, None)).collect::<Vec<_>>();
    let matched = matches.iter().filter(|m| m.matched).count();
    let mut notes = vec![format!(
        "{nontrivial} nontrivial invariants ({} / {} / {}); eigenspace dims {:?}",
        d.family1.len(),
        d.family2.len(),
        d.family3.invariants.len(),
        d.group_dims()
    )];
    if !curated.is_empty() {
        notes.push(format!("curated matched: {matched}/{}", curated.len()));
    }
    if d.family3.truncated {
        notes.push(format!("exponent search truncated after {} candidates", d.family3.candidates));
    }
    let payload = json!({
        "channel": fam.name,
        "dim": fam.dim,
        "params": ch.params,
        "groups": groups,
        "defective": d.eigen.defective,
        "max_residual": d.eigen.max_residual,
        "family1": entries(&d.family1),
        "family2": entries(&d.family2),
        "family3": entries(&d.family3.invariants),
        "family3_vectors": d.family3.vectors,
        "family3_candidates": d.family3.candidates,
        "truncated": d.family3.truncated,
        "nontrivial": nontrivial,
        "curated_matches": matches,
    });
    Ok(Output {
        config: Value::Null,
        payload: finish(payload, g),
        table,
        notes,
        status: Status::Ok,
    })
}

fn certify_cmd(
    channel: &str,
    dim: Option<usize>,
    draws: usize,
    states: usize,
    tol: f64,
    g: &GlobalArgs,
) -> Result<Output, CliError> {
    if draws == 0 || states == 0 {
        return Err(CliError::usage("--draws and --states must be positive"));
    }
    let fam = family(channel, dim)?;
    let opts = CertifyOptions {
        draws,
        states,
        tol,
        seed: RngSeed::new(g.seed),
        ..CertifyOptions::default()
    };
    let rows = adjudicate_tabulated(fam.kind, fam.dim, &opts)?;
    let mut table = Table::new(&["label", "tabulated", "curated", "certified", "max_drift", "note"]);
    for r in &rows {
        table.push(vec![
            r.label.clone(),
            r.tabulated.to_string(),
            r.curated.to_string(),
            r.certified.to_string(),
            sci(r.max_relative_drift),
            r.note.clone().unwrap_or_default(),
        ]);
    }
    let failed = rows.iter().any(|r| r.curated && !r.certified);
    let flagged: Vec<&str> = rows
        .iter()
        .filter(|r| r.tabulated && !r.certified)
        .map(|r| r.label.as_str())
        .collect();
    let mut notes = Vec::new();
    if !flagged.is_empty() {
        notes.push(format!("tabulated entries failing certification: {}", flagged.join(", ")));
    }
    Ok(Output {
        config: Value::Null,
        payload: json!({
            "channel": fam.name,
            "dim": fam.dim,
            "draws": draws,
            "states": states,
            "tol": tol,
            "rows": rows,
            "flagged_tabulated": flagged,
            "all_curated_certified": !failed,
        }),
        table,
        notes,
        status: if failed { Status::Failed } else { Status::Ok },
    })
}

fn verify_cmd(
    channel: &str,
    dim: Option<usize>,
    params: &[String],
    trials: usize,
    tol: f64,
    g: &GlobalArgs,
) -> Result<Output, CliError> {
    if trials == 0 {
        return Err(CliError::usage("--trials must be positive"));
    }
    let fam: ChannelFamily = family(channel, dim)?;
    let ch = channel_from(&fam, params, g.seed)?;
    let invs = curated_invariants(fam.kind, fam.dim)?;
    let seed = RngSeed::new(g.seed);
    let states: Vec<_> = (0..trials)
        .map(|t| random_mixed_state(fam.dim, seed.derive(2, t as u64)))
        .collect::<Result<_, Error>>()?;
    let after: Vec<_> = states.iter().map(|s| ch.apply(s)).collect::<Result<_, Error>>()?;
    let mut table = Table::new(&["label", "max_drift", "evaluated", "skipped", "passed"]);
    let mut rows = Vec::new();
    let mut all_ok = true;
    for inv in &invs {
        let mut max_drift: f64 = 0.0;
        let mut skipped = 0usize;
        for (b, a) in states.iter().zip(&after) {
            let (fb, fa) = (inv.factors(b)?, inv.factors(a)?);
            if inv.denominators().any(|i| fb[i].norm() < SKIP_FLOOR || fa[i].norm() < SKIP_FLOOR) {
                skipped += 1;
                continue;
            }
            let (vb, va) = (inv.combine(&fb)?, inv.combine(&fa)?);
            max_drift = max_drift.max((va - vb).norm() / vb.norm().max(SKIP_FLOOR));
        }
        let evaluated = trials - skipped;
        let passed = evaluated > 0 && max_drift <= tol;
        all_ok &= passed;
        let drift = if evaluated == 0 { f64::NAN } else { max_drift };
        table.push(vec![
            inv.label.clone(),
            sci(drift),
            evaluated.to_string(),
            skipped.to_string(),
            passed.to_string(),
        ]);
        rows.push(json!({
            "label": inv.label,
            "max_relative_drift": drift,
            "evaluated": evaluated,
            "skipped": skipped,
            "passed": passed,
        }));
    }
    Ok(Output {
        config: Value::Null,
        payload: json!({
            "channel": fam.name,
            "dim": fam.dim,
            "params": ch.params,
            "trials": trials,
            "tol": tol,
            "rows": rows,
            "all_passed": all_ok,
        }),
        table,
        notes: vec![format!("tol {}; all passed: {all_ok}", num(tol))],
        status: if all_ok { Status::Ok } else { Status::Failed },
    })
}

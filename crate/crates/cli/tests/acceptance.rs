//! End-to-end acceptance criteria. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any fails.
//!
//! Reference values are recomputed here from raw Kraus operators and plain
//! matrix arithmetic rather than through the library's own evaluators.

use std::process::Command;
use std::time::Instant;

use invlab_core::channels::{ChannelFamily, ChannelKind, KrausChannel};
use invlab_core::invariants::{
    adjoint_superoperator, adjudicate_tabulated, count_independent, curated_invariants, discover, eigen_operators,
    hint_operators, match_curated, CertifyOptions, DiscoveryOptions, InvariantKind, InvariantSpec, GROUP_TOL,
};
use invlab_core::operators::{random_mixed_state_with, random_operator, ComplexMatrix, DensityMatrix};
use invlab_core::protocols::{
    qecc_apply_noise, qecc_encode, qecc_recover, qecc_syndrome, run_qecc_demo, run_qkd, run_remote_transfer,
    EveModel, QeccDemoConfig, QkdConfig, RemoteTransferConfig,
};
use invlab_core::{RngSeed, C64};
use rand::Rng;
use serde_json::Value;

const DRIFT_TOL: f64 = 1e-9;
const SKIP_FLOOR: f64 = 1e-6;
const SKIP_LIMIT: f64 = 0.05;
const MATCH_TOL: f64 = 1e-8;
const EIGEN_RESIDUAL_TOL: f64 = 1e-8;
const DUALITY_TOL: f64 = 1e-10;
const QKD_RATE_TOL: f64 = 0.05;
const REMOTE_TOL: f64 = 0.05;
const FIDELITY_TOL: f64 = 1e-12;
const FREQUENCY_TOL: f64 = 0.02;

const QUNIT_ROWS: [ChannelKind; 6] = [
    ChannelKind::GeneralizedFlip,
    ChannelKind::GeneralizedPhase,
    ChannelKind::GeneralizedFlipPhase,
    ChannelKind::Dephasing,
    ChannelKind::Depolarizing,
    ChannelKind::AmplitudeDamping,
];

const QUBIT_ROWS: [ChannelKind; 6] = [
    ChannelKind::BitFlip,
    ChannelKind::PhaseFlip,
    ChannelKind::BitPhaseFlip,
    ChannelKind::DepolarizingQubit,
    ChannelKind::AdcQubit,
    ChannelKind::GadcQubit,
];

// Dense arithmetic on row-major entries, independent of the library's matrix type.

fn entries(m: &ComplexMatrix) -> Vec<C64> {
    m.row_major()
}

fn mul(a: &[C64], b: &[C64], n: usize) -> Vec<C64> {
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for k in 0..n {
            let aik = a[i * n + k];
            for j in 0..n {
                out[i * n + j] += aik * b[k * n + j];
            }
        }
    }
    out
}

fn dagger(a: &[C64], n: usize) -> Vec<C64> {
    (0..n * n).map(|idx| a[(idx % n) * n + idx / n].conj()).collect()
}

fn trace_of_product(a: &[C64], b: &[C64], n: usize) -> C64 {
    let mut t = C64::new(0.0, 0.0);
    for i in 0..n {
        for k in 0..n {
            t += a[i * n + k] * b[k * n + i];
        }
    }
    t
}

/// `Σ E ρ E†` from the raw Kraus list.
fn schrodinger(ch: &KrausChannel, rho: &[C64]) -> Vec<C64> {
    let n = ch.dim;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for e in &ch.kraus {
        let e = entries(e);
        let term = mul(&mul(&e, rho, n), &dagger(&e, n), n);
        out.iter_mut().zip(term).for_each(|(o, t)| *o += t);
    }
    out
}

/// `Σ E† O E` from the raw Kraus list.
fn heisenberg(ch: &KrausChannel, op: &[C64]) -> Vec<C64> {
    let n = ch.dim;
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for e in &ch.kraus {
        let e = entries(e);
        let term = mul(&mul(&dagger(&e, n), op, n), &e, n);
        out.iter_mut().zip(term).for_each(|(o, t)| *o += t);
    }
    out
}

fn hs_norm(a: &[C64]) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// `<O>` for every operator of `inv`.
fn factors(inv: &InvariantSpec, rho: &[C64], n: usize) -> Vec<C64> {
    inv.operators.iter().map(|o| trace_of_product(rho, &entries(o), n)).collect()
}

fn product(inv: &InvariantSpec, f: &[C64]) -> C64 {
    f.iter().zip(&inv.exponents).fold(C64::new(1.0, 0.0), |acc, (v, r)| acc * v.powi(*r))
}

fn has_small_denominator(inv: &InvariantSpec, f: &[C64]) -> bool {
    f.iter().zip(&inv.exponents).any(|(v, r)| *r < 0 && v.norm() < SKIP_FLOOR)
}

#[derive(Default)]
struct DriftStats {
    max_drift: f64,
    evaluated: usize,
    skipped: usize,
    worst: String,
}

impl DriftStats {
    fn skipped_fraction(&self) -> f64 {
        self.skipped as f64 / (self.evaluated + self.skipped).max(1) as f64
    }
}

/// Drift of every listed invariant over `draws` channel draws and `states`
/// random full-rank states per draw.
fn drift(kind: ChannelKind, n: usize, invs: &[InvariantSpec], draws: u64, states: u64, seed: u64, stats: &mut DriftStats) {
    let fam = ChannelFamily::new(kind, n).unwrap();
    let base = RngSeed::new(seed);
    for k in 0..draws {
        let ch = fam.sample(&mut base.derive(1, k).rng()).unwrap();
        let mut rng = base.derive(2, k).rng();
        for _ in 0..states {
            let rho = entries(random_mixed_state_with(n, &mut rng).unwrap().matrix());
            let out = schrodinger(&ch, &rho);
            for inv in invs {
                let (fb, fa) = (factors(inv, &rho, n), factors(inv, &out, n));
                if has_small_denominator(inv, &fb) || has_small_denominator(inv, &fa) {
                    stats.skipped += 1;
                    continue;
                }
                let (vb, va) = (product(inv, &fb), product(inv, &fa));
                let d = (va - vb).norm() / vb.norm().max(SKIP_FLOOR);
                stats.evaluated += 1;
                if d > stats.max_drift {
                    stats.max_drift = d;
                    stats.worst = format!("{kind} N={n} {}", inv.label);
                }
            }
        }
    }
}

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let mut stats = DriftStats::default();
    let mut worst_skip: f64 = 0.0;
    for kind in QUNIT_ROWS {
        for n in 2..=5 {
            let mut local = DriftStats::default();
            drift(kind, n, &curated_invariants(kind, n).unwrap(), 5, 50, 1000 + n as u64, &mut local);
            worst_skip = worst_skip.max(local.skipped_fraction());
            if local.max_drift > stats.max_drift {
                stats.max_drift = local.max_drift;
                stats.worst = local.worst;
            }
            stats.evaluated += local.evaluated;
            stats.skipped += local.skipped;
        }
    }
    let secs = start.elapsed().as_secs_f64();
    outcome(
        stats.max_drift <= DRIFT_TOL && worst_skip < SKIP_LIMIT && secs < 30.0,
        format!(
            "max drift {:.2e} ({}), {} evaluations, {} skipped (worst cell {:.2}%), {secs:.1}s",
            stats.max_drift,
            stats.worst,
            stats.evaluated,
            stats.skipped,
            100.0 * worst_skip
        ),
    )
}

fn criterion_2() -> Outcome {
    let expected = |kind: ChannelKind, n: usize| match kind {
        ChannelKind::GeneralizedFlip | ChannelKind::GeneralizedPhase | ChannelKind::GeneralizedFlipPhase => n * (n - 1),
        ChannelKind::Dephasing => (n - 1) * (n + 2) / 2,
        ChannelKind::Depolarizing => n * n - 2,
        ChannelKind::AmplitudeDamping => n * (n - 1) / 2 + 1,
        _ => unreachable!(),
    };
    let mut bad = Vec::new();
    for kind in QUNIT_ROWS {
        for n in 2..=6 {
            let c = count_independent(kind, n).unwrap();
            if c.count != expected(kind, n) || c.information_loss != n * n - 1 - c.count {
                bad.push(format!("{kind} N={n}: {} (loss {})", c.count, c.information_loss));
            }
        }
    }
    let detail = if bad.is_empty() {
        "30 (channel, N) counts and information losses exact".to_string()
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn criterion_3() -> Outcome {
    let mut stats = DriftStats::default();
    for kind in QUBIT_ROWS {
        drift(kind, 2, &curated_invariants(kind, 2).unwrap(), 5, 50, 3000, &mut stats);
    }
    let opts = CertifyOptions {
        draws: 5,
        states: 50,
        tol: DRIFT_TOL,
        seed: RngSeed::new(3001),
        ..CertifyOptions::default()
    };
    let rows = adjudicate_tabulated(ChannelKind::GadcQubit, 2, &opts).unwrap();
    let certified: Vec<&str> = rows.iter().filter(|r| r.certified).map(|r| r.label.as_str()).collect();
    let flagged: Vec<&str> = rows
        .iter()
        .filter(|r| r.tabulated && !r.certified && r.note.is_some())
        .map(|r| r.label.as_str())
        .collect();
    let sx_sz_flagged_if_failing = rows
        .iter()
        .filter(|r| r.label == "<sx>/<sz>")
        .all(|r| r.certified || flagged.contains(&"<sx>/<sz>"));
    outcome(
        stats.max_drift <= DRIFT_TOL && stats.skipped_fraction() < SKIP_LIMIT && !certified.is_empty() && sx_sz_flagged_if_failing,
        format!(
            "qubit max drift {:.2e}, {} skipped of {}; GADC certifies {:?}, flags {:?}",
            stats.max_drift,
            stats.skipped,
            stats.evaluated + stats.skipped,
            certified,
            flagged
        ),
    )
}

fn is_identity_direction(op: &ComplexMatrix) -> bool {
    let n = op.dim();
    let e = entries(op);
    let c = e[0];
    c.norm() > 0.0 && (0..n * n).all(|i| (e[i] - if i % (n + 1) == 0 { c } else { C64::new(0.0, 0.0) }).norm() < 1e-8 * c.norm())
}

fn criterion_4() -> Outcome {
    let mut bad = Vec::new();
    for n in 2..=4 {
        let fam = ChannelFamily::new(ChannelKind::GeneralizedPauli, n).unwrap();
        for seed in 0..5u64 {
            let ch = fam.sample(&mut RngSeed::new(4000 + seed).derive(1, 0).rng()).unwrap();
            let d = discover(&ch, &DiscoveryOptions::default()).unwrap();
            // the working basis drops the identity; the orthonormal one keeps it
            let unit_ok = d.unit_group().is_some_and(|g| {
                g.basis.is_empty() && g.orthonormal.len() == 1 && is_identity_direction(&g.orthonormal[0])
            });
            let found = d.all().count();
            if !unit_ok || found != 0 {
                bad.push(format!("N={n} seed {seed}: {found} invariants, unit group dim {:?}", d.unit_group().map(|g| g.orthonormal.len())));
            }
        }
    }
    let detail = if bad.is_empty() {
        "15 draws: identity is the only unit direction, no invariants".to_string()
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn criterion_5() -> Outcome {
    let mut bad = Vec::new();
    let mut checked = 0;
    for kind in QUNIT_ROWS {
        for n in 2..=5 {
            let fam = ChannelFamily::new(kind, n).unwrap();
            let ch = fam.sample(&mut RngSeed::new(5000 + n as u64).derive(1, 0).rng()).unwrap();
            let curated = curated_invariants(kind, n).unwrap();
            let opts = DiscoveryOptions {
                hints: hint_operators(&curated),
                ..DiscoveryOptions::default()
            };
            let disc = discover(&ch, &opts).unwrap();
            let mut rng = RngSeed::new(5100 + n as u64).rng();
            let probe: Vec<DensityMatrix> = (0..20).map(|_| random_mixed_state_with(n, &mut rng).unwrap()).collect();
            for inv in &curated {
                let m = match_curated(&disc, inv, &probe);
                checked += 1;
                if !m.matched || m.max_value_error > MATCH_TOL {
                    bad.push(format!("{kind} N={n} {}: {:?}", inv.label, m.reason));
                }
            }
        }
    }
    // qubit ADC product from an unhinted search with exponent and support bounds of 3
    let adc = ChannelFamily::new(ChannelKind::AdcQubit, 2)
        .unwrap()
        .sample(&mut RngSeed::new(5200).derive(1, 0).rng())
        .unwrap();
    let opts = DiscoveryOptions { max_exponent: 3, max_support: 3, ..DiscoveryOptions::default() };
    let disc = discover(&adc, &opts).unwrap();
    let product = curated_invariants(ChannelKind::AdcQubit, 2)
        .unwrap()
        .into_iter()
        .find(|i| i.kind == InvariantKind::Family3Product)
        .expect("curated product");
    let mut rng = RngSeed::new(5201).rng();
    let probe: Vec<DensityMatrix> = (0..20).map(|_| random_mixed_state_with(2, &mut rng).unwrap()).collect();
    let m = match_curated(&disc, &product, &probe);
    let product_ok = m.matched && !disc.family3.invariants.is_empty() && m.max_value_error <= MATCH_TOL;
    if !product_ok {
        bad.push(format!("qubit ADC {}: {:?}", product.label, m.reason));
    }
    let detail = if bad.is_empty() {
        format!(
            "{checked} curated entries matched; qubit ADC {} found as exponents {:?}",
            product.label,
            disc.family3.vectors
        )
    } else {
        bad.join("; ")
    };
    outcome(bad.is_empty(), detail)
}

fn criterion_6() -> Outcome {
    let mut max_residual: f64 = 0.0;
    let mut max_duality: f64 = 0.0;
    let mut worst = String::new();
    let mut operators = 0usize;
    for kind in ChannelKind::ALL {
        let dims: Vec<usize> = kind.fixed_dim().map(|d| vec![d]).unwrap_or_else(|| (2..=5).collect());
        for n in dims {
            let fam = ChannelFamily::new(kind, n).unwrap();
            let base = RngSeed::new(6000 + n as u64);
            for k in 0..20 {
                let ch = fam.sample(&mut base.derive(1, k).rng()).unwrap();
                let sop = adjoint_superoperator(&ch).unwrap();
                let dec = eigen_operators(&sop, GROUP_TOL).unwrap();
                for e in &dec.eigenoperators {
                    let o = entries(&e.op);
                    let image = heisenberg(&ch, &o);
                    let diff: Vec<C64> = image.iter().zip(&o).map(|(a, b)| a - e.lambda * b).collect();
                    let r = hs_norm(&diff);
                    operators += 1;
                    if r > max_residual {
                        max_residual = r;
                        worst = format!("{kind} N={n}");
                    }
                }
            }
            let ch = fam.sample(&mut base.derive(7, 0).rng()).unwrap();
            let sop = adjoint_superoperator(&ch).unwrap();
            let mut rng = base.derive(8, 0).rng();
            for _ in 0..100 {
                let o = random_operator(n, &mut rng);
                let rho = random_mixed_state_with(n, &mut rng).unwrap();
                let rho = entries(rho.matrix());
                let a = trace_of_product(&schrodinger(&ch, &rho), &entries(&o), n);
                let b = trace_of_product(&rho, &entries(&sop.apply(&o).unwrap()), n);
                max_duality = max_duality.max((a - b).norm());
            }
        }
    }
    outcome(
        max_residual <= EIGEN_RESIDUAL_TOL && max_duality <= DUALITY_TOL,
        format!("{operators} eigenoperators, max residual {max_residual:.2e} ({worst}); max duality gap {max_duality:.2e}"),
    )
}

/// Key from the signs of Alice's prepared Bloch components.
fn intended_key(t: &invlab_core::protocols::QkdTranscript) -> String {
    t.estimates
        .iter()
        .map(|e| {
            let [x, y, z] = e.prepared;
            format!("{}{}", u8::from(x / z < 0.0), u8::from(y / z < 0.0))
        })
        .collect()
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let mut notes = Vec::new();
    let mut pass = true;
    for p in [0.0, 0.3, 0.6] {
        let mut correct = 0;
        for s in 0..50u64 {
            let t = run_qkd(&QkdConfig::new(4, 300_000, p, EveModel::None, RngSeed::new(7000 + s))).unwrap();
            let key = t.key_bits.clone().unwrap_or_default();
            if !t.aborted && key.len() == 8 && key == intended_key(&t) {
                correct += 1;
            }
        }
        pass &= correct >= 49;
        notes.push(format!("p={p}: {correct}/50 keys"));
    }
    // per-axis rate 1/3 + p/6, so the 1/3 window only holds for small p
    for p in [0.0, 0.1] {
        let t = run_qkd(&QkdConfig::new(4, 300_000, p, EveModel::InterceptResend, RngSeed::new(7100))).unwrap();
        let ok = t.aborted && t.decoy_checks.iter().all(|c| (c.rate - 1.0 / 3.0).abs() <= QKD_RATE_TOL);
        pass &= ok;
        let rates: Vec<String> = t.decoy_checks.iter().map(|c| format!("{:.3}", c.rate)).collect();
        notes.push(format!("intercept p={p}: rates [{}] abort {}", rates.join(", "), t.aborted));
    }
    for p in [0.0, 0.3, 0.6] {
        let t = run_qkd(&QkdConfig::new(4, 300_000, p, EveModel::EntangleMeasure, RngSeed::new(7200))).unwrap();
        let x = t.decoy_checks.iter().find(|c| c.axis == [1.0, 0.0, 0.0]).expect("x decoy axis");
        let ok = t.aborted && (x.rate - 0.5).abs() <= QKD_RATE_TOL;
        pass &= ok;
        notes.push(format!("entangle p={p}: x rate {:.3} abort {}", x.rate, t.aborted));
    }
    let secs = start.elapsed().as_secs_f64();
    pass &= secs < 120.0;
    notes.push(format!("{secs:.1}s"));
    outcome(pass, notes.join("; "))
}

fn criterion_8() -> Outcome {
    let m = [0.6, 0.48, 0.64];
    let truth = [m[1] / m[0], m[1] / m[2]];
    let mut pass = true;
    let mut notes = Vec::new();
    let mut est = Vec::new();
    for (i, p) in [0.05, 0.1, 0.2].into_iter().enumerate() {
        let r = run_remote_transfer(&RemoteTransferConfig::new(m, p, 1_000_000, RngSeed::new(8000 + i as u64))).unwrap();
        let ok = (r.i1 - truth[0]).abs() <= REMOTE_TOL && (r.i2 - truth[1]).abs() <= REMOTE_TOL;
        pass &= ok;
        notes.push(format!("p={p}: ({:.4} ± {:.4}, {:.4} ± {:.4})", r.i1, r.i1_error, r.i2, r.i2_error));
        est.push([(r.i1, r.i1_error), (r.i2, r.i2_error)]);
    }
    let mut worst: f64 = 0.0;
    for a in 0..est.len() {
        for b in a + 1..est.len() {
            for j in 0..2 {
                let ((va, sa), (vb, sb)) = (est[a][j], est[b][j]);
                // in units of the standard error of the difference
                worst = worst.max((va - vb).abs() / (sa * sa + sb * sb).sqrt());
            }
        }
    }
    pass &= worst <= 2.0;
    notes.push(format!("largest pairwise gap {worst:.2} SE"));
    outcome(pass, notes.join("; "))
}

fn criterion_9() -> Outcome {
    let mut rng = RngSeed::new(9000).rng();
    let mut max_dev: f64 = 0.0;
    for t in 0..1000u64 {
        let (a, b) = (C64::new(rng.random(), rng.random()), C64::new(rng.random(), rng.random()));
        let norm = (a.norm_sqr() + b.norm_sqr()).sqrt();
        let (a, b) = (a / norm, b / norm);
        let mut p: [f64; 3] = [rng.random(), rng.random(), rng.random()];
        let s: f64 = p.iter().sum();
        p.iter_mut().for_each(|x| *x /= s);
        let seed = RngSeed::new(9001).derive(t, 0);
        let encoded = qecc_encode(a, b).unwrap();
        let (noisy, _) = qecc_apply_noise(&encoded, p, seed.derive(0, 0)).unwrap();
        let (syndrome, post) = qecc_syndrome(&noisy, seed.derive(1, 0)).unwrap();
        let out = entries(qecc_recover(&post, syndrome).unwrap().matrix());
        let mut psi = [C64::new(0.0, 0.0); 6];
        psi[0] = a;
        psi[3] = b;
        let mut f = C64::new(0.0, 0.0);
        for i in 0..6 {
            for j in 0..6 {
                f += psi[i].conj() * out[i * 6 + j] * psi[j];
            }
        }
        max_dev = max_dev.max((f - 1.0).norm());
    }
    let mut worst_freq: f64 = 0.0;
    for (i, probs) in [[0.7, 0.2, 0.1], [0.2, 0.5, 0.3], [1.0 / 3.0; 3]].into_iter().enumerate() {
        let rep = run_qecc_demo(&QeccDemoConfig {
            alpha: C64::new(0.6, 0.0),
            beta: C64::new(0.0, 0.8),
            error_probs: probs,
            trials: 10_000,
            seed: RngSeed::new(9100 + i as u64),
        })
        .unwrap();
        for (f, p) in rep.syndrome_frequencies.iter().zip(probs) {
            worst_freq = worst_freq.max((f - p).abs());
        }
    }
    outcome(
        max_dev <= FIDELITY_TOL && worst_freq <= FREQUENCY_TOL,
        format!("max fidelity deviation {max_dev:.2e} over 1000 trials; worst frequency gap {worst_freq:.4}"),
    )
}

fn payload_bytes(args: &[&str]) -> (String, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_invlab"))
        .args(args)
        .args(["--format", "json"])
        .env_remove("INVLAB_SEED")
        .output()
        .expect("binary runs");
    let v: Value = serde_json::from_slice(&out.stdout).expect("JSON report");
    (serde_json::to_string(&v["payload"]).unwrap(), v["payload_sha256"].as_str().unwrap_or_default().to_string())
}

fn criterion_10() -> Outcome {
    let commands: [&[&str]; 8] = [
        &["channels", "list"],
        &["invariants", "curated", "--channel", "amplitude_damping", "--dim", "4"],
        &["invariants", "discover", "--channel", "dephasing", "--dim", "3", "--seed", "3"],
        &["invariants", "certify", "--channel", "gadc_qubit", "--seed", "4"],
        &["invariants", "verify", "--channel", "depolarizing", "--dim", "3", "--trials", "20", "--seed", "5"],
        &["protocol", "qkd", "--states", "4", "--copies", "20000", "--p", "0.3", "--seed", "6", "--rounds"],
        &["protocol", "remote", "--m", "0.6,0.48,0.64", "--p", "0.1", "--shots", "100000", "--seed", "7"],
        &["protocol", "qecc", "--alpha-re", "0.6", "--p0", "0.7", "--p1", "0.2", "--p2", "0.1", "--seed", "8"],
    ];
    let mut bad = Vec::new();
    for args in commands {
        let (a, ha) = payload_bytes(args);
        let (b, hb) = payload_bytes(args);
        if a != b || ha != hb || a == "null" {
            bad.push(args.join(" "));
        }
    }
    let detail = if bad.is_empty() {
        format!("{} commands reproduce their payload byte for byte", commands.len())
    } else {
        format!("differs: {}", bad.join("; "))
    };
    outcome(bad.is_empty(), detail)
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("quNit invariance", criterion_1),
        ("quNit counts", criterion_2),
        ("qubit invariance and GADC adjudication", criterion_3),
        ("generalized Pauli no-go", criterion_4),
        ("discovery contains curated", criterion_5),
        ("eigen engine soundness", criterion_6),
        ("key distribution", criterion_7),
        ("remote transfer", criterion_8),
        ("six-level code", criterion_9),
        ("CLI determinism", criterion_10),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let id = format!("criterion {:>2}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| id.contains(f.as_str()) || name.contains(f.as_str())) {
            continue;
        }
        let o = run();
        failed += usize::from(!o.pass);
        println!("{id} {} {name}: {}", if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
}

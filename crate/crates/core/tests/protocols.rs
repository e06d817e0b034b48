use invlab_core::channels::depolarizing_qubit;
use invlab_core::operators::{sigma_x, sigma_z, ComplexMatrix, DensityMatrix, C64};
use invlab_core::protocols::{
    bloch_vector, decode_key_symbol, eve_entangle_measure, intercept_resend_average, qecc_apply_noise,
    qecc_encode, qecc_recover, qecc_syndrome, run_qecc_demo, run_qkd, run_remote_transfer, EveModel,
    QeccDemoConfig, QkdConfig, RemoteTransferConfig,
};
use invlab_core::RngSeed;
use proptest::prelude::*;

/// Probability that measuring `h` on `rho` yields `-sign`.
fn flip_probability(rho: &DensityMatrix, h: &ComplexMatrix, sign: f64) -> f64 {
    let e = invlab_core::operators::expectation(rho, h).unwrap().re();
    0.5 * (1.0 - sign * e)
}

/// Exact matching-axis decoy disagreement with Eve before the channel.
fn intercept_oracle(p: f64) -> f64 {
    let ch = depolarizing_qubit(p).unwrap();
    let decoy = DensityMatrix::from_bloch([0.0, 0.0, 1.0]).unwrap();
    // Eve's three bases with both outcomes, weighted by their probabilities
    let mut total = 0.0;
    for axis in 0..3 {
        for s in [1.0, -1.0] {
            let mut r = [0.0; 3];
            r[axis] = s;
            let prob = flip_probability(&decoy, &[sigma_x(), invlab_core::operators::sigma_y(), sigma_z()][axis], -s);
            let sent = ch.apply(&DensityMatrix::from_bloch(r).unwrap()).unwrap();
            total += prob / 3.0 * flip_probability(&sent, &sigma_z(), 1.0);
        }
    }
    total
}

fn entangle_oracle(p: f64, axis: [f64; 3]) -> f64 {
    let ch = depolarizing_qubit(p).unwrap();
    let (bob, _) = eve_entangle_measure(&DensityMatrix::from_bloch(axis).unwrap(), RngSeed::new(0)).unwrap();
    let out = ch.apply(&bob).unwrap();
    let h = if axis[0] != 0.0 { sigma_x() } else { sigma_z() };
    flip_probability(&out, &h, 1.0)
}

#[test]
fn intercept_resend_oracle_values() {
    assert!((intercept_oracle(0.0) - 1.0 / 3.0).abs() < 1e-14);
    assert!((intercept_oracle(0.3) - (1.0 / 3.0 + 0.3 / 6.0)).abs() < 1e-14);
    let rho = DensityMatrix::from_bloch([0.2, -0.5, 0.7]).unwrap();
    let r = bloch_vector(&intercept_resend_average(&rho).unwrap()).unwrap();
    assert!((r[1] + 0.5 / 3.0).abs() < 1e-15);
}

#[test]
fn intercept_resend_decoy_rate_tracks_oracle() {
    for (p, seed) in [(0.0, 1), (0.3, 2)] {
        let t = run_qkd(&QkdConfig::new(4, 50_000, p, EveModel::InterceptResend, RngSeed::new(seed))).unwrap();
        let want = intercept_oracle(p);
        for c in &t.decoy_checks {
            assert!(c.checks >= 3000);
            assert!((c.rate - want).abs() < 0.02, "p={p} axis {:?}: {} vs {want}", c.axis, c.rate);
        }
        assert!(t.aborted);
    }
}

#[test]
fn entangle_measure_hits_x_decoys() {
    let p = 0.2;
    let t = run_qkd(&QkdConfig::new(4, 50_000, p, EveModel::EntangleMeasure, RngSeed::new(3))).unwrap();
    let z = &t.decoy_checks[0];
    let x = &t.decoy_checks[1];
    assert!((x.rate - entangle_oracle(p, [1.0, 0.0, 0.0])).abs() < 0.02);
    assert!((x.rate - 0.5).abs() < 0.02);
    assert!((z.rate - entangle_oracle(p, [0.0, 0.0, 1.0])).abs() < 0.02);
    assert!(t.aborted);
}

#[test]
fn channel_noise_alone_stays_below_threshold() {
    for p in [0.0, 0.3, 0.6] {
        let t = run_qkd(&QkdConfig::new(4, 100_000, p, EveModel::None, RngSeed::new(4))).unwrap();
        assert!(!t.aborted, "p={p} rate {}", t.disagreement_rate);
        assert!((t.disagreement_rate - p / 2.0).abs() < 0.02);
        if p == 0.0 {
            assert!(t.disagreement_rate <= 0.01);
        }
    }
}

#[test]
fn estimated_invariants_approach_the_exact_ones() {
    let mut pairs = 0;
    let mut good = 0;
    for seed in 0..8 {
        let t = run_qkd(&QkdConfig::new(4, 300_000, 0.3, EveModel::None, RngSeed::new(100 + seed))).unwrap();
        assert!(t.key_matches());
        for e in &t.estimates {
            for (est, exact) in [(e.i1, e.exact_i1), (e.i2, e.exact_i2)] {
                pairs += 1;
                good += usize::from((est - exact).abs() <= 0.1 * exact.abs());
            }
        }
    }
    assert!(good as f64 >= 0.95 * pairs as f64, "{good}/{pairs}");
}

#[test]
fn same_seed_same_transcript() {
    let cfg = QkdConfig::new(2, 5_000, 0.2, EveModel::InterceptResend, RngSeed::new(9));
    assert_eq!(run_qkd(&cfg).unwrap(), run_qkd(&cfg).unwrap());
}

#[test]
fn remote_errors_scale_as_inverse_root_shots() {
    let rms = |shots: u64| {
        let ss: f64 = (0..20)
            .map(|s| {
                let r = run_remote_transfer(&RemoteTransferConfig::new(
                    [0.6, 0.48, 0.64],
                    0.1,
                    shots,
                    RngSeed::with_stream(s, shots),
                ))
                .unwrap();
                r.abs_error_i1.powi(2) + r.abs_error_i2.powi(2)
            })
            .sum();
        (ss / 20.0).sqrt()
    };
    let ratio = rms(10_000) / rms(1_000_000);
    assert!((5.0..=20.0).contains(&ratio), "ratio {ratio}");
}

#[test]
fn qecc_syndrome_frequencies_follow_error_weights() {
    let p = [0.6, 0.25, 0.15];
    let rep = run_qecc_demo(&QeccDemoConfig {
        alpha: C64::new(0.8, 0.0),
        beta: C64::new(0.0, 0.6),
        error_probs: p,
        trials: 10_000,
        seed: RngSeed::new(12),
    })
    .unwrap();
    for i in 0..3 {
        assert!((rep.syndrome_frequencies[i] - p[i]).abs() <= 0.02);
        assert!((rep.mixture_syndrome_probabilities[i] - p[i]).abs() < 1e-15);
    }
    assert!(rep.max_fidelity_deviation <= 1e-12);
    assert!((rep.mixture_fidelity - 1.0).abs() <= 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn sign_map_reads_signs(i1 in -5.0f64..5.0, i2 in -5.0f64..5.0) {
        prop_assume!(i1 != 0.0 && i2 != 0.0);
        let b = decode_key_symbol(i1, i2).unwrap();
        prop_assert_eq!(b[0] == 0, i1 > 0.0);
        prop_assert_eq!(b[1] == 0, i2 > 0.0);
    }

    #[test]
    fn recovery_is_exact_for_any_codeword(
        theta in 0.0f64..std::f64::consts::PI,
        phi in 0.0f64..std::f64::consts::TAU,
        err in 0usize..3,
        seed in any::<u64>(),
    ) {
        let alpha = C64::new((theta / 2.0).cos(), 0.0);
        let beta = C64::from_polar((theta / 2.0).sin(), phi);
        let norm = (alpha.norm_sqr() + beta.norm_sqr()).sqrt();
        let (alpha, beta) = (alpha / norm, beta / norm);
        let rho = qecc_encode(alpha, beta).unwrap();
        let mut p = [0.0; 3];
        p[err] = 1.0;
        let (noisy, i) = qecc_apply_noise(&rho, p, RngSeed::new(seed)).unwrap();
        prop_assert_eq!(i, err);
        let (s, post) = qecc_syndrome(&noisy, RngSeed::new(seed ^ 1)).unwrap();
        prop_assert_eq!(s.index(), err);
        let mut psi = vec![C64::new(0.0, 0.0); 6];
        psi[0] = alpha;
        psi[3] = beta;
        let f = qecc_recover(&post, s).unwrap().fidelity_with_pure(&psi).unwrap();
        prop_assert!((f - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn bob_ratios_do_not_depend_on_alpha(p in 0.0f64..0.2, az in 0.3f64..1.2) {
        let m = [0.5f64, 0.6, az];
        let len = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
        let m = m.map(|c| c / len);
        let r = run_remote_transfer(&RemoteTransferConfig::new(m, p, 6, RngSeed::new(0))).unwrap();
        let b = r.bob_bloch;
        prop_assert!((b[1] / b[0] - m[1] / m[0]).abs() < 1e-12);
        prop_assert!((b[1] / b[2] - m[1] / m[2]).abs() < 1e-12);
    }
}

//! Cross-checks between the closed-form model and the simulator.

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use uav_relay::analytic::{self, AnalyticModel};
use uav_relay::mc::{self, ProtocolKind};
use uav_relay::Scenario;

fn combined_se(a: Option<f64>, b: Option<f64>) -> f64 {
    (a.unwrap().powi(2) + b.unwrap().powi(2)).sqrt()
}

#[test]
fn relay_moment_matches_sampled_distances() {
    let scn = Scenario::default();
    let mu = analytic::d2d_relay_moments(&scn).unwrap().mean;
    let (r, dmin) = (scn.config().swarm_radius_m, scn.config().min_separation_m);
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let point = |rng: &mut ChaCha8Rng| loop {
        let (x, y) = (rng.random_range(-r..r), rng.random_range(-r..r));
        if x * x + y * y <= r * r {
            break (x, y);
        }
    };
    let n = 1_000_000;
    let (mut s, mut s2) = (0.0, 0.0);
    let mut kept = 0;
    while kept < n {
        let (a, b) = (point(&mut rng), point(&mut rng));
        let w2 = (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
        if w2 < dmin * dmin {
            continue;
        }
        let v = 1.0 / w2; // α̃ = 2
        s += v;
        s2 += v * v;
        kept += 1;
    }
    let mean = s / n as f64;
    let se = ((s2 / n as f64 - mean * mean) / n as f64).sqrt();
    assert!((mean - mu).abs() <= 3.0 * se, "quadrature {mu:.6e}, sampled {mean:.6e} ± {se:.1e}");
}

#[test]
fn phase2_with_36_relays_matches_conditional_simulation() {
    let scn = Scenario::default();
    let p2 = analytic::phase2_decode_prob(scn.thresholds().phase2, 36.0, &scn).unwrap();
    let (mc, se) = mc::conditional_phase2_success(&scn, 36, 100_000, 5).unwrap();
    assert!((p2 - mc).abs() <= 0.01, "analytic {p2:.5}, simulated {mc:.5} ± {se:.1e}");
}

#[test]
fn expected_phase1_within_two_percent() {
    let scn = Scenario::default();
    let ana = analytic::phase1_expected(&scn).unwrap();
    let est = mc::estimate(&scn, ProtocolKind::Proposed, 20_000, 21).unwrap();
    let sim = est.phase1_mean * scn.n_uavs() as f64;
    assert!(((ana - sim) / sim).abs() <= 0.02, "analytic {ana:.3}, simulated {sim:.3}");
}

#[test]
fn reference_reliability_within_band() {
    let scn = Scenario::default();
    let ana = analytic::reliability(&scn).unwrap().eta;
    let sim = mc::estimate(&scn, ProtocolKind::Proposed, 20_000, 22).unwrap().eta_mean;
    assert!((ana - sim).abs() <= 0.02, "analytic {ana:.5}, simulated {sim:.5}");
}

#[test]
fn message_size_sweep_engines_agree() {
    let base = Scenario::default().with_field("n_uavs", 20.0).unwrap();
    for d in [8.0, 24.0, 40.0, 56.0] {
        let scn = base.with_field("message_bits", d).unwrap();
        let b = analytic::reliability(&scn).unwrap();
        assert_eq!(b.regime, analytic::Regime::LowSinr);
        let sim = mc::estimate(&scn, ProtocolKind::Proposed, 10_000, 23).unwrap().eta_mean;
        assert!((b.eta - sim).abs() <= 0.02, "D={d}: analytic {:.5}, simulated {sim:.5}", b.eta);
    }
}

#[test]
fn mixture_mode_tracks_point_substitution() {
    let scn = Scenario::default();
    let model = AnalyticModel::new(&scn).unwrap();
    let k = mc::phase1_count_distribution(&scn, 5_000, 24).unwrap();
    let mix = model.reliability_mixture(&k.pmf).unwrap();
    let point = model.reliability().unwrap().eta;
    assert!((mix - point).abs() < 0.01, "mixture {mix:.5}, point {point:.5}");
}

/// Proposed ≥ head-only relaying ≥ all-GBS cellular at D = 40, each gap at
/// least three combined standard errors.
///
/// Fails under this model: with the reference parameters head-only relaying
/// reaches about 0.79 while all eight available stations over the full slot
/// reach about 0.84.
#[test]
fn head_relay_beats_cellular_only_at_forty_bits() {
    let scn = Scenario::default();
    let prop = mc::estimate(&scn, ProtocolKind::Proposed, 20_000, 31).unwrap();
    let iii = mc::estimate(&scn, ProtocolKind::HeadOnlyRelay, 20_000, 32).unwrap();
    let ii = mc::estimate(&scn, ProtocolKind::AllGbsNoD2d, 20_000, 33).unwrap();
    let z1 = (prop.eta_mean - iii.eta_mean) / combined_se(prop.std_err, iii.std_err);
    let z2 = (iii.eta_mean - ii.eta_mean) / combined_se(iii.std_err, ii.std_err);
    assert!(
        z1 >= 3.0 && z2 >= 3.0,
        "proposed {:.4}, head-relay {:.4}, all-gbs {:.4} (gaps {z1:.1} SE, {z2:.1} SE)",
        prop.eta_mean,
        iii.eta_mean,
        ii.eta_mean
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn trials_respect_invariants(
        seed in any::<u64>(),
        n in 2usize..30,
        bits in 0.0f64..200.0,
        proto in prop_oneof![
            Just(ProtocolKind::Proposed),
            Just(ProtocolKind::NearestGbsOnly),
            Just(ProtocolKind::AllGbsNoD2d),
            Just(ProtocolKind::HeadOnlyRelay),
            (1usize..6, any::<bool>()).prop_map(|(rounds, with_head)| ProtocolKind::MultiRound { rounds, with_head }),
        ],
    ) {
        let scn = Scenario::default()
            .with_field("n_uavs", n as f64).unwrap()
            .with_field("message_bits", bits).unwrap();
        for i in 0..8 {
            let o = mc::run_trial(&scn, proto, &mut mc::trial_rng(seed, i)).unwrap();
            prop_assert!(!o.structural_violation(scn.config().min_separation_m));
            prop_assert!(o.decoded_phase1.iter().all(|k| !o.decoded_phase2.contains(k)));
            prop_assert!(o.decoded_count() <= n);
            let sizes: Vec<usize> = o.rounds.iter().map(Vec::len).collect();
            prop_assert!(sizes.windows(2).all(|w| w[0] <= w[1]));
        }
    }

    #[test]
    fn reliability_grows_with_rounds(seed in any::<u64>(), with_head in any::<bool>()) {
        let scn = Scenario::default()
            .with_field("n_uavs", 10.0).unwrap()
            .with_field("message_bits", 150.0).unwrap();
        let mut prev = 0.0;
        for rounds in 1..=4 {
            let e = mc::estimate(&scn, ProtocolKind::MultiRound { rounds, with_head }, 40, seed).unwrap();
            prop_assert!(e.eta_mean >= prev);
            prev = e.eta_mean;
        }
    }
}

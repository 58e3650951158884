//! Small-scale fading draws and the per-UAV SINRs they induce.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::geometry::{uav_gbs_distance, GbsLayout, SwarmLayout};
use crate::scenario::Scenario;
use crate::specfun::{bessel_i0e, laguerre_half};

/// Rician factors above this are treated as pure line of sight.
pub const RICIAN_K_CAP: f64 = 1e12;

/// Circularly-symmetric complex normal with unit power.
pub fn sample_rayleigh<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Unit-power Rician gain: a LoS term of power κ/(κ+1) with uniform phase
/// plus a scattered term of power 1/(κ+1).
pub fn sample_rician<R: Rng + ?Sized>(kappa: f64, rng: &mut R) -> Complex64 {
    let k = kappa.min(RICIAN_K_CAP);
    let phi = 2.0 * PI * rng.random::<f64>();
    let los = Complex64::from_polar((k / (k + 1.0)).sqrt(), phi);
    los + sample_rayleigh(rng) * (1.0 / (k + 1.0)).sqrt()
}

/// Cellular fading, N UAVs × M stations, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDrawPhase1 {
    pub n_uavs: usize,
    pub n_gbs: usize,
    pub gains: Vec<Complex64>,
}

impl ChannelDrawPhase1 {
    pub fn sample<R: Rng + ?Sized>(n_uavs: usize, n_gbs: usize, kappa: f64, rng: &mut R) -> Self {
        let gains = (0..n_uavs * n_gbs).map(|_| sample_rician(kappa, rng)).collect();
        Self {
            n_uavs,
            n_gbs,
            gains,
        }
    }

    pub fn gain(&self, uav: usize, gbs: usize) -> Complex64 {
        self.gains[uav * self.n_gbs + gbs]
    }
}

/// D2D fading, receivers × relays, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelDrawPhase2 {
    pub n_rx: usize,
    pub n_tx: usize,
    pub gains: Vec<Complex64>,
}

impl ChannelDrawPhase2 {
    pub fn sample<R: Rng + ?Sized>(n_rx: usize, n_tx: usize, rng: &mut R) -> Self {
        let gains = (0..n_rx * n_tx).map(|_| sample_rayleigh(rng)).collect();
        Self { n_rx, n_tx, gains }
    }

    pub fn gain(&self, rx: usize, tx: usize) -> Complex64 {
        self.gains[rx * self.n_tx + tx]
    }
}

/// Density of |h| for a unit-power Rician gain.
pub fn rician_magnitude_pdf(v: f64, kappa: f64) -> f64 {
    if v < 0.0 {
        return 0.0;
    }
    let k1 = kappa + 1.0;
    let x = 2.0 * (kappa * k1).sqrt() * v;
    // I₀(x) = e^{x} I₀e(x) keeps the exponent balanced for large κ
    2.0 * k1 * v * (-kappa - k1 * v * v + x).exp() * bessel_i0e(x)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RicianMoments {
    pub mean: f64,
    pub second: f64,
    pub fourth: f64,
}

/// E|h|, E|h|² and E|h|⁴ for a unit-power Rician gain.
pub fn rician_moments(kappa: f64) -> RicianMoments {
    let k1 = kappa + 1.0;
    RicianMoments {
        mean: 0.5 * (PI / k1).sqrt() * laguerre_half(-kappa),
        second: 1.0,
        fourth: (2.0 + 4.0 * kappa + kappa * kappa) / (k1 * k1),
    }
}

/// Beamforming applied by the cellular transmitters.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase1Weighting {
    /// Every available GBS co-phases toward the head (equal-gain combining).
    HeadAligned,
    /// Available GBSs transmit with unit weights and no phase alignment.
    Unit,
    /// Only the given GBS transmits; other available stations stay silent.
    Single(usize),
}

/// Cellular SINR of every UAV with head-aligned equal-gain combining.
pub fn phase1_sinrs(gbs: &GbsLayout, swarm: &SwarmLayout, draw: &ChannelDrawPhase1, scn: &Scenario) -> Vec<f64> {
    phase1_sinrs_with(gbs, swarm, draw, scn, Phase1Weighting::HeadAligned)
}

pub fn phase1_sinrs_with(
    gbs: &GbsLayout,
    swarm: &SwarmLayout,
    draw: &ChannelDrawPhase1,
    scn: &Scenario,
    weighting: Phase1Weighting,
) -> Vec<f64> {
    let n = swarm.n_uavs();
    assert_eq!(draw.n_uavs, n, "fading rows must match the swarm");
    assert_eq!(draw.n_gbs, gbs.len(), "fading columns must match the GBS layout");
    let c = scn.config();
    let lin = scn.linear();
    let half_alpha = 0.5 * c.pathloss_exp_cell;
    let amp = |uav: usize, m: usize| -> Complex64 {
        let d = uav_gbs_distance(&swarm.positions[uav], &gbs.positions[m]);
        draw.gain(uav, m) * (lin.ref_gain_cell.sqrt() * d.powf(-half_alpha))
    };
    let head = swarm.head_idx;
    let weights: Vec<Complex64> = match weighting {
        Phase1Weighting::HeadAligned => gbs
            .available_idx
            .iter()
            .map(|&m| {
                let h = amp(head, m);
                if h.norm() > 0.0 {
                    h.conj() / h.norm()
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect(),
        Phase1Weighting::Unit => vec![Complex64::new(1.0, 0.0); gbs.available_idx.len()],
        Phase1Weighting::Single(m) => gbs
            .available_idx
            .iter()
            .map(|&a| Complex64::new(if a == m { 1.0 } else { 0.0 }, 0.0))
            .collect(),
    };
    (0..n)
        .map(|uav| {
            let signal: Complex64 = gbs
                .available_idx
                .iter()
                .zip(&weights)
                .map(|(&m, w)| amp(uav, m) * w)
                .sum();
            let interference: f64 = gbs.occupied_idx.iter().map(|&m| amp(uav, m).norm_sqr()).sum();
            lin.tx_power_gbs_w * signal.norm_sqr() / (lin.tx_power_gbs_w * interference + lin.noise_phase1_w)
        })
        .collect()
}

/// D2D SINRs of the UAVs outside `decoders` when every decoder relays.
#[derive(Debug, Clone, PartialEq)]
pub struct Phase2Sinrs {
    pub receivers: Vec<usize>,
    pub sinr: Vec<f64>,
}

/// Receivers are the UAVs not in `decoders`, in increasing index order;
/// column j of `draw` belongs to `decoders[j]`.
pub fn phase2_sinrs(swarm: &SwarmLayout, decoders: &[usize], draw: &ChannelDrawPhase2, scn: &Scenario) -> Phase2Sinrs {
    let n = swarm.n_uavs();
    let mut is_decoder = vec![false; n];
    for &k in decoders {
        is_decoder[k] = true;
    }
    let receivers: Vec<usize> = (0..n).filter(|&i| !is_decoder[i]).collect();
    assert_eq!(draw.n_rx, receivers.len(), "fading rows must match the receivers");
    assert_eq!(draw.n_tx, decoders.len(), "fading columns must match the relays");
    let c = scn.config();
    let lin = scn.linear();
    let scale = lin.tx_power_uav_w * lin.ref_gain_d2d / lin.intf_noise_phase2_w;
    let half_alpha = 0.5 * c.pathloss_exp_d2d;
    let sinr = receivers
        .iter()
        .enumerate()
        .map(|(r, &uav)| {
            let field: Complex64 = decoders
                .iter()
                .enumerate()
                .map(|(j, &k)| draw.gain(r, j) * swarm.pair_distance(uav, k).powf(-half_alpha))
                .sum();
            scale * field.norm_sqr()
        })
        .collect();
    Phase2Sinrs { receivers, sinr }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{sample_gbs_layout, sample_swarm_layout};
    use crate::scenario::ScenarioConfig;
    use crate::specfun::{adaptive_quad_with, QuadTolerance};
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn mean_se(xs: impl Iterator<Item = f64>) -> (f64, f64) {
        let (mut n, mut s, mut s2) = (0.0, 0.0, 0.0);
        for x in xs {
            n += 1.0;
            s += x;
            s2 += x * x;
        }
        let m = s / n;
        (m, ((s2 / n - m * m) / n).sqrt())
    }

    #[test]
    fn pure_los_limit() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            assert!((sample_rician(f64::INFINITY, &mut rng).norm() - 1.0).abs() < 1e-5);
            assert!((sample_rician(1e15, &mut rng).norm() - 1.0).abs() < 1e-5);
        }
    }

    #[test]
    fn rayleigh_mean_magnitude() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let (m, se) = mean_se((0..1_000_000).map(|_| sample_rician(0.0, &mut rng).norm()));
        assert!((m - PI.sqrt() / 2.0).abs() < 3.0 * se, "m={m}");
        assert!((PI.sqrt() / 2.0 - 0.886_227).abs() < 1e-6);
    }

    #[test]
    fn unit_power_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let (m, se) = mean_se((0..1_000_000).map(|_| sample_rician(4.0, &mut rng).norm_sqr()));
        assert!((m - 1.0).abs() < 3.0 * se, "m={m}");
        let (m, se) = mean_se((0..1_000_000).map(|_| sample_rayleigh(&mut rng).norm_sqr()));
        assert!((m - 1.0).abs() < 3.0 * se, "m={m}");
    }

    #[test]
    fn fourth_moment_matches_draws() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (m, se) = mean_se((0..1_000_000).map(|_| sample_rician(4.0, &mut rng).norm_sqr().powi(2)));
        assert!((rician_moments(4.0).fourth - 1.36).abs() < 1e-15);
        assert!((m - 1.36).abs() < 3.0 * se, "m={m}");
        assert_eq!(rician_moments(0.0).fourth, 2.0);
    }

    fn moment_by_quadrature(kappa: f64, p: i32) -> f64 {
        adaptive_quad_with(
            |v| v.powi(p) * rician_magnitude_pdf(v, kappa),
            0.0,
            f64::INFINITY,
            QuadTolerance::new(1e-13, 1e-12),
        )
        .unwrap()
    }

    #[test]
    fn magnitude_pdf_normalised() {
        for kappa in [0.0, 1.0, 4.0, 10.0] {
            assert!((moment_by_quadrature(kappa, 0) - 1.0).abs() < 1e-9, "κ={kappa}");
            assert!((moment_by_quadrature(kappa, 2) - 1.0).abs() < 1e-9, "κ={kappa}");
        }
        for v in [0.1f64, 0.7, 2.0] {
            let rayleigh = 2.0 * v * (-v * v).exp();
            assert!((rician_magnitude_pdf(v, 0.0) - rayleigh).abs() < 1e-15);
        }
    }

    #[test]
    fn mean_constant_agrees_with_quadrature() {
        for kappa in [0.0, 0.5, 1.0, 4.0, 10.0, 40.0] {
            let q = moment_by_quadrature(kappa, 1);
            assert!((rician_moments(kappa).mean - q).abs() < 1e-10, "κ={kappa}");
            let q4 = moment_by_quadrature(kappa, 4);
            assert!((rician_moments(kappa).fourth - q4).abs() < 1e-9, "κ={kappa}");
        }
        assert!((rician_moments(0.0).mean - 0.886_226_925_452_758).abs() < 1e-12);
    }

    fn two_station_scenario() -> Scenario {
        let mut c = ScenarioConfig::default();
        c.n_uavs = 1;
        c.m_available = 1;
        c.m_occupied = 1;
        c.noise_phase1_dbm = -3000.0;
        c.validate().unwrap()
    }

    #[test]
    fn head_sinr_hand_computation() {
        // equal distances, unit gains, no noise → SINR 1
        let s = two_station_scenario();
        let gbs = GbsLayout {
            positions: vec![[100.0, 0.0], [-100.0, 0.0]],
            available_idx: vec![0],
            occupied_idx: vec![1],
            center_distances: vec![100f64.hypot(300.0); 2],
        };
        let swarm = SwarmLayout::from_positions(vec![[0.0, 0.0, 300.0]]);
        let draw = ChannelDrawPhase1 {
            n_uavs: 1,
            n_gbs: 2,
            gains: vec![Complex64::from_polar(1.0, 0.3), Complex64::from_polar(1.0, -2.0)],
        };
        let sinr = phase1_sinrs(&gbs, &swarm, &draw, &s);
        assert!((sinr[0] - 1.0).abs() < 1e-12, "{}", sinr[0]);
    }

    fn random_setup(seed: u64, f: impl FnOnce(&mut ScenarioConfig)) -> (Scenario, GbsLayout, SwarmLayout, ChannelDrawPhase1) {
        let mut c = ScenarioConfig::default();
        c.n_uavs = 6;
        f(&mut c);
        let s = c.validate().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g = sample_gbs_layout(&s, &mut rng);
        let l = sample_swarm_layout(&s, &mut rng).unwrap();
        let d = ChannelDrawPhase1::sample(l.n_uavs(), g.len(), s.config().rician_k, &mut rng);
        (s, g, l, d)
    }

    #[test]
    fn snr_scales_with_power_without_interference() {
        let (s, g, l, d) = random_setup(9, |c| c.m_occupied = 0);
        let base = phase1_sinrs(&g, &l, &d, &s);
        let louder = s.with_field("tx_power_gbs_dbm", 43.0 + 10.0 * 3f64.log10()).unwrap();
        let scaled = phase1_sinrs(&g, &l, &d, &louder);
        for (a, b) in base.iter().zip(&scaled) {
            assert!((b / a - 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn head_sinr_ignores_per_station_phase() {
        let (s, g, l, mut d) = random_setup(10, |_| {});
        let before = phase1_sinrs(&g, &l, &d, &s)[0];
        for (i, &m) in g.available_idx.iter().enumerate() {
            let rot = Complex64::from_polar(1.0, 0.7 * i as f64 + 0.1);
            for uav in 0..d.n_uavs {
                d.gains[uav * d.n_gbs + m] *= rot;
            }
        }
        let after = phase1_sinrs(&g, &l, &d, &s)[0];
        assert!((after / before - 1.0).abs() < 1e-12);
    }

    #[test]
    fn coherent_beats_noncoherent_at_head() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let s = ScenarioConfig {
            n_uavs: 2,
            ..ScenarioConfig::default()
        }
        .validate()
        .unwrap();
        let (mut egc, mut unit) = (0.0, 0.0);
        for _ in 0..10_000 {
            let g = sample_gbs_layout(&s, &mut rng);
            let l = sample_swarm_layout(&s, &mut rng).unwrap();
            let d = ChannelDrawPhase1::sample(2, g.len(), 4.0, &mut rng);
            egc += phase1_sinrs_with(&g, &l, &d, &s, Phase1Weighting::HeadAligned)[0];
            unit += phase1_sinrs_with(&g, &l, &d, &s, Phase1Weighting::Unit)[0];
        }
        assert!(egc > unit);
    }

    #[test]
    fn single_station_uses_only_that_link() {
        let (s, g, l, d) = random_setup(14, |c| c.m_occupied = 0);
        let m = 3;
        let sinr = phase1_sinrs_with(&g, &l, &d, &s, Phase1Weighting::Single(m));
        let lin = s.linear();
        for (uav, v) in sinr.iter().enumerate() {
            let dist = uav_gbs_distance(&l.positions[uav], &g.positions[m]);
            let p = lin.tx_power_gbs_w * lin.ref_gain_cell * d.gain(uav, m).norm_sqr() / (dist * dist);
            assert!((v / (p / lin.noise_phase1_w) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn empty_relay_set_gives_zero_sinr() {
        let (s, _, l, _) = random_setup(15, |_| {});
        let draw = ChannelDrawPhase2::sample(6, 0, &mut ChaCha8Rng::seed_from_u64(0));
        let out = phase2_sinrs(&l, &[], &draw, &s);
        assert_eq!(out.receivers, (0..6).collect::<Vec<_>>());
        assert!(out.sinr.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn single_relay_hand_value() {
        let s = ScenarioConfig {
            n_uavs: 2,
            ..ScenarioConfig::default()
        }
        .validate()
        .unwrap();
        let l = SwarmLayout::from_positions(vec![[0.0, 0.0, 300.0], [10.0, 0.0, 300.0]]);
        let draw = ChannelDrawPhase2 {
            n_rx: 1,
            n_tx: 1,
            gains: vec![Complex64::from_polar(1.0, 1.2)],
        };
        let out = phase2_sinrs(&l, &[0], &draw, &s);
        assert_eq!(out.receivers, vec![1]);
        let expected = dbm_w(23.0) * 1e-4 * 0.01 / 1e-7;
        assert!((out.sinr[0] - expected).abs() < 1e-12);
        assert!((out.sinr[0] - 1.9953).abs() < 1e-4);

        let noisier = s.with_field("intf_noise_phase2_dbm", -40.0 + 10.0 * 2f64.log10()).unwrap();
        let half = phase2_sinrs(&l, &[0], &draw, &noisier);
        assert!((half.sinr[0] * 2.0 - out.sinr[0]).abs() < 1e-12);
    }

    fn dbm_w(x: f64) -> f64 {
        crate::scenario::dbm_to_watts(x)
    }

    proptest! {
        #[test]
        fn phase2_permutation_equivariant(seed in 0u64..1000, rot in 1usize..5) {
            let (s, _, l, _) = random_setup(seed, |_| {});
            let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xabc);
            let decoders = vec![0usize, 2, 3, 5];
            let draw = ChannelDrawPhase2::sample(2, 4, &mut rng);
            let base = phase2_sinrs(&l, &decoders, &draw, &s);

            let perm: Vec<usize> = (0..4).map(|j| (j + rot) % 4).collect();
            let permuted: Vec<usize> = perm.iter().map(|&j| decoders[j]).collect();
            let mut gains = Vec::new();
            for r in 0..2 {
                for &j in &perm {
                    gains.push(draw.gain(r, j));
                }
            }
            let pdraw = ChannelDrawPhase2 { n_rx: 2, n_tx: 4, gains };
            let other = phase2_sinrs(&l, &permuted, &pdraw, &s);
            prop_assert_eq!(&base.receivers, &other.receivers);
            for (a, b) in base.sinr.iter().zip(&other.sinr) {
                prop_assert!((a - b).abs() <= 1e-12 * a.abs().max(1e-300));
            }
        }
    }
}

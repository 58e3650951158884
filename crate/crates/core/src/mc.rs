//! Monte Carlo estimation of delivery reliability.
//!
//! Trial `i` draws from ChaCha8 seeded with the master seed on stream `i`,
//! and per-trial results are reduced as integer counts, so an estimate is
//! bit-identical for any number of worker threads.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::fading::{phase1_sinrs_with, phase2_sinrs, ChannelDrawPhase1, ChannelDrawPhase2, Phase1Weighting};
use crate::geometry::{sample_gbs_layout, sample_swarm_layout, PlacementError, SwarmLayout};
use crate::scenario::Scenario;

/// Trial count used when none is given.
pub const DEFAULT_TRIALS: usize = 20_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ProtocolKind {
    /// Cellular phase to the whole swarm, then D2D relaying by every decoder.
    Proposed,
    /// Only the available GBS nearest to the swarm transmits, for the full slot.
    NearestGbsOnly,
    /// All available GBSs transmit for the full slot; no D2D phase.
    AllGbsNoD2d,
    /// Two phases, but only the head relays.
    HeadOnlyRelay,
    /// Full-slot cellular stage followed by `rounds` full-slot D2D rounds.
    MultiRound { rounds: usize, with_head: bool },
}

impl ProtocolKind {
    /// The four single-slot protocols, in comparison order.
    pub const SINGLE_SLOT: [ProtocolKind; 4] = [
        ProtocolKind::Proposed,
        ProtocolKind::NearestGbsOnly,
        ProtocolKind::AllGbsNoD2d,
        ProtocolKind::HeadOnlyRelay,
    ];

    pub fn rounds(&self) -> usize {
        match self {
            ProtocolKind::MultiRound { rounds, .. } => *rounds,
            _ => 0,
        }
    }
}

impl fmt::Display for ProtocolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ProtocolKind::Proposed => f.write_str("proposed"),
            ProtocolKind::NearestGbsOnly => f.write_str("nearest-gbs"),
            ProtocolKind::AllGbsNoD2d => f.write_str("all-gbs"),
            ProtocolKind::HeadOnlyRelay => f.write_str("head-relay"),
            ProtocolKind::MultiRound { rounds, with_head } => {
                write!(f, "multi-round:{rounds}")?;
                if !with_head {
                    f.write_str(":no-head")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown protocol `{0}` (expected proposed, nearest-gbs, all-gbs, head-relay, or multi-round:<rounds>[:no-head])")]
pub struct ParseProtocolError(String);

impl FromStr for ProtocolKind {
    type Err = ParseProtocolError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseProtocolError(s.to_string());
        match s.to_ascii_lowercase().as_str() {
            "proposed" | "two-phase" => return Ok(ProtocolKind::Proposed),
            "nearest-gbs" | "protocol-i" | "i" => return Ok(ProtocolKind::NearestGbsOnly),
            "all-gbs" | "protocol-ii" | "ii" => return Ok(ProtocolKind::AllGbsNoD2d),
            "head-relay" | "protocol-iii" | "iii" => return Ok(ProtocolKind::HeadOnlyRelay),
            _ => {}
        }
        let mut parts = s.split(':');
        if parts.next() != Some("multi-round") {
            return Err(bad());
        }
        let rounds: usize = parts.next().and_then(|r| r.parse().ok()).ok_or_else(bad)?;
        let with_head = match parts.next() {
            None | Some("head") => true,
            Some("no-head") => false,
            Some(_) => return Err(bad()),
        };
        if rounds == 0 || parts.next().is_some() {
            return Err(bad());
        }
        Ok(ProtocolKind::MultiRound { rounds, with_head })
    }
}

/// Who decoded in one trial.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialOutcome {
    pub protocol: ProtocolKind,
    pub n_uavs: usize,
    /// Cellular-stage decoders, increasing.
    pub decoded_phase1: Vec<usize>,
    /// UAVs that decoded only through D2D, increasing.
    pub decoded_phase2: Vec<usize>,
    /// Multi-round only: cumulative decoder set after each D2D round.
    pub rounds: Vec<Vec<usize>>,
    pub min_pair_distance: f64,
}

impl TrialOutcome {
    pub fn decoded_count(&self) -> usize {
        self.decoded_phase1.len() + self.decoded_phase2.len()
    }

    pub fn decoded_fraction(&self) -> f64 {
        self.decoded_count() as f64 / self.n_uavs as f64
    }

    /// True when the trial breaks an invariant of the protocol model.
    pub fn structural_violation(&self, min_separation: f64) -> bool {
        let n = self.n_uavs;
        let mut seen = vec![false; n];
        for &k in self.decoded_phase1.iter().chain(&self.decoded_phase2) {
            if k >= n || seen[k] {
                return true;
            }
            seen[k] = true;
        }
        if self.min_pair_distance < min_separation {
            return true;
        }
        let mut prev: &[usize] = &self.decoded_phase1;
        for round in &self.rounds {
            if !prev.iter().all(|k| round.binary_search(k).is_ok()) {
                return true;
            }
            prev = round;
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum McError {
    #[error("trial count must be at least 1")]
    NoTrials,
    #[error(transparent)]
    Placement(#[from] PlacementError),
    #[error("could not build worker pool: {0}")]
    Pool(String),
}

/// The per-trial generator: master seed on stream `trial`.
pub fn trial_rng(master_seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial);
    rng
}

fn select(sinr: &[f64], theta: f64) -> Vec<usize> {
    sinr.iter()
        .enumerate()
        .filter(|(_, &s)| s >= theta)
        .map(|(i, _)| i)
        .collect()
}

struct Placed {
    gbs: crate::geometry::GbsLayout,
    swarm: SwarmLayout,
    draw: ChannelDrawPhase1,
}

fn place(scn: &Scenario, rng: &mut ChaCha8Rng) -> Result<Placed, PlacementError> {
    let gbs = sample_gbs_layout(scn, rng);
    let swarm = sample_swarm_layout(scn, rng)?;
    let draw = ChannelDrawPhase1::sample(swarm.n_uavs(), gbs.len(), scn.config().rician_k, rng);
    Ok(Placed { gbs, swarm, draw })
}

/// One D2D stage: UAVs outside `decoded` listen to every UAV in `relays`.
fn d2d_stage(
    scn: &Scenario,
    swarm: &SwarmLayout,
    decoded: &[usize],
    relays: &[usize],
    theta: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    if relays.is_empty() {
        return Vec::new();
    }
    let n_rx = swarm.n_uavs() - relays.len();
    let draw = ChannelDrawPhase2::sample(n_rx, relays.len(), rng);
    let out = phase2_sinrs(swarm, relays, &draw, scn);
    out.receivers
        .iter()
        .zip(&out.sinr)
        .filter(|(k, &s)| s >= theta && decoded.binary_search(k).is_err())
        .map(|(&k, _)| k)
        .collect()
}

fn merge(a: &[usize], b: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = a.iter().chain(b).copied().collect();
    v.sort_unstable();
    v
}

/// Samples one snapshot and runs `protocol` on it.
pub fn run_trial(scn: &Scenario, protocol: ProtocolKind, rng: &mut ChaCha8Rng) -> Result<TrialOutcome, PlacementError> {
    let p = place(scn, rng)?;
    let th = scn.thresholds();
    let n = p.swarm.n_uavs();
    let mut outcome = TrialOutcome {
        protocol,
        n_uavs: n,
        decoded_phase1: Vec::new(),
        decoded_phase2: Vec::new(),
        rounds: Vec::new(),
        min_pair_distance: p.swarm.min_pair_distance(),
    };
    match protocol {
        ProtocolKind::Proposed | ProtocolKind::HeadOnlyRelay => {
            let sinr = phase1_sinrs_with(&p.gbs, &p.swarm, &p.draw, scn, Phase1Weighting::HeadAligned);
            let theta1 = select(&sinr, th.phase1);
            let relays = if protocol == ProtocolKind::Proposed {
                theta1.clone()
            } else if theta1.binary_search(&p.swarm.head_idx).is_ok() {
                vec![p.swarm.head_idx]
            } else {
                Vec::new()
            };
            outcome.decoded_phase2 = d2d_stage(scn, &p.swarm, &theta1, &relays, th.phase2, rng);
            outcome.decoded_phase1 = theta1;
        }
        ProtocolKind::NearestGbsOnly => {
            let m = p.gbs.nearest_available().expect("at least one available GBS");
            let sinr = phase1_sinrs_with(&p.gbs, &p.swarm, &p.draw, scn, Phase1Weighting::Single(m));
            outcome.decoded_phase1 = select(&sinr, th.cell_full);
        }
        ProtocolKind::AllGbsNoD2d => {
            let sinr = phase1_sinrs_with(&p.gbs, &p.swarm, &p.draw, scn, Phase1Weighting::HeadAligned);
            outcome.decoded_phase1 = select(&sinr, th.cell_full);
        }
        ProtocolKind::MultiRound { rounds, with_head } => {
            let weighting = if with_head {
                Phase1Weighting::HeadAligned
            } else {
                Phase1Weighting::Unit
            };
            let sinr = phase1_sinrs_with(&p.gbs, &p.swarm, &p.draw, scn, weighting);
            let theta1 = select(&sinr, th.cell_full);
            let mut decoded = theta1.clone();
            for _ in 0..rounds {
                let fresh = d2d_stage(scn, &p.swarm, &decoded, &decoded, th.d2d_full, rng);
                decoded = merge(&decoded, &fresh);
                outcome.rounds.push(decoded.clone());
            }
            outcome.decoded_phase2 = decoded.iter().copied().filter(|k| theta1.binary_search(k).is_err()).collect();
            outcome.decoded_phase1 = theta1;
        }
    }
    Ok(outcome)
}

/// Cellular-stage decoders of the proposed protocol. Consumes the same
/// draws as `run_trial`, so for equal generators the result equals its
/// `decoded_phase1`.
pub fn phase1_decoders(scn: &Scenario, rng: &mut ChaCha8Rng) -> Result<Vec<usize>, PlacementError> {
    let p = place(scn, rng)?;
    let sinr = phase1_sinrs_with(&p.gbs, &p.swarm, &p.draw, scn, Phase1Weighting::HeadAligned);
    Ok(select(&sinr, scn.thresholds().phase1))
}

/// Integer accumulator; addition is exact, so reduction order is irrelevant.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
struct Tally {
    trials: u64,
    decoded: u64,
    decoded_sq: u128,
    phase1: u64,
    phase1_sq: u128,
    rounds: Vec<u64>,
    violations: u64,
}

impl Tally {
    fn add(mut self, o: &TrialOutcome, min_sep: f64) -> Self {
        let c = o.decoded_count() as u64;
        let c1 = o.decoded_phase1.len() as u64;
        self.trials += 1;
        self.decoded += c;
        self.decoded_sq += (c * c) as u128;
        self.phase1 += c1;
        self.phase1_sq += (c1 * c1) as u128;
        if self.rounds.len() < o.rounds.len() {
            self.rounds.resize(o.rounds.len(), 0);
        }
        for (acc, r) in self.rounds.iter_mut().zip(&o.rounds) {
            *acc += r.len() as u64;
        }
        self.violations += u64::from(o.structural_violation(min_sep));
        self
    }

    fn merge(mut self, o: Self) -> Self {
        self.trials += o.trials;
        self.decoded += o.decoded;
        self.decoded_sq += o.decoded_sq;
        self.phase1 += o.phase1;
        self.phase1_sq += o.phase1_sq;
        if self.rounds.len() < o.rounds.len() {
            self.rounds.resize(o.rounds.len(), 0);
        }
        for (a, b) in self.rounds.iter_mut().zip(&o.rounds) {
            *a += b;
        }
        self.violations += o.violations;
        self
    }
}

fn mean_and_se(sum: u64, sum_sq: u128, trials: u64, scale: f64) -> (f64, Option<f64>) {
    let t = trials as f64;
    let mean = sum as f64 / t / scale;
    if trials < 2 {
        return (mean, None);
    }
    // T·Σc² − (Σc)² is exact in integers
    let num = trials as u128 * sum_sq - (sum as u128) * (sum as u128);
    let var = num as f64 / (t * (t - 1.0)) / (scale * scale);
    (mean, Some((var / t).sqrt()))
}

/// Mean decoded fraction over independent snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct ReliabilityEstimate {
    pub protocol: ProtocolKind,
    pub eta_mean: f64,
    /// `None` for a single trial.
    pub std_err: Option<f64>,
    pub trials: usize,
    pub seed: u64,
    /// Cellular-stage decoded fraction.
    pub phase1_mean: f64,
    pub phase1_std_err: Option<f64>,
    /// Multi-round only: mean cumulative decoded fraction after each round.
    pub per_round: Vec<f64>,
    /// Trials that broke a structural invariant; always zero unless a bug.
    pub violations: u64,
}

pub fn estimate(scn: &Scenario, protocol: ProtocolKind, trials: usize, master_seed: u64) -> Result<ReliabilityEstimate, McError> {
    if trials == 0 {
        return Err(McError::NoTrials);
    }
    let min_sep = scn.config().min_separation_m;
    let tally = (0..trials as u64)
        .into_par_iter()
        .map(|i| run_trial(scn, protocol, &mut trial_rng(master_seed, i)))
        .try_fold(Tally::default, |t, o| o.map(|o| t.add(&o, min_sep)))
        .try_reduce(Tally::default, |a, b| Ok(a.merge(b)))?;
    let n = scn.n_uavs() as f64;
    let (eta_mean, std_err) = mean_and_se(tally.decoded, tally.decoded_sq, tally.trials, n);
    let (phase1_mean, phase1_std_err) = mean_and_se(tally.phase1, tally.phase1_sq, tally.trials, n);
    let per_round = tally
        .rounds
        .iter()
        .map(|&r| r as f64 / tally.trials as f64 / n)
        .collect();
    Ok(ReliabilityEstimate {
        protocol,
        eta_mean,
        std_err,
        trials,
        seed: master_seed,
        phase1_mean,
        phase1_std_err,
        per_round,
        violations: tally.violations,
    })
}

/// `estimate` on a dedicated pool of `threads` workers.
pub fn estimate_with_threads(
    scn: &Scenario,
    protocol: ProtocolKind,
    trials: usize,
    master_seed: u64,
    threads: usize,
) -> Result<ReliabilityEstimate, McError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| McError::Pool(e.to_string()))?;
    pool.install(|| estimate(scn, protocol, trials, master_seed))
}

/// Empirical distribution of |Θ^(I)|.
#[derive(Debug, Clone, PartialEq)]
pub struct CountDistribution {
    /// `pmf[k]` = fraction of trials with exactly k cellular-stage decoders.
    pub pmf: Vec<f64>,
    pub mean: f64,
    pub std_err: Option<f64>,
    pub trials: usize,
    pub seed: u64,
}

impl CountDistribution {
    /// Most frequent count; ties go to the smaller count.
    pub fn mode(&self) -> usize {
        let mut best = 0;
        for (k, &p) in self.pmf.iter().enumerate() {
            if p > self.pmf[best] {
                best = k;
            }
        }
        best
    }
}

pub fn phase1_count_distribution(scn: &Scenario, trials: usize, master_seed: u64) -> Result<CountDistribution, McError> {
    if trials == 0 {
        return Err(McError::NoTrials);
    }
    let n = scn.n_uavs();
    let counts = (0..trials as u64)
        .into_par_iter()
        .map(|i| phase1_decoders(scn, &mut trial_rng(master_seed, i)).map(|d| d.len()))
        .try_fold(
            || vec![0u64; n + 1],
            |mut h, k| {
                h[k?] += 1;
                Ok::<_, PlacementError>(h)
            },
        )
        .try_reduce(
            || vec![0u64; n + 1],
            |mut a, b| {
                a.iter_mut().zip(&b).for_each(|(x, y)| *x += y);
                Ok(a)
            },
        )?;
    let sum: u64 = counts.iter().enumerate().map(|(k, &c)| k as u64 * c).sum();
    let sum_sq: u128 = counts.iter().enumerate().map(|(k, &c)| (k * k) as u128 * c as u128).sum();
    let (mean, std_err) = mean_and_se(sum, sum_sq, trials as u64, 1.0);
    Ok(CountDistribution {
        pmf: counts.iter().map(|&c| c as f64 / trials as f64).collect(),
        mean,
        std_err,
        trials,
        seed: master_seed,
    })
}

/// Fraction of non-relays that decode in phase II when UAVs `0..k` relay,
/// with fresh geometry and fading every trial. Mean and standard error.
pub fn conditional_phase2_success(scn: &Scenario, k: usize, trials: usize, master_seed: u64) -> Result<(f64, f64), McError> {
    let n = scn.n_uavs();
    if trials < 2 || k == 0 || k >= n {
        return Err(McError::NoTrials);
    }
    let theta = scn.thresholds().phase2;
    let relays: Vec<usize> = (0..k).collect();
    let (s, s2) = (0..trials as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = trial_rng(master_seed, i);
            let swarm = sample_swarm_layout(scn, &mut rng)?;
            let ok = d2d_stage(scn, &swarm, &relays, &relays, theta, &mut rng).len() as u64;
            Ok::<_, PlacementError>((ok, ok * ok))
        })
        .try_reduce(|| (0, 0), |a, b| Ok((a.0 + b.0, a.1 + b.1)))?;
    let (mean, se) = mean_and_se(s, s2 as u128, trials as u64, (n - k) as f64);
    Ok((mean, se.unwrap_or(f64::NAN)))
}

//! Command-line front end. Every command writes CSV to `--out`, or to
//! standard output when no path is given; a short human-readable summary
//! goes to the other stream.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::{AnalyticBreakdown, AnalyticModel};
use crate::error::{Error, Result};
use crate::mc::{self, ProtocolKind, ReliabilityEstimate, DEFAULT_TRIALS};
use crate::scenario::{Scenario, ScenarioConfig};

/// Environment variable consulted when `--seed` is absent.
pub const SEED_ENV: &str = "UAV_RELAY_SEED";
pub const DEFAULT_SEED: u64 = 20_240_601;

#[derive(Debug, Parser)]
#[command(name = "uav-relay", version, about = "Two-phase cellular + D2D delivery reliability for UAV swarms")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct CommonArgs {
    /// TOML scenario file; missing keys take reference defaults.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Override one scenario field, e.g. `--set message_bits=16`. Repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub overrides: Vec<String>,
    #[arg(long, default_value_t = DEFAULT_TRIALS)]
    pub trials: usize,
    /// Master seed; falls back to $UAV_RELAY_SEED, then a fixed default.
    #[arg(long)]
    pub seed: Option<u64>,
    /// CSV destination; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Engine {
    Analytic,
    Mc,
    Both,
}

impl Engine {
    fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    fn mc(self) -> bool {
        matches!(self, Engine::Mc | Engine::Both)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form reliability with every intermediate quantity.
    Analyze {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Monte Carlo reliability of one protocol.
    Simulate {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value = "proposed")]
        protocol: ProtocolKind,
    },
    /// Monte Carlo reliability of the proposed protocol and the three benchmarks.
    Compare {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        m_available: Option<usize>,
        #[arg(long)]
        m_occupied: Option<usize>,
    },
    /// Reliability over a list or range of one parameter.
    Sweep {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        var: SweepVariable,
        /// Comma-separated values.
        #[arg(long, conflicts_with = "range", required_unless_present = "range")]
        values: Option<String>,
        /// `start:stop:step`, inclusive of `stop`.
        #[arg(long)]
        range: Option<String>,
        #[arg(long, value_enum, default_value_t = Engine::Both)]
        engine: Engine,
        #[arg(long, default_value = "proposed")]
        protocol: ProtocolKind,
    },
    /// Grid search for the phase-I duration that maximises reliability.
    OptimizeTau {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, value_enum, default_value_t = Engine::Analytic)]
        engine: Engine,
        /// Grid start in seconds; default 10% of the slot.
        #[arg(long)]
        start: Option<f64>,
        /// Grid end in seconds (inclusive); default 90% of the slot.
        #[arg(long)]
        stop: Option<f64>,
        /// Grid step in seconds; default 5% of the slot.
        #[arg(long)]
        step: Option<f64>,
    },
    /// Histogram of the number of phase-I decoders.
    DistK {
        #[command(flatten)]
        common: CommonArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
#[value(rename_all = "snake_case")]
pub enum SweepVariable {
    MessageBits,
    SwarmRadiusM,
    SwarmAltitudeM,
    TauPhase1S,
    NUavs,
    MAvailable,
    MOccupied,
    Rounds,
}

impl SweepVariable {
    pub fn as_str(&self) -> &'static str {
        match self {
            SweepVariable::MessageBits => "message_bits",
            SweepVariable::SwarmRadiusM => "swarm_radius_m",
            SweepVariable::SwarmAltitudeM => "swarm_altitude_m",
            SweepVariable::TauPhase1S => "tau_phase1_s",
            SweepVariable::NUavs => "n_uavs",
            SweepVariable::MAvailable => "m_available",
            SweepVariable::MOccupied => "m_occupied",
            SweepVariable::Rounds => "rounds",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedSource {
    Flag,
    Env,
    Default,
}

/// Flag beats environment beats the built-in default.
pub fn resolve_seed(flag: Option<u64>, env: Option<&str>) -> Result<(u64, SeedSource)> {
    if let Some(s) = flag {
        return Ok((s, SeedSource::Flag));
    }
    match env {
        Some(v) => v
            .trim()
            .parse()
            .map(|s| (s, SeedSource::Env))
            .map_err(|_| Error::Usage(format!("{SEED_ENV}={v:?} is not an unsigned 64-bit integer"))),
        None => Ok((DEFAULT_SEED, SeedSource::Default)),
    }
}

/// Loads `--config`, applies `--set` overrides in order and validates.
pub fn load_scenario(common: &CommonArgs) -> Result<Scenario> {
    let mut cfg = match &common.config {
        Some(p) => ScenarioConfig::load(p)?,
        None => ScenarioConfig::default(),
    };
    for o in &common.overrides {
        let (k, v) = o
            .split_once('=')
            .ok_or_else(|| Error::Usage(format!("override `{o}` is not KEY=VALUE")))?;
        let v: f64 = v
            .trim()
            .parse()
            .map_err(|_| Error::Usage(format!("override `{o}`: value is not a number")))?;
        cfg.set_field(k.trim(), v)?;
    }
    Ok(cfg.validate()?)
}

/// Values of a sweep, in the order they are evaluated and reported.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub variable: SweepVariable,
    pub values: Vec<f64>,
    pub engine: Engine,
    pub protocol: ProtocolKind,
}

impl SweepSpec {
    pub fn new(variable: SweepVariable, values: Vec<f64>, engine: Engine, protocol: ProtocolKind) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Usage("sweep needs at least one value".into()));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::Usage("sweep values must be finite".into()));
        }
        if engine.analytic() && protocol != ProtocolKind::Proposed {
            return Err(Error::Usage(format!(
                "the analytic engine models only the proposed protocol, not {protocol}"
            )));
        }
        if variable == SweepVariable::Rounds {
            if !matches!(protocol, ProtocolKind::MultiRound { .. }) {
                return Err(Error::Usage("sweeping rounds needs --protocol multi-round:<n>[:no-head]".into()));
            }
            if values.iter().any(|&v| v < 1.0 || v.fract() != 0.0) {
                return Err(Error::Usage("rounds must be positive integers".into()));
            }
        }
        Ok(Self { variable, values, engine, protocol })
    }

    /// Scenario and protocol at one sweep value.
    pub fn point(&self, base: &Scenario, value: f64) -> Result<(Scenario, ProtocolKind)> {
        match (self.variable, self.protocol) {
            (SweepVariable::Rounds, ProtocolKind::MultiRound { with_head, .. }) => Ok((
                base.clone(),
                ProtocolKind::MultiRound { rounds: value as usize, with_head },
            )),
            (v, p) => Ok((base.with_field(v.as_str(), value)?, p)),
        }
    }
}

pub fn parse_values(list: &str) -> Result<Vec<f64>> {
    list.split(',')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| Error::Usage(format!("`{t}` is not a number")))
        })
        .collect()
}

/// Inclusive arithmetic grid `start, start+step, …` up to `stop`.
pub fn grid(start: f64, stop: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0) || !start.is_finite() || !stop.is_finite() || stop < start {
        return Err(Error::Usage(format!("bad grid {start}:{stop}:{step}; need start ≤ stop and step > 0")));
    }
    let n = ((stop - start) / step + 1e-9).floor() as usize;
    Ok((0..=n).map(|i| start + i as f64 * step).collect())
}

pub fn parse_range(spec: &str) -> Result<Vec<f64>> {
    let parts = parse_values(&spec.replace(':', ","))?;
    match parts[..] {
        [a, b, s] => grid(a, b, s),
        _ => Err(Error::Usage(format!("range `{spec}` is not start:stop:step"))),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AnalyzeRow {
    pub n_uavs: usize,
    pub m_available: usize,
    pub m_occupied: usize,
    pub message_bits: f64,
    pub tau_phase1_s: f64,
    pub tau_total_s: f64,
    pub theta_phase1: f64,
    pub theta_phase2: f64,
    pub p_head: f64,
    pub head_method: &'static str,
    pub p_member: f64,
    pub expected_phase1: f64,
    pub k_effective: f64,
    pub p_phase2: f64,
    pub eta: f64,
    pub one_minus_eta: f64,
    pub regime: &'static str,
    pub engine: &'static str,
}

impl AnalyzeRow {
    pub fn new(scn: &Scenario, b: &AnalyticBreakdown) -> Self {
        let c = scn.config();
        Self {
            n_uavs: c.n_uavs,
            m_available: c.m_available,
            m_occupied: c.m_occupied,
            message_bits: c.message_bits,
            tau_phase1_s: c.tau_phase1_s,
            tau_total_s: c.tau_total_s,
            theta_phase1: b.theta_phase1,
            theta_phase2: b.theta_phase2,
            p_head: b.p_head,
            head_method: b.head_method.as_str(),
            p_member: b.p_member,
            expected_phase1: b.expected_phase1,
            k_effective: b.k_effective,
            p_phase2: b.p_phase2,
            eta: b.eta,
            one_minus_eta: 1.0 - b.eta,
            regime: b.regime.as_str(),
            engine: "analytic",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct EstimateRow {
    pub protocol: String,
    pub n_uavs: usize,
    pub m_available: usize,
    pub m_occupied: usize,
    pub message_bits: f64,
    pub trials: usize,
    pub seed: u64,
    pub seed_source: SeedSource,
    pub eta: f64,
    pub one_minus_eta: f64,
    /// Empty when a single trial leaves it undefined.
    pub std_err: Option<f64>,
    pub phase1_fraction: f64,
    pub phase1_std_err: Option<f64>,
    pub engine: &'static str,
}

impl EstimateRow {
    pub fn new(scn: &Scenario, e: &ReliabilityEstimate, seed_source: SeedSource) -> Self {
        let c = scn.config();
        Self {
            protocol: e.protocol.to_string(),
            n_uavs: c.n_uavs,
            m_available: c.m_available,
            m_occupied: c.m_occupied,
            message_bits: c.message_bits,
            trials: e.trials,
            seed: e.seed,
            seed_source,
            eta: e.eta_mean,
            one_minus_eta: 1.0 - e.eta_mean,
            std_err: e.std_err,
            phase1_fraction: e.phase1_mean,
            phase1_std_err: e.phase1_std_err,
            engine: "mc",
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SweepRow {
    pub variable: &'static str,
    pub value: f64,
    pub engine: &'static str,
    pub protocol: String,
    /// Empty for analytic rows.
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub seed_source: Option<SeedSource>,
    pub eta: f64,
    pub one_minus_eta: f64,
    pub std_err: Option<f64>,
    /// Analytic rows only.
    pub regime: Option<&'static str>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TauRow {
    pub tau_phase1_s: f64,
    pub engine: &'static str,
    pub trials: Option<usize>,
    pub seed: Option<u64>,
    pub eta: f64,
    pub one_minus_eta: f64,
    pub std_err: Option<f64>,
    pub is_best: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct DistRow {
    pub k: usize,
    pub probability: f64,
    pub trials: usize,
    pub seed: u64,
    pub seed_source: SeedSource,
}

/// Seed, trial count and provenance shared by every MC row of a run.
#[derive(Debug, Clone, Copy)]
struct Run {
    trials: usize,
    seed: u64,
    source: SeedSource,
}

impl Run {
    fn new(common: &CommonArgs, env_seed: Option<&str>) -> Result<Self> {
        let (seed, source) = resolve_seed(common.seed, env_seed)?;
        if common.trials == 0 {
            return Err(Error::Usage("--trials must be at least 1".into()));
        }
        Ok(Self { trials: common.trials, seed, source })
    }
}

pub fn cmd_analyze(scn: &Scenario) -> Result<AnalyzeRow> {
    let b = AnalyticModel::new(scn)?.reliability()?;
    Ok(AnalyzeRow::new(scn, &b))
}

pub fn cmd_simulate(scn: &Scenario, protocol: ProtocolKind, trials: usize, seed: u64, source: SeedSource) -> Result<EstimateRow> {
    let e = mc::estimate(scn, protocol, trials, seed)?;
    Ok(EstimateRow::new(scn, &e, source))
}

pub fn cmd_compare(scn: &Scenario, trials: usize, seed: u64, source: SeedSource) -> Result<Vec<EstimateRow>> {
    ProtocolKind::SINGLE_SLOT
        .iter()
        .map(|&p| cmd_simulate(scn, p, trials, seed, source))
        .collect()
}

pub fn cmd_sweep(base: &Scenario, spec: &SweepSpec, trials: usize, seed: u64, source: SeedSource) -> Result<Vec<SweepRow>> {
    let per_point: Vec<Result<Vec<SweepRow>>> = spec
        .values
        .par_iter()
        .map(|&value| {
            let (scn, protocol) = spec.point(base, value)?;
            let mut rows = Vec::with_capacity(2);
            if spec.engine.analytic() {
                let b = AnalyticModel::new(&scn)?.reliability()?;
                rows.push(SweepRow {
                    variable: spec.variable.as_str(),
                    value,
                    engine: "analytic",
                    protocol: protocol.to_string(),
                    trials: None,
                    seed: None,
                    seed_source: None,
                    eta: b.eta,
                    one_minus_eta: 1.0 - b.eta,
                    std_err: None,
                    regime: Some(b.regime.as_str()),
                });
            }
            if spec.engine.mc() {
                let e = mc::estimate(&scn, protocol, trials, seed)?;
                rows.push(SweepRow {
                    variable: spec.variable.as_str(),
                    value,
                    engine: "mc",
                    protocol: protocol.to_string(),
                    trials: Some(trials),
                    seed: Some(seed),
                    seed_source: Some(source),
                    eta: e.eta_mean,
                    one_minus_eta: 1.0 - e.eta_mean,
                    std_err: e.std_err,
                    regime: None,
                });
            }
            Ok(rows)
        })
        .collect();
    let mut out = Vec::new();
    for r in per_point {
        out.extend(r?);
    }
    Ok(out)
}

/// Index of the largest value; the first wins a tie, so an ascending grid
/// resolves ties toward the shorter phase I.
pub fn argmax_first(values: &[f64]) -> Option<usize> {
    let mut best: Option<usize> = None;
    for (i, &v) in values.iter().enumerate() {
        if best.is_none_or(|b| v > values[b]) {
            best = Some(i);
        }
    }
    best
}

/// Evaluates every grid point with each selected engine and marks the
/// best point per engine.
pub fn cmd_optimize_tau(base: &Scenario, grid: &[f64], engine: Engine, trials: usize, seed: u64) -> Result<Vec<TauRow>> {
    let tau = base.config().tau_total_s;
    if grid.is_empty() || grid.iter().any(|&t| !(t > 0.0 && t < tau)) {
        return Err(Error::Usage(format!("phase-I grid must be non-empty and inside (0, {tau}) s")));
    }
    let mut rows = Vec::new();
    let mut push_engine = |name: &'static str, evals: Vec<(f64, Option<f64>)>, mc: bool| {
        let etas: Vec<f64> = evals.iter().map(|e| e.0).collect();
        let best = argmax_first(&etas);
        for (i, (&t, (eta, se))) in grid.iter().zip(evals).enumerate() {
            rows.push(TauRow {
                tau_phase1_s: t,
                engine: name,
                trials: mc.then_some(trials),
                seed: mc.then_some(seed),
                eta,
                one_minus_eta: 1.0 - eta,
                std_err: se,
                is_best: Some(i) == best,
            });
        }
    };
    if engine.analytic() {
        let evals = grid
            .par_iter()
            .map(|&t| {
                let scn = base.with_field("tau_phase1_s", t)?;
                Ok((AnalyticModel::new(&scn)?.reliability()?.eta, None))
            })
            .collect::<Result<Vec<_>>>()?;
        push_engine("analytic", evals, false);
    }
    if engine.mc() {
        let evals = grid
            .par_iter()
            .map(|&t| {
                let scn = base.with_field("tau_phase1_s", t)?;
                let e = mc::estimate(&scn, ProtocolKind::Proposed, trials, seed)?;
                Ok((e.eta_mean, e.std_err))
            })
            .collect::<Result<Vec<_>>>()?;
        push_engine("mc", evals, true);
    }
    Ok(rows)
}

pub fn cmd_dist_k(scn: &Scenario, trials: usize, seed: u64, source: SeedSource) -> Result<(Vec<DistRow>, mc::CountDistribution)> {
    let d = mc::phase1_count_distribution(scn, trials, seed)?;
    let rows = d
        .pmf
        .iter()
        .enumerate()
        .map(|(k, &p)| DistRow { k, probability: p, trials, seed, seed_source: source })
        .collect();
    Ok((rows, d))
}

fn write_csv<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map_or_else(|| "undefined".to_string(), |v| format!("{v:.3e}"))
}

/// Runs a parsed command. CSV goes to `--out` if set, else to `stdout`;
/// the summary goes to whichever of `stdout`/`stderr` the CSV did not use.
pub fn run(cli: Cli, env_seed: Option<&str>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    let common = match &cli.command {
        Command::Analyze { common }
        | Command::Simulate { common, .. }
        | Command::Compare { common, .. }
        | Command::Sweep { common, .. }
        | Command::OptimizeTau { common, .. }
        | Command::DistK { common } => common.clone(),
    };
    let mut file;
    let (csv_out, log): (&mut dyn Write, &mut dyn Write) = match &common.out {
        Some(p) => {
            file = std::io::BufWriter::new(std::fs::File::create(p)?);
            (&mut file, stdout)
        }
        None => (stdout, stderr),
    };
    let scn = load_scenario(&common)?;

    match cli.command {
        Command::Analyze { .. } => {
            let row = cmd_analyze(&scn)?;
            writeln!(
                log,
                "theta_phase1 = {:.6e}\ntheta_phase2 = {:.6e}\np_head = {:.9} ({})\np_member = {:.9}\n\
                 expected_phase1 = {:.6}\nk_effective = {:.6}\np_phase2 = {:.9}\neta = {:.9}\n\
                 one_minus_eta = {:.6e}\nregime = {}",
                row.theta_phase1,
                row.theta_phase2,
                row.p_head,
                row.head_method,
                row.p_member,
                row.expected_phase1,
                row.k_effective,
                row.p_phase2,
                row.eta,
                row.one_minus_eta,
                row.regime
            )?;
            write_csv(&[row], csv_out)
        }
        Command::Simulate { protocol, .. } => {
            let run = Run::new(&common, env_seed)?;
            let row = cmd_simulate(&scn, protocol, run.trials, run.seed, run.source)?;
            writeln!(
                log,
                "{}: eta = {:.6} (std err {}), {} trials, seed {} ({:?})",
                row.protocol,
                row.eta,
                fmt_opt(row.std_err),
                row.trials,
                row.seed,
                row.seed_source
            )?;
            write_csv(&[row], csv_out)
        }
        Command::Compare { m_available, m_occupied, .. } => {
            let run = Run::new(&common, env_seed)?;
            let mut scn = scn;
            if let Some(m) = m_available {
                scn = scn.with_field("m_available", m as f64)?;
            }
            if let Some(m) = m_occupied {
                scn = scn.with_field("m_occupied", m as f64)?;
            }
            let rows = cmd_compare(&scn, run.trials, run.seed, run.source)?;
            for r in &rows {
                writeln!(log, "{:<12} eta = {:.6} (std err {})", r.protocol, r.eta, fmt_opt(r.std_err))?;
            }
            write_csv(&rows, csv_out)
        }
        Command::Sweep { var, values, range, engine, protocol, .. } => {
            let run = Run::new(&common, env_seed)?;
            let vals = match (values, range) {
                (Some(v), _) => parse_values(&v)?,
                (None, Some(r)) => parse_range(&r)?,
                (None, None) => return Err(Error::Usage("sweep needs --values or --range".into())),
            };
            let spec = SweepSpec::new(var, vals, engine, protocol)?;
            let rows = cmd_sweep(&scn, &spec, run.trials, run.seed, run.source)?;
            writeln!(log, "{} rows over {} = {:?}", rows.len(), var.as_str(), spec.values)?;
            write_csv(&rows, csv_out)
        }
        Command::OptimizeTau { engine, start, stop, step, .. } => {
            let run = Run::new(&common, env_seed)?;
            let tau = scn.config().tau_total_s;
            let g = grid(
                start.unwrap_or(0.1 * tau),
                stop.unwrap_or(0.9 * tau),
                step.unwrap_or(0.05 * tau),
            )?;
            let rows = cmd_optimize_tau(&scn, &g, engine, run.trials, run.seed)?;
            for r in rows.iter().filter(|r| r.is_best) {
                writeln!(log, "{}: best tau_phase1_s = {:.6e} (eta = {:.6})", r.engine, r.tau_phase1_s, r.eta)?;
            }
            write_csv(&rows, csv_out)
        }
        Command::DistK { .. } => {
            let run = Run::new(&common, env_seed)?;
            let (rows, d) = cmd_dist_k(&scn, run.trials, run.seed, run.source)?;
            let analytic = crate::analytic::phase1_expected(&scn)?;
            writeln!(
                log,
                "mean = {:.4} (std err {}), mode = {}, analytic mean = {:.4}",
                d.mean,
                fmt_opt(d.std_err),
                d.mode(),
                analytic
            )?;
            write_csv(&rows, csv_out)
        }
    }
}

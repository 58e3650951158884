//! Scenario parameters, unit conversions and SINR thresholds.
//!
//! A [`ScenarioConfig`] is plain data as read from a config file. Running
//! [`validate`] on it yields a [`Scenario`], which is immutable, carries
//! the linear-unit values and the decode thresholds, and is what every
//! other module consumes.

use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Largest admissible D/(τ·B); beyond it 2^{D/(τB)} is astronomically large.
pub const MAX_SPECTRAL_EFFICIENCY: f64 = 1024.0;

/// Every parameter of the two-phase delivery scenario.
///
/// Field names double as the config-file keys. Units are in the suffix:
/// `_m` metres, `_hz` hertz, `_s` seconds, `_db` decibels, `_dbm` dBm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScenarioConfig {
    pub n_uavs: usize,
    pub m_available: usize,
    pub m_occupied: usize,
    pub coverage_radius_m: f64,
    pub swarm_radius_m: f64,
    pub swarm_altitude_m: f64,
    pub min_separation_m: f64,
    pub pathloss_exp_cell: f64,
    pub pathloss_exp_d2d: f64,
    pub rician_k: f64,
    pub ref_gain_cell_db: f64,
    pub ref_gain_d2d_db: f64,
    pub tx_power_gbs_dbm: f64,
    pub tx_power_uav_dbm: f64,
    pub bandwidth_cell_hz: f64,
    pub bandwidth_d2d_hz: f64,
    pub sinr_gap_cell: f64,
    pub sinr_gap_d2d: f64,
    /// Phase-I receiver noise. Only the simulator uses it.
    pub noise_phase1_dbm: f64,
    pub intf_noise_phase2_dbm: f64,
    pub message_bits: f64,
    pub tau_total_s: f64,
    pub tau_phase1_s: f64,
}

impl Default for ScenarioConfig {
    /// The reference setup: 40 UAVs at 300 m over a 900 m cell with eight
    /// available and eight occupied base stations, 40-bit message, 1 ms
    /// split evenly between the two phases.
    fn default() -> Self {
        Self {
            n_uavs: 40,
            m_available: 8,
            m_occupied: 8,
            coverage_radius_m: 900.0,
            swarm_radius_m: 30.0,
            swarm_altitude_m: 300.0,
            min_separation_m: 5.0,
            pathloss_exp_cell: 2.0,
            pathloss_exp_d2d: 2.0,
            rician_k: 4.0,
            ref_gain_cell_db: -40.0,
            ref_gain_d2d_db: -40.0,
            tx_power_gbs_dbm: 43.0,
            tx_power_uav_dbm: 23.0,
            bandwidth_cell_hz: 200e3,
            bandwidth_d2d_hz: 200e3,
            sinr_gap_cell: 5.0 / 6.0,
            sinr_gap_d2d: 5.0 / 6.0,
            noise_phase1_dbm: -100.0,
            intf_noise_phase2_dbm: -40.0,
            message_bits: 40.0,
            tau_total_s: 1e-3,
            tau_phase1_s: 0.5e-3,
        }
    }
}

/// Config keys, in file order.
pub const FIELD_NAMES: [&str; 23] = [
    "n_uavs",
    "m_available",
    "m_occupied",
    "coverage_radius_m",
    "swarm_radius_m",
    "swarm_altitude_m",
    "min_separation_m",
    "pathloss_exp_cell",
    "pathloss_exp_d2d",
    "rician_k",
    "ref_gain_cell_db",
    "ref_gain_d2d_db",
    "tx_power_gbs_dbm",
    "tx_power_uav_dbm",
    "bandwidth_cell_hz",
    "bandwidth_d2d_hz",
    "sinr_gap_cell",
    "sinr_gap_d2d",
    "noise_phase1_dbm",
    "intf_noise_phase2_dbm",
    "message_bits",
    "tau_total_s",
    "tau_phase1_s",
];

impl ScenarioConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.message().to_string()))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("flat struct of numbers always serializes")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::Io(format!("{}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Sets one field by its config key. Count fields accept only
    /// non-negative integral values.
    pub fn set_field(&mut self, name: &str, value: f64) -> Result<(), ConfigError> {
        let count = |v: f64| -> Result<usize, ConfigError> {
            if v >= 0.0 && v.fract() == 0.0 && v <= u32::MAX as f64 {
                Ok(v as usize)
            } else {
                Err(ConfigError::Invalid(vec![FieldViolation::new(
                    field_static(name),
                    format!("expected a non-negative integer, got {v}"),
                )]))
            }
        };
        match name {
            "n_uavs" => self.n_uavs = count(value)?,
            "m_available" => self.m_available = count(value)?,
            "m_occupied" => self.m_occupied = count(value)?,
            "coverage_radius_m" => self.coverage_radius_m = value,
            "swarm_radius_m" => self.swarm_radius_m = value,
            "swarm_altitude_m" => self.swarm_altitude_m = value,
            "min_separation_m" => self.min_separation_m = value,
            "pathloss_exp_cell" => self.pathloss_exp_cell = value,
            "pathloss_exp_d2d" => self.pathloss_exp_d2d = value,
            "rician_k" => self.rician_k = value,
            "ref_gain_cell_db" => self.ref_gain_cell_db = value,
            "ref_gain_d2d_db" => self.ref_gain_d2d_db = value,
            "tx_power_gbs_dbm" => self.tx_power_gbs_dbm = value,
            "tx_power_uav_dbm" => self.tx_power_uav_dbm = value,
            "bandwidth_cell_hz" => self.bandwidth_cell_hz = value,
            "bandwidth_d2d_hz" => self.bandwidth_d2d_hz = value,
            "sinr_gap_cell" => self.sinr_gap_cell = value,
            "sinr_gap_d2d" => self.sinr_gap_d2d = value,
            "noise_phase1_dbm" => self.noise_phase1_dbm = value,
            "intf_noise_phase2_dbm" => self.intf_noise_phase2_dbm = value,
            "message_bits" => self.message_bits = value,
            "tau_total_s" => self.tau_total_s = value,
            "tau_phase1_s" => self.tau_phase1_s = value,
            other => return Err(ConfigError::UnknownField(other.to_string())),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<Scenario, ConfigError> {
        validate(self.clone())
    }
}

fn field_static(name: &str) -> &'static str {
    FIELD_NAMES
        .iter()
        .copied()
        .find(|f| *f == name)
        .unwrap_or("<unknown>")
}

/// One violated invariant.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldViolation {
    pub field: &'static str,
    pub reason: String,
}

impl FieldViolation {
    fn new(field: &'static str, reason: impl Into<String>) -> Self {
        Self {
            field,
            reason: reason.into(),
        }
    }
}

impl fmt::Display for FieldViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.reason)
    }
}

struct Violations<'a>(&'a [FieldViolation]);

impl fmt::Display for Violations<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("invalid scenario: {}", Violations(.0))]
    Invalid(Vec<FieldViolation>),
    #[error(
        "hard-core packing infeasible: {n_uavs} UAVs with separation {min_separation_m} m do not fit in a {swarm_radius_m} m swarm disk"
    )]
    PackingInfeasible {
        n_uavs: usize,
        min_separation_m: f64,
        swarm_radius_m: f64,
    },
    #[error("unknown config key `{0}`")]
    UnknownField(String),
    #[error("config parse error: {0}")]
    Parse(String),
    #[error("config read error: {0}")]
    Io(String),
}

impl ConfigError {
    /// Field names named by this error, if any.
    pub fn fields(&self) -> Vec<&'static str> {
        match self {
            ConfigError::Invalid(v) => v.iter().map(|v| v.field).collect(),
            ConfigError::PackingInfeasible { .. } => {
                vec!["n_uavs", "min_separation_m", "swarm_radius_m"]
            }
            _ => Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ThresholdError {
    #[error("invalid threshold input: {0}")]
    InvalidInput(String),
    #[error("D/(τB) = {0} exceeds {MAX_SPECTRAL_EFFICIENCY}; threshold would overflow")]
    Overflow(f64),
}

/// SINR needed to push `bits` through `duration_s` of `bandwidth_hz` with
/// modulation/coding gap `gap`: (2^{D/(τB)} − 1)/ρ.
pub fn sinr_threshold(bits: f64, duration_s: f64, bandwidth_hz: f64, gap: f64) -> Result<f64, ThresholdError> {
    if !(bits >= 0.0) || !bits.is_finite() {
        return Err(ThresholdError::InvalidInput(format!("bits must be >= 0, got {bits}")));
    }
    if !(duration_s > 0.0) || !(bandwidth_hz > 0.0) {
        return Err(ThresholdError::InvalidInput(format!(
            "duration and bandwidth must be positive, got {duration_s} s, {bandwidth_hz} Hz"
        )));
    }
    if !(gap > 0.0 && gap <= 1.0) {
        return Err(ThresholdError::InvalidInput(format!("gap must be in (0, 1], got {gap}")));
    }
    let efficiency = bits / (duration_s * bandwidth_hz);
    if efficiency > MAX_SPECTRAL_EFFICIENCY {
        return Err(ThresholdError::Overflow(efficiency));
    }
    Ok((efficiency * std::f64::consts::LN_2).exp_m1() / gap)
}

/// Message size that makes `sinr_threshold` return `theta`.
pub fn bits_for_threshold(theta: f64, duration_s: f64, bandwidth_hz: f64, gap: f64) -> f64 {
    duration_s * bandwidth_hz * (gap * theta).ln_1p() / std::f64::consts::LN_2
}

pub fn dbm_to_watts(dbm: f64) -> f64 {
    10f64.powf(dbm / 10.0) * 1e-3
}

pub fn watts_to_dbm(watts: f64) -> f64 {
    10.0 * (watts * 1e3).log10()
}

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Powers and gains converted once to linear units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearParams {
    pub ref_gain_cell: f64,
    pub ref_gain_d2d: f64,
    pub tx_power_gbs_w: f64,
    pub tx_power_uav_w: f64,
    pub noise_phase1_w: f64,
    pub intf_noise_phase2_w: f64,
}

/// Decode thresholds (linear SINR) for every phase layout the protocols use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    /// Cellular stage lasting τ^(I).
    pub phase1: f64,
    /// D2D stage lasting τ − τ^(I).
    pub phase2: f64,
    /// Cellular transmission over the whole τ (single-phase benchmarks).
    pub cell_full: f64,
    /// D2D round of length τ (multi-round relaying).
    pub d2d_full: f64,
}

/// A validated, immutable scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    config: ScenarioConfig,
    linear: LinearParams,
    thresholds: Thresholds,
}

impl Scenario {
    pub fn config(&self) -> &ScenarioConfig {
        &self.config
    }

    pub fn linear(&self) -> &LinearParams {
        &self.linear
    }

    pub fn thresholds(&self) -> &Thresholds {
        &self.thresholds
    }

    pub fn tau_phase2_s(&self) -> f64 {
        self.config.tau_total_s - self.config.tau_phase1_s
    }

    pub fn n_uavs(&self) -> usize {
        self.config.n_uavs
    }

    /// Farthest possible GBS-to-swarm-centre distance, √(R² + H²).
    pub fn max_center_distance(&self) -> f64 {
        self.config.coverage_radius_m.hypot(self.config.swarm_altitude_m)
    }

    /// Rebuilds a validated scenario with one field replaced.
    pub fn with_field(&self, name: &str, value: f64) -> Result<Scenario, ConfigError> {
        let mut cfg = self.config.clone();
        cfg.set_field(name, value)?;
        validate(cfg)
    }
}

impl Default for Scenario {
    fn default() -> Self {
        validate(ScenarioConfig::default()).expect("default scenario is valid")
    }
}

/// Checks every invariant and fills the linear-unit cache.
pub fn validate(config: ScenarioConfig) -> Result<Scenario, ConfigError> {
    let c = &config;
    let mut bad = Vec::new();
    let mut check = |ok: bool, field: &'static str, reason: String| {
        if !ok {
            bad.push(FieldViolation::new(field, reason));
        }
    };

    check(c.n_uavs >= 1, "n_uavs", format!("need at least one UAV, got {}", c.n_uavs));
    check(
        c.m_available >= 1,
        "m_available",
        format!("need at least one available GBS, got {}", c.m_available),
    );
    for (field, v) in [
        ("coverage_radius_m", c.coverage_radius_m),
        ("swarm_radius_m", c.swarm_radius_m),
        ("swarm_altitude_m", c.swarm_altitude_m),
        ("min_separation_m", c.min_separation_m),
        ("bandwidth_cell_hz", c.bandwidth_cell_hz),
        ("bandwidth_d2d_hz", c.bandwidth_d2d_hz),
        ("tau_total_s", c.tau_total_s),
    ] {
        check(v > 0.0 && v.is_finite(), field, format!("must be positive and finite, got {v}"));
    }
    check(
        c.min_separation_m < 2.0 * c.swarm_radius_m,
        "min_separation_m",
        format!(
            "must be below the swarm diameter {} m, got {}",
            2.0 * c.swarm_radius_m,
            c.min_separation_m
        ),
    );
    for (field, v) in [
        ("pathloss_exp_cell", c.pathloss_exp_cell),
        ("pathloss_exp_d2d", c.pathloss_exp_d2d),
    ] {
        check(v >= 2.0 && v.is_finite(), field, format!("must be >= 2, got {v}"));
    }
    check(
        c.rician_k >= 0.0 && c.rician_k.is_finite(),
        "rician_k",
        format!("must be >= 0, got {}", c.rician_k),
    );
    for (field, v) in [
        ("ref_gain_cell_db", c.ref_gain_cell_db),
        ("ref_gain_d2d_db", c.ref_gain_d2d_db),
        ("tx_power_gbs_dbm", c.tx_power_gbs_dbm),
        ("tx_power_uav_dbm", c.tx_power_uav_dbm),
        ("noise_phase1_dbm", c.noise_phase1_dbm),
        ("intf_noise_phase2_dbm", c.intf_noise_phase2_dbm),
    ] {
        check(v.is_finite(), field, format!("must be finite, got {v}"));
    }
    for (field, v) in [("sinr_gap_cell", c.sinr_gap_cell), ("sinr_gap_d2d", c.sinr_gap_d2d)] {
        check(v > 0.0 && v <= 1.0, field, format!("must lie in (0, 1], got {v}"));
    }
    check(
        c.message_bits >= 0.0 && c.message_bits.is_finite(),
        "message_bits",
        format!("must be >= 0, got {}", c.message_bits),
    );
    check(
        c.tau_phase1_s > 0.0 && c.tau_phase1_s < c.tau_total_s,
        "tau_phase1_s",
        format!(
            "must satisfy 0 < tau_phase1_s < tau_total_s = {}, got {}",
            c.tau_total_s, c.tau_phase1_s
        ),
    );
    if !bad.is_empty() {
        return Err(ConfigError::Invalid(bad));
    }

    let tau2 = c.tau_total_s - c.tau_phase1_s;
    let thresholds = [
        sinr_threshold(c.message_bits, c.tau_phase1_s, c.bandwidth_cell_hz, c.sinr_gap_cell),
        sinr_threshold(c.message_bits, tau2, c.bandwidth_d2d_hz, c.sinr_gap_d2d),
        sinr_threshold(c.message_bits, c.tau_total_s, c.bandwidth_cell_hz, c.sinr_gap_cell),
        sinr_threshold(c.message_bits, c.tau_total_s, c.bandwidth_d2d_hz, c.sinr_gap_d2d),
    ];
    let mut values = [0.0; 4];
    for (slot, t) in values.iter_mut().zip(thresholds) {
        match t {
            Ok(v) => *slot = v,
            Err(e) => {
                return Err(ConfigError::Invalid(vec![FieldViolation::new(
                    "message_bits",
                    e.to_string(),
                )]))
            }
        }
    }

    let half_sep = 0.5 * c.min_separation_m;
    if c.n_uavs as f64 * half_sep * half_sep > c.swarm_radius_m * c.swarm_radius_m {
        return Err(ConfigError::PackingInfeasible {
            n_uavs: c.n_uavs,
            min_separation_m: c.min_separation_m,
            swarm_radius_m: c.swarm_radius_m,
        });
    }

    let linear = LinearParams {
        ref_gain_cell: db_to_linear(c.ref_gain_cell_db),
        ref_gain_d2d: db_to_linear(c.ref_gain_d2d_db),
        tx_power_gbs_w: dbm_to_watts(c.tx_power_gbs_dbm),
        tx_power_uav_w: dbm_to_watts(c.tx_power_uav_dbm),
        noise_phase1_w: dbm_to_watts(c.noise_phase1_dbm),
        intf_noise_phase2_w: dbm_to_watts(c.intf_noise_phase2_dbm),
    };
    Ok(Scenario {
        config,
        linear,
        thresholds: Thresholds {
            phase1: values[0],
            phase2: values[1],
            cell_full: values[2],
            d2d_full: values[3],
        },
    })
}

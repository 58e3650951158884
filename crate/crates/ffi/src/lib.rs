//! C ABI over the reliability toolkit.
//!
//! Every function returns a `UavrStatus`; results go through out-pointers.
//! On failure a description is kept per thread and can be read with
//! `uavr_last_error_message`. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use uav_relay::analytic::{AnalyticModel, Regime};
use uav_relay::mc::{self, ProtocolKind};
use uav_relay::scenario::{sinr_threshold, ScenarioConfig};
use uav_relay::{Error, Scenario};

/// Opaque, validated scenario.
pub struct UavrScenario {
    inner: Scenario,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UavrStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numerical = 4,
    Placement = 5,
    BufferTooSmall = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UavrAnalysis {
    pub theta_phase1: f64,
    pub theta_phase2: f64,
    pub p_head: f64,
    pub p_member: f64,
    pub expected_phase1: f64,
    pub k_effective: f64,
    pub p_phase2: f64,
    pub eta: f64,
    /// Nonzero when fewer than one phase-I decoder is expected.
    pub out_of_regime: i32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct UavrEstimate {
    pub eta_mean: f64,
    /// NaN for a single trial.
    pub std_err: f64,
    pub phase1_mean: f64,
    pub trials: u64,
    pub seed: u64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn fail(status: UavrStatus, msg: impl Into<String>) -> UavrStatus {
    set_error(msg);
    status
}

fn from_error(e: Error) -> UavrStatus {
    let status = match &e {
        Error::Config(_) => UavrStatus::Config,
        Error::Analytic(_) => UavrStatus::Numerical,
        Error::Placement(_) => UavrStatus::Placement,
        Error::Usage(_) | Error::Io(_) | Error::Csv(_) => UavrStatus::InvalidArgument,
    };
    fail(status, e.to_string())
}

fn guard(f: impl FnOnce() -> UavrStatus) -> UavrStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(UavrStatus::Panic, "internal panic"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, UavrStatus> {
    if p.is_null() {
        return Err(fail(UavrStatus::NullPointer, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| fail(UavrStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

macro_rules! non_null {
    ($($p:ident),+) => {
        $(if $p.is_null() {
            return fail(UavrStatus::NullPointer, concat!(stringify!($p), " is null"));
        })+
    };
}

/// Message for the last failed call on this thread, or null after a
/// success. Valid until the next call on the same thread.
#[no_mangle]
pub extern "C" fn uavr_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Reference scenario. Free with `uavr_scenario_free`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uavr_scenario_default(out: *mut *mut UavrScenario) -> UavrStatus {
    guard(|| {
        non_null!(out);
        *out = Box::into_raw(Box::new(UavrScenario { inner: Scenario::default() }));
        UavrStatus::Ok
    })
}

/// Parses and validates a TOML scenario. Absent keys take reference values.
///
/// # Safety
/// `toml` must be a NUL-terminated string; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uavr_scenario_from_toml(toml: *const c_char, out: *mut *mut UavrScenario) -> UavrStatus {
    guard(|| {
        non_null!(out);
        let text = match str_arg(toml, "toml") {
            Ok(t) => t,
            Err(s) => return s,
        };
        match ScenarioConfig::from_toml_str(text).and_then(|c| c.validate()) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(UavrScenario { inner }));
                UavrStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// # Safety
/// `scn` must be null or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn uavr_scenario_free(scn: *mut UavrScenario) {
    if !scn.is_null() {
        drop(Box::from_raw(scn));
    }
}

/// Sets one field by config key and revalidates. On failure the handle is
/// left unchanged.
///
/// # Safety
/// `scn` must be a live handle; `key` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn uavr_scenario_set(scn: *mut UavrScenario, key: *const c_char, value: f64) -> UavrStatus {
    guard(|| {
        non_null!(scn);
        let key = match str_arg(key, "key") {
            Ok(k) => k,
            Err(s) => return s,
        };
        match (*scn).inner.with_field(key, value) {
            Ok(next) => {
                (*scn).inner = next;
                UavrStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Closed-form reliability.
///
/// # Safety
/// `scn` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uavr_analyze(scn: *const UavrScenario, out: *mut UavrAnalysis) -> UavrStatus {
    guard(|| {
        non_null!(scn, out);
        match AnalyticModel::new(&(*scn).inner).and_then(|m| m.reliability()) {
            Ok(b) => {
                *out = UavrAnalysis {
                    theta_phase1: b.theta_phase1,
                    theta_phase2: b.theta_phase2,
                    p_head: b.p_head,
                    p_member: b.p_member,
                    expected_phase1: b.expected_phase1,
                    k_effective: b.k_effective,
                    p_phase2: b.p_phase2,
                    eta: b.eta,
                    out_of_regime: i32::from(b.regime == Regime::OutOfRegime),
                };
                UavrStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Monte Carlo reliability. `protocol` uses the CLI spelling, e.g.
/// `"proposed"`, `"all-gbs"` or `"multi-round:4:no-head"`.
///
/// # Safety
/// `scn` must be a live handle; `protocol` a NUL-terminated string; `out`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uavr_simulate(
    scn: *const UavrScenario,
    protocol: *const c_char,
    trials: u64,
    seed: u64,
    out: *mut UavrEstimate,
) -> UavrStatus {
    guard(|| {
        non_null!(scn, out);
        let protocol: ProtocolKind = match str_arg(protocol, "protocol").map(str::parse) {
            Ok(Ok(p)) => p,
            Ok(Err(e)) => return fail(UavrStatus::InvalidArgument, e.to_string()),
            Err(s) => return s,
        };
        match mc::estimate(&(*scn).inner, protocol, trials as usize, seed) {
            Ok(e) => {
                *out = UavrEstimate {
                    eta_mean: e.eta_mean,
                    std_err: e.std_err.unwrap_or(f64::NAN),
                    phase1_mean: e.phase1_mean,
                    trials: e.trials as u64,
                    seed: e.seed,
                };
                UavrStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Empirical mass function of the phase-I decoder count, written to
/// `pmf[0..=n_uavs]`. `len` must be at least `n_uavs + 1`; `*written`
/// receives the number of entries used.
///
/// # Safety
/// `scn` must be a live handle; `pmf` valid for `len` writes; `written`
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uavr_phase1_distribution(
    scn: *const UavrScenario,
    trials: u64,
    seed: u64,
    pmf: *mut f64,
    len: usize,
    written: *mut usize,
) -> UavrStatus {
    guard(|| {
        non_null!(scn, pmf, written);
        let need = (*scn).inner.n_uavs() + 1;
        if len < need {
            return fail(UavrStatus::BufferTooSmall, format!("buffer holds {len} entries, need {need}"));
        }
        match mc::phase1_count_distribution(&(*scn).inner, trials as usize, seed) {
            Ok(d) => {
                ptr::copy_nonoverlapping(d.pmf.as_ptr(), pmf, need);
                *written = need;
                UavrStatus::Ok
            }
            Err(e) => from_error(e.into()),
        }
    })
}

/// Decode threshold for `bits` in `duration_s` over `bandwidth_hz`.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uavr_sinr_threshold(
    bits: f64,
    duration_s: f64,
    bandwidth_hz: f64,
    gap: f64,
    out: *mut f64,
) -> UavrStatus {
    guard(|| {
        non_null!(out);
        match sinr_threshold(bits, duration_s, bandwidth_hz, gap) {
            Ok(t) => {
                *out = t;
                UavrStatus::Ok
            }
            Err(e) => fail(UavrStatus::InvalidArgument, e.to_string()),
        }
    })
}

/// Copies the handle. Free the copy separately.
///
/// # Safety
/// `scn` must be a live handle; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn uavr_scenario_clone(scn: *const UavrScenario, out: *mut *mut UavrScenario) -> UavrStatus {
    guard(|| {
        non_null!(scn, out);
        *out = Box::into_raw(Box::new(UavrScenario { inner: (*scn).inner.clone() }));
        UavrStatus::Ok
    })
}

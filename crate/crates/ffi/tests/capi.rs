use std::ffi::{CStr, CString};
use std::ptr;

use uav_relay_ffi::*;

fn last_error() -> Option<String> {
    let p = uavr_last_error_message();
    (!p.is_null()).then(|| unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned())
}

struct Handle(*mut UavrScenario);

impl Handle {
    fn default() -> Self {
        let mut p = ptr::null_mut();
        assert_eq!(unsafe { uavr_scenario_default(&mut p) }, UavrStatus::Ok);
        Handle(p)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { uavr_scenario_free(self.0) }
    }
}

#[test]
fn analyze_matches_library() {
    let h = Handle::default();
    let mut a = UavrAnalysis::default();
    assert_eq!(unsafe { uavr_analyze(h.0, &mut a) }, UavrStatus::Ok);
    let lib = uav_relay::analytic::reliability(&uav_relay::Scenario::default()).unwrap();
    assert_eq!(a.eta.to_bits(), lib.eta.to_bits());
    assert_eq!(a.out_of_regime, 0);
    assert!(last_error().is_none());
}

#[test]
fn set_rejects_bad_value_and_keeps_handle() {
    let h = Handle::default();
    let key = CString::new("n_uavs").unwrap();
    assert_eq!(unsafe { uavr_scenario_set(h.0, key.as_ptr(), -1.0) }, UavrStatus::Config);
    assert!(last_error().unwrap().contains("n_uavs"));
    let bogus = CString::new("bogus").unwrap();
    assert_eq!(unsafe { uavr_scenario_set(h.0, bogus.as_ptr(), 1.0) }, UavrStatus::Config);
    let mut a = UavrAnalysis::default();
    assert_eq!(unsafe { uavr_analyze(h.0, &mut a) }, UavrStatus::Ok);
    assert!((a.eta - 0.99254).abs() < 2e-4);

    let bits = CString::new("message_bits").unwrap();
    assert_eq!(unsafe { uavr_scenario_set(h.0, bits.as_ptr(), 500.0) }, UavrStatus::Ok);
    assert_eq!(unsafe { uavr_analyze(h.0, &mut a) }, UavrStatus::Ok);
    assert_eq!(a.out_of_regime, 1);
}

#[test]
fn from_toml_and_errors() {
    let mut p = ptr::null_mut();
    let good = CString::new("n_uavs = 12\nmessage_bits = 16.0\n").unwrap();
    assert_eq!(unsafe { uavr_scenario_from_toml(good.as_ptr(), &mut p) }, UavrStatus::Ok);
    let h = Handle(p);
    let mut e = UavrEstimate::default();
    let proto = CString::new("proposed").unwrap();
    assert_eq!(unsafe { uavr_simulate(h.0, proto.as_ptr(), 1, 3, &mut e) }, UavrStatus::Ok);
    assert!(e.std_err.is_nan());
    assert_eq!((e.trials, e.seed), (1, 3));

    let bad = CString::new("n_uavs = 'x'").unwrap();
    let mut q = ptr::null_mut();
    assert_eq!(unsafe { uavr_scenario_from_toml(bad.as_ptr(), &mut q) }, UavrStatus::Config);
    assert!(q.is_null());
    assert_eq!(unsafe { uavr_scenario_from_toml(ptr::null(), &mut q) }, UavrStatus::NullPointer);
}

#[test]
fn simulate_is_deterministic() {
    let h = Handle::default();
    let key = CString::new("n_uavs").unwrap();
    assert_eq!(unsafe { uavr_scenario_set(h.0, key.as_ptr(), 10.0) }, UavrStatus::Ok);
    let proto = CString::new("multi-round:3:no-head").unwrap();
    let (mut a, mut b) = (UavrEstimate::default(), UavrEstimate::default());
    unsafe {
        assert_eq!(uavr_simulate(h.0, proto.as_ptr(), 200, 8, &mut a), UavrStatus::Ok);
        assert_eq!(uavr_simulate(h.0, proto.as_ptr(), 200, 8, &mut b), UavrStatus::Ok);
    }
    assert_eq!(a.eta_mean.to_bits(), b.eta_mean.to_bits());
    let bad = CString::new("protocol-iv").unwrap();
    assert_eq!(unsafe { uavr_simulate(h.0, bad.as_ptr(), 10, 0, &mut a) }, UavrStatus::InvalidArgument);
    assert_eq!(unsafe { uavr_simulate(h.0, proto.as_ptr(), 0, 0, &mut a) }, UavrStatus::InvalidArgument);
}

#[test]
fn distribution_buffer_checks() {
    let h = Handle::default();
    let mut buf = [0.0f64; 41];
    let mut n = 0usize;
    let st = unsafe { uavr_phase1_distribution(h.0, 50, 1, buf.as_mut_ptr(), 40, &mut n) };
    assert_eq!(st, UavrStatus::BufferTooSmall);
    let st = unsafe { uavr_phase1_distribution(h.0, 50, 1, buf.as_mut_ptr(), buf.len(), &mut n) };
    assert_eq!(st, UavrStatus::Ok);
    assert_eq!(n, 41);
    assert!((buf.iter().sum::<f64>() - 1.0).abs() < 1e-12);
}

#[test]
fn threshold_and_null_pointers() {
    let mut t = 0.0;
    assert_eq!(unsafe { uavr_sinr_threshold(40.0, 0.5e-3, 200e3, 5.0 / 6.0, &mut t) }, UavrStatus::Ok);
    assert!((t - (2f64.powf(0.4) - 1.0) * 1.2).abs() < 1e-14);
    assert_eq!(unsafe { uavr_sinr_threshold(1e9, 1e-3, 1.0, 1.0, &mut t) }, UavrStatus::InvalidArgument);
    assert_eq!(unsafe { uavr_sinr_threshold(1.0, 1.0, 1.0, 1.0, ptr::null_mut()) }, UavrStatus::NullPointer);
    assert_eq!(unsafe { uavr_analyze(ptr::null(), ptr::null_mut()) }, UavrStatus::NullPointer);
    unsafe { uavr_scenario_free(ptr::null_mut()) };
}

#[test]
fn clone_is_independent() {
    let h = Handle::default();
    let mut p = ptr::null_mut();
    assert_eq!(unsafe { uavr_scenario_clone(h.0, &mut p) }, UavrStatus::Ok);
    let c = Handle(p);
    let key = CString::new("message_bits").unwrap();
    assert_eq!(unsafe { uavr_scenario_set(c.0, key.as_ptr(), 0.0) }, UavrStatus::Ok);
    let (mut a, mut b) = (UavrAnalysis::default(), UavrAnalysis::default());
    unsafe {
        uavr_analyze(h.0, &mut a);
        uavr_analyze(c.0, &mut b);
    }
    assert!(a.eta < 1.0);
    assert_eq!(b.eta, 1.0);
}

//! Reliability of two-phase control-message delivery to a UAV swarm:
//! a cellular downlink from ground base stations followed by D2D relaying
//! inside the swarm. Provides a Monte Carlo simulator and a closed-form
//! approximation that can be checked against each other.

// `!(x > 0.0)` is deliberate: it rejects NaN along with the bad range.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic;
pub mod cli;
pub mod error;
pub mod fading;
pub mod geometry;
pub mod mc;
pub mod scenario;
pub mod specfun;

pub use error::{Error, Result};
pub use scenario::{Scenario, ScenarioConfig};

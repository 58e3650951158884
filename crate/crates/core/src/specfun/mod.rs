//! Special functions used by the closed-form reliability model.
//!
//! Everything here is implemented directly in `f64`; no external numerics
//! crate is involved. Each function has an independent slow route (series,
//! closed form or quadrature) in the unit tests.

mod bessel;
mod gamma;
mod hypergeometric;
mod quad;
mod tricomi;

pub use bessel::{bessel_i0, bessel_i0e, bessel_i1, bessel_i1e};
pub use gamma::{
    gamma, log_gamma, lower_incomplete_gamma, regularized_gamma, regularized_gamma_upper,
};
pub use hypergeometric::{hyp1f1, hyp2f2, hyp_pfq, laguerre_half, laguerre_half_series};
pub use quad::{adaptive_quad, adaptive_quad_with, QuadTolerance};
pub use tricomi::{tricomi_u, tricomi_u_scaled};

use thiserror::Error;

/// Termination control for power series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    pub rel_tol: f64,
    pub max_terms: usize,
}

impl SeriesControl {
    pub fn new(rel_tol: f64, max_terms: usize) -> Result<Self, SpecfunError> {
        if !(rel_tol > 0.0) || max_terms < 10 {
            return Err(SpecfunError::Domain(format!(
                "series control needs rel_tol > 0 and max_terms >= 10 (got {rel_tol}, {max_terms})"
            )));
        }
        Ok(Self { rel_tol, max_terms })
    }
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            max_terms: 100_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpecfunError {
    #[error("shape parameter must be positive, got {0}")]
    NonPositiveShape(f64),
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("lower parameter {0} is a non-positive integer")]
    Pole(f64),
    #[error("series did not converge within {terms} terms (last partial sum {partial})")]
    SeriesNotConverged { terms: usize, partial: f64 },
    #[error("quadrature did not converge: estimate {estimate}, error bound {error} after {intervals} intervals")]
    QuadratureNotConverged {
        estimate: f64,
        error: f64,
        intervals: usize,
    },
}

//! Closed-form reliability approximation.
//!
//! The aggregate cellular signal, the occupied-GBS interference and the
//! members' path-loss sum are each replaced by a two-moment Gamma or
//! inverse-Gamma surrogate. The D2D aggregate is handled the same way,
//! with the relay count K set to the expected number of phase-I decoders.

use thiserror::Error;

use crate::fading::rician_moments;
use crate::geometry::PairDistanceDensity;
use crate::scenario::Scenario;
use crate::specfun::{
    adaptive_quad_with, hyp2f2, log_gamma, regularized_gamma_upper, tricomi_u_scaled, QuadTolerance,
    SeriesControl, SpecfunError,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnalyticError {
    #[error("moment fit needs positive mean and variance, got mean {mean}, variance {variance}")]
    Fit { mean: f64, variance: f64 },
    #[error("relay count must be positive, got {0}")]
    RelayCount(f64),
    #[error("threshold must be non-negative, got {0}")]
    Threshold(f64),
    #[error(transparent)]
    Special(#[from] SpecfunError),
}

/// First two central moments.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
}

impl Moments {
    pub fn scaled(self, k: f64) -> Moments {
        Moments {
            mean: k * self.mean,
            variance: k * self.variance,
        }
    }
}

/// Gamma with shape `a` and rate `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaFit {
    pub a: f64,
    pub b: f64,
}

impl GammaFit {
    pub fn mean(&self) -> f64 {
        self.a / self.b
    }

    pub fn variance(&self) -> f64 {
        self.a / (self.b * self.b)
    }
}

/// Inverse Gamma with shape `a` and scale `b`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InvGammaFit {
    pub a: f64,
    pub b: f64,
}

impl InvGammaFit {
    pub fn mean(&self) -> f64 {
        self.b / (self.a - 1.0)
    }

    pub fn variance(&self) -> f64 {
        let am1 = self.a - 1.0;
        self.b * self.b / (am1 * am1 * (self.a - 2.0))
    }
}

fn check_moments(mean: f64, variance: f64) -> Result<(), AnalyticError> {
    if mean > 0.0 && variance > 0.0 && mean.is_finite() && variance.is_finite() {
        Ok(())
    } else {
        Err(AnalyticError::Fit { mean, variance })
    }
}

pub fn gamma_fit(mean: f64, variance: f64) -> Result<GammaFit, AnalyticError> {
    check_moments(mean, variance)?;
    Ok(GammaFit {
        a: mean * mean / variance,
        b: mean / variance,
    })
}

pub fn inv_gamma_fit(mean: f64, variance: f64) -> Result<InvGammaFit, AnalyticError> {
    check_moments(mean, variance)?;
    let r = mean * mean / variance;
    Ok(InvGammaFit {
        a: r + 2.0,
        b: (r + 1.0) * mean,
    })
}

/// E[d^{−p}] for the GBS distance density 2u/R² on [H, √(R²+H²)].
pub fn mean_inverse_distance_power(p: f64, coverage_radius: f64, altitude: f64) -> f64 {
    let r2 = coverage_radius * coverage_radius;
    let u = coverage_radius.hypot(altitude);
    if (p - 2.0).abs() < 1e-12 {
        2.0 * (u / altitude).ln() / r2
    } else {
        let e = 2.0 - p;
        2.0 * (u.powf(e) - altitude.powf(e)) / (r2 * e)
    }
}

fn inv_dist(scn: &Scenario, p: f64) -> f64 {
    let c = scn.config();
    mean_inverse_distance_power(p, c.coverage_radius_m, c.swarm_altitude_m)
}

/// Per-station moments of d^{−α/2}|h|.
pub fn moments_head_signal_term(scn: &Scenario) -> Moments {
    let alpha = scn.config().pathloss_exp_cell;
    let mean = inv_dist(scn, 0.5 * alpha) * rician_moments(scn.config().rician_k).mean;
    Moments {
        mean,
        variance: inv_dist(scn, alpha) - mean * mean,
    }
}

/// Moments of Σ_{available} d^{−α/2}|h|.
pub fn moments_head_signal(scn: &Scenario) -> Moments {
    moments_head_signal_term(scn).scaled(scn.config().m_available as f64)
}

/// Moments of Σ_{occupied} d^{−α}|h|².
pub fn moments_interference(scn: &Scenario) -> Moments {
    let c = scn.config();
    let mean = inv_dist(scn, c.pathloss_exp_cell);
    let term = Moments {
        mean,
        variance: inv_dist(scn, 2.0 * c.pathloss_exp_cell) * rician_moments(c.rician_k).fourth - mean * mean,
    };
    term.scaled(c.m_occupied as f64)
}

/// Moments of Σ_{available} d^{−α}.
pub fn moments_pathloss_sum(scn: &Scenario) -> Moments {
    let c = scn.config();
    let mean = inv_dist(scn, c.pathloss_exp_cell);
    let term = Moments {
        mean,
        variance: inv_dist(scn, 2.0 * c.pathloss_exp_cell) - mean * mean,
    };
    term.scaled(c.m_available as f64)
}

/// Per-relay moments of d̃^{−α̃} under the truncated pair-distance density.
pub fn d2d_relay_moments(scn: &Scenario) -> Result<Moments, AnalyticError> {
    let density = PairDistanceDensity::for_scenario(scn)?;
    let alpha = scn.config().pathloss_exp_d2d;
    let (lo, hi) = density.support();
    let tol = QuadTolerance::new(0.0, 1e-12);
    let m1 = adaptive_quad_with(|w| w.powf(-alpha) * density.pdf(w), lo, hi, tol)?;
    let m2 = adaptive_quad_with(|w| w.powf(-2.0 * alpha) * density.pdf(w), lo, hi, tol)?;
    Ok(Moments {
        mean: m1,
        variance: m2 - m1 * m1,
    })
}

/// Inverse-Gamma surrogate of the aggregate D2D path gain from K relays.
pub fn d2d_fit(k_effective: f64, scn: &Scenario) -> Result<InvGammaFit, AnalyticError> {
    if !(k_effective > 0.0) {
        return Err(AnalyticError::RelayCount(k_effective));
    }
    let m = d2d_relay_moments(scn)?.scaled(k_effective);
    inv_gamma_fit(m.mean, m.variance)
}

/// Numerical knobs of the closed-form evaluation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticOptions {
    /// Largest ₂F₂ argument for which the series route is attempted.
    pub hyp_arg_cap: f64,
    /// Largest tolerated magnitude of the two cancelling series terms.
    pub max_cancellation: f64,
    pub series: SeriesControl,
}

impl Default for AnalyticOptions {
    fn default() -> Self {
        Self {
            hyp_arg_cap: 500.0,
            max_cancellation: 1e4,
            series: SeriesControl::default(),
        }
    }
}

/// Route taken for the head decode probability.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HeadMethod {
    /// θ = 0 or no interferers.
    Trivial,
    ClosedForm,
    Quadrature,
}

impl HeadMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            HeadMethod::Trivial => "trivial",
            HeadMethod::ClosedForm => "closed_form",
            HeadMethod::Quadrature => "quadrature",
        }
    }
}

/// Both ₂F₂ terms of the head CDF, evaluated in log space.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeadClosedForm {
    /// P^(I-H) = 1 − (T₁ − T₂).
    pub value: f64,
    /// T₁ + T₂; large values mean heavy cancellation.
    pub magnitude: f64,
    /// ₂F₂ argument b̄²θ/(4b̲).
    pub argument: f64,
}

/// P(X̄² ≥ θ·X̲) with X̄ ~ Gamma(signal), X̲ ~ Gamma(interference), via the
/// ₂F₂ representation.
pub fn head_closed_form(
    theta: f64,
    signal: GammaFit,
    interference: GammaFit,
    ctl: SeriesControl,
) -> Result<HeadClosedForm, AnalyticError> {
    let (a, b, c, d) = (signal.a, signal.b, interference.a, interference.b);
    let x = b * b * theta / (4.0 * d);
    let ln_pre = 0.5 * a * (4.0 * x).ln() - log_gamma(a)? - log_gamma(c)?;
    let f1 = hyp2f2(0.5 * a + c, 0.5 * a, 0.5, 0.5 * a + 1.0, x, ctl)?;
    let f2 = hyp2f2(0.5 * a + c + 0.5, 0.5 * a + 0.5, 1.5, 0.5 * a + 1.5, x, ctl)?;
    let t1 = (ln_pre + log_gamma(0.5 * a + c)? - a.ln() + f1.ln()).exp();
    let t2 = (ln_pre + std::f64::consts::LN_2 + 0.5 * x.ln() + log_gamma(0.5 * a + c + 0.5)? - (a + 1.0).ln()
        + f2.ln())
    .exp();
    Ok(HeadClosedForm {
        value: 1.0 - (t1 - t2),
        magnitude: t1 + t2,
        argument: x,
    })
}

/// The same probability as E_y[Q(a, b√(θy/d))], y ~ Gamma(c, 1), by
/// one-dimensional quadrature; the inner CDF is exact.
pub fn head_quadrature(theta: f64, signal: GammaFit, interference: GammaFit) -> Result<f64, AnalyticError> {
    let (a, b, c, d) = (signal.a, signal.b, interference.a, interference.b);
    let s = b * (theta / d).sqrt();
    let tol = QuadTolerance::new(1e-14, 1e-11);
    let value = if c < 1.0 {
        // y = w^{1/c} absorbs the y^{c−1} singularity
        let inv = 1.0 / c;
        let lg = log_gamma(c + 1.0)?;
        let f = |w: f64| {
            let y = w.powf(inv);
            regularized_gamma_upper(a, s * y.sqrt()).unwrap_or(0.0) * (-y - lg).exp()
        };
        adaptive_quad_with(f, 0.0, 1.0, tol)? + adaptive_quad_with(f, 1.0, f64::INFINITY, tol)?
    } else {
        let lg = log_gamma(c)?;
        let f = |y: f64| {
            if y <= 0.0 {
                return if c == 1.0 { (-lg).exp() } else { 0.0 };
            }
            regularized_gamma_upper(a, s * y.sqrt()).unwrap_or(0.0) * ((c - 1.0) * y.ln() - y - lg).exp()
        };
        adaptive_quad_with(f, 0.0, c, tol)? + adaptive_quad_with(f, c, f64::INFINITY, tol)?
    };
    Ok(value.clamp(0.0, 1.0))
}

/// E_y[(b_Ȳ/(b_Ȳ + θy))^{a_Ȳ}], y ~ Gamma(interference), in Tricomi form.
pub fn member_closed_form(theta: f64, pathloss: InvGammaFit, interference: GammaFit) -> Result<f64, AnalyticError> {
    let z = interference.b * pathloss.b / theta;
    let v = tricomi_u_scaled(interference.a, 1.0 + interference.a - pathloss.a, z)?;
    Ok(v.clamp(0.0, 1.0))
}

/// Regime of the point-substitution formula for η.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// At least one UAV is expected to decode in phase I.
    LowSinr,
    /// E|Θ^(I)| < 1; the approximation is reported but not trusted.
    OutOfRegime,
}

impl Regime {
    pub fn as_str(&self) -> &'static str {
        match self {
            Regime::LowSinr => "low_sinr",
            Regime::OutOfRegime => "out_of_regime",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticBreakdown {
    pub theta_phase1: f64,
    pub theta_phase2: f64,
    pub p_head: f64,
    pub head_method: HeadMethod,
    pub p_member: f64,
    pub expected_phase1: f64,
    pub k_effective: f64,
    pub p_phase2: f64,
    pub eta: f64,
    pub regime: Regime,
}

/// Surrogate fits of one scenario, computed once and reused across θ.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalyticModel {
    scn: Scenario,
    pub options: AnalyticOptions,
    pub signal: GammaFit,
    /// `None` when no occupied stations interfere.
    pub interference: Option<GammaFit>,
    pub pathloss: InvGammaFit,
    pub relay: Moments,
}

impl AnalyticModel {
    pub fn new(scn: &Scenario) -> Result<Self, AnalyticError> {
        Self::with_options(scn, AnalyticOptions::default())
    }

    pub fn with_options(scn: &Scenario, options: AnalyticOptions) -> Result<Self, AnalyticError> {
        let s = moments_head_signal(scn);
        let signal = gamma_fit(s.mean, s.variance)?;
        let interference = if scn.config().m_occupied == 0 {
            None
        } else {
            let i = moments_interference(scn);
            Some(gamma_fit(i.mean, i.variance)?)
        };
        let p = moments_pathloss_sum(scn);
        let pathloss = inv_gamma_fit(p.mean, p.variance)?;
        Ok(Self {
            scn: scn.clone(),
            options,
            signal,
            interference,
            pathloss,
            relay: d2d_relay_moments(scn)?,
        })
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scn
    }

    pub fn head_decode_prob(&self, theta: f64) -> Result<f64, AnalyticError> {
        Ok(self.head_decode(theta)?.0)
    }

    /// Closed form when it is numerically safe, quadrature otherwise.
    pub fn head_decode(&self, theta: f64) -> Result<(f64, HeadMethod), AnalyticError> {
        if !(theta >= 0.0) {
            return Err(AnalyticError::Threshold(theta));
        }
        let intf = match self.interference {
            Some(f) if theta > 0.0 => f,
            _ => return Ok((1.0, HeadMethod::Trivial)),
        };
        if theta.is_infinite() {
            return Ok((0.0, HeadMethod::Trivial));
        }
        let x = self.signal.b * self.signal.b * theta / (4.0 * intf.b);
        if x <= self.options.hyp_arg_cap {
            if let Ok(cf) = head_closed_form(theta, self.signal, intf, self.options.series) {
                let tol = 1e-9;
                if cf.magnitude <= self.options.max_cancellation
                    && cf.value.is_finite()
                    && cf.value >= -tol
                    && cf.value <= 1.0 + tol
                {
                    return Ok((cf.value.clamp(0.0, 1.0), HeadMethod::ClosedForm));
                }
            }
        }
        Ok((head_quadrature(theta, self.signal, intf)?, HeadMethod::Quadrature))
    }

    pub fn member_decode_prob(&self, theta: f64) -> Result<f64, AnalyticError> {
        if !(theta >= 0.0) {
            return Err(AnalyticError::Threshold(theta));
        }
        match self.interference {
            Some(f) if theta > 0.0 => {
                if theta.is_infinite() {
                    return Ok(0.0);
                }
                member_closed_form(theta, self.pathloss, f)
            }
            _ => Ok(1.0),
        }
    }

    /// E|Θ^(I)| at threshold θ.
    pub fn phase1_expected(&self, theta: f64) -> Result<f64, AnalyticError> {
        let n = self.scn.n_uavs() as f64;
        Ok(self.head_decode_prob(theta)? + (n - 1.0) * self.member_decode_prob(theta)?)
    }

    pub fn d2d_fit(&self, k_effective: f64) -> Result<InvGammaFit, AnalyticError> {
        if !(k_effective > 0.0) {
            return Err(AnalyticError::RelayCount(k_effective));
        }
        let m = self.relay.scaled(k_effective);
        inv_gamma_fit(m.mean, m.variance)
    }

    /// Probability a non-decoder gets the message from K relays in phase II.
    pub fn phase2_decode_prob(&self, theta: f64, k_effective: f64) -> Result<f64, AnalyticError> {
        if !(theta >= 0.0) {
            return Err(AnalyticError::Threshold(theta));
        }
        let fit = self.d2d_fit(k_effective)?;
        let lin = self.scn.linear();
        let ratio = lin.intf_noise_phase2_w * theta / (lin.tx_power_uav_w * lin.ref_gain_d2d);
        Ok((-fit.a * (ratio / fit.b).ln_1p()).exp())
    }

    /// η with K = E|Θ^(I)| substituted into the phase-II formula.
    pub fn reliability(&self) -> Result<AnalyticBreakdown, AnalyticError> {
        let th = self.scn.thresholds();
        let n = self.scn.n_uavs() as f64;
        let (p_head, head_method) = self.head_decode(th.phase1)?;
        let p_member = self.member_decode_prob(th.phase1)?;
        let expected = (p_head + (n - 1.0) * p_member).clamp(0.0, n);
        let k = expected;
        let p_phase2 = if k > 0.0 {
            self.phase2_decode_prob(th.phase2, k)?
        } else {
            0.0
        };
        let eta = ((expected + (n - k) * p_phase2) / n).clamp(0.0, 1.0);
        Ok(AnalyticBreakdown {
            theta_phase1: th.phase1,
            theta_phase2: th.phase2,
            p_head,
            head_method,
            p_member,
            expected_phase1: expected,
            k_effective: k,
            p_phase2,
            eta,
            regime: if k < 1.0 { Regime::OutOfRegime } else { Regime::LowSinr },
        })
    }

    /// η averaged over a distribution of the phase-I decoder count:
    /// Σ_K p(K)·(K + (N−K)·P^(II)(K))/N. `k_pmf[K]` is P(|Θ^(I)| = K).
    pub fn reliability_mixture(&self, k_pmf: &[f64]) -> Result<f64, AnalyticError> {
        let n = self.scn.n_uavs() as f64;
        let theta = self.scn.thresholds().phase2;
        let mut eta = 0.0;
        for (k, &p) in k_pmf.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let kf = k as f64;
            let p2 = if k == 0 { 0.0 } else { self.phase2_decode_prob(theta, kf)? };
            eta += p * (kf + (n - kf) * p2) / n;
        }
        Ok(eta.clamp(0.0, 1.0))
    }
}

pub fn head_decode_prob(theta: f64, scn: &Scenario) -> Result<f64, AnalyticError> {
    AnalyticModel::new(scn)?.head_decode_prob(theta)
}

pub fn member_decode_prob(theta: f64, scn: &Scenario) -> Result<f64, AnalyticError> {
    AnalyticModel::new(scn)?.member_decode_prob(theta)
}

/// E|Θ^(I)| at the scenario's phase-I threshold.
pub fn phase1_expected(scn: &Scenario) -> Result<f64, AnalyticError> {
    AnalyticModel::new(scn)?.phase1_expected(scn.thresholds().phase1)
}

pub fn phase2_decode_prob(theta: f64, k_effective: f64, scn: &Scenario) -> Result<f64, AnalyticError> {
    AnalyticModel::new(scn)?.phase2_decode_prob(theta, k_effective)
}

pub fn reliability(scn: &Scenario) -> Result<AnalyticBreakdown, AnalyticError> {
    AnalyticModel::new(scn)?.reliability()
}

use super::gamma::ln_gamma_unchecked;
use super::quad::{adaptive_quad_with, QuadTolerance};
use super::SpecfunError;

const TOL: QuadTolerance = QuadTolerance {
    abs: 1e-15,
    rel: 1e-12,
    max_intervals: 20_000,
};

/// Tricomi's confluent hypergeometric function
///
/// Ψ(a, b; z) = (1/Γ(a)) ∫₀^∞ (1+t)^{b−a−1} t^{a−1} e^{−zt} dt,  a > 0, z > 0.
pub fn tricomi_u(a: f64, b: f64, z: f64) -> Result<f64, SpecfunError> {
    let scaled = tricomi_u_scaled(a, b, z)?;
    Ok(scaled * (-a * z.ln()).exp())
}

/// z^a · Ψ(a, b; z), which tends to 1 as z → ∞.
///
/// Evaluated after s = z·t so the exponential decay is independent of z:
/// (1/Γ(a)) ∫₀^∞ (1 + s/z)^{b−a−1} s^{a−1} e^{−s} ds.
pub fn tricomi_u_scaled(a: f64, b: f64, z: f64) -> Result<f64, SpecfunError> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(SpecfunError::NonPositiveShape(a));
    }
    if !(z > 0.0) || !b.is_finite() {
        return Err(SpecfunError::Domain(format!(
            "Tricomi function needs z > 0 and finite b (got b={b}, z={z})"
        )));
    }
    if z.is_infinite() {
        return Ok(1.0);
    }
    let power = b - a - 1.0;
    if a < 1.0 {
        // s = w^{1/a} removes the s^{a−1} endpoint singularity:
        // (1/Γ(a+1)) ∫₀^∞ (1 + w^{1/a}/z)^{b−a−1} e^{−w^{1/a}} dw
        let inv = 1.0 / a;
        let lg = ln_gamma_unchecked(a + 1.0);
        let f = |w: f64| {
            let s = w.powf(inv);
            (power * (s / z).ln_1p() - s - lg).exp()
        };
        let head = adaptive_quad_with(f, 0.0, 1.0, TOL)?;
        let tail = adaptive_quad_with(f, 1.0, f64::INFINITY, TOL)?;
        return Ok(head + tail);
    }
    let lg = ln_gamma_unchecked(a);
    let f = |s: f64| {
        if s <= 0.0 {
            return if a == 1.0 { (-lg).exp() } else { 0.0 };
        }
        ((a - 1.0) * s.ln() - s + power * (s / z).ln_1p() - lg).exp()
    };
    // split at the mode of the gamma kernel
    let split = (a - 1.0).max(1.0);
    let head = adaptive_quad_with(f, 0.0, split, TOL)?;
    let tail = adaptive_quad_with(f, split, f64::INFINITY, TOL)?;
    Ok(head + tail)
}

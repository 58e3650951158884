use super::bessel::{bessel_i0, bessel_i0e, bessel_i1, bessel_i1e};
use super::{SeriesControl, SpecfunError};

/// Generalized hypergeometric series ₚFₚ-style evaluation by direct
/// Pochhammer recurrence:
///
/// Σₙ Πᵢ(aᵢ)ₙ / Πⱼ(bⱼ)ₙ · zⁿ/n!
///
/// Only meant for `upper.len() <= lower.len() + 1` with |z| < 1 in the
/// latter case; the callers here use 1F1 and 2F2, which are entire.
pub fn hyp_pfq(upper: &[f64], lower: &[f64], z: f64, ctl: SeriesControl) -> Result<f64, SpecfunError> {
    for &b in lower {
        if b <= 0.0 && b.fract() == 0.0 {
            return Err(SpecfunError::Pole(b));
        }
    }
    if z == 0.0 {
        return Ok(1.0);
    }
    let mut term = 1.0_f64;
    let mut sum = 1.0_f64;
    // Compensation for the running sum (Kahan); the alternating series for
    // negative z loses less this way.
    let mut comp = 0.0_f64;
    for n in 0..ctl.max_terms {
        let nf = n as f64;
        let mut ratio = z / (nf + 1.0);
        for &a in upper {
            ratio *= a + nf;
        }
        for &b in lower {
            ratio /= b + nf;
        }
        term *= ratio;
        if term == 0.0 {
            return Ok(sum);
        }
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
        if !sum.is_finite() {
            return Err(SpecfunError::SeriesNotConverged {
                terms: n + 1,
                partial: sum,
            });
        }
        // Terms must be shrinking before the tail estimate is trusted.
        if ratio.abs() < 1.0 && term.abs() <= ctl.rel_tol * sum.abs() * (1.0 - ratio.abs()) {
            return Ok(sum);
        }
    }
    Err(SpecfunError::SeriesNotConverged {
        terms: ctl.max_terms,
        partial: sum,
    })
}

/// Kummer's confluent hypergeometric function ₁F₁(a; b; z).
///
/// Negative arguments go through Kummer's transformation
/// ₁F₁(a; b; z) = e^z ₁F₁(b − a; b; −z) unless the series terminates.
pub fn hyp1f1(a: f64, b: f64, z: f64, ctl: SeriesControl) -> Result<f64, SpecfunError> {
    let terminating = a <= 0.0 && a.fract() == 0.0;
    if z < 0.0 && !terminating && b > 0.0 && b - a > 0.0 {
        return Ok(z.exp() * hyp_pfq(&[b - a], &[b], -z, ctl)?);
    }
    hyp_pfq(&[a], &[b], z, ctl)
}

/// ₂F₂(a1, a2; b1, b2; z).
pub fn hyp2f2(a1: f64, a2: f64, b1: f64, b2: f64, z: f64, ctl: SeriesControl) -> Result<f64, SpecfunError> {
    hyp_pfq(&[a1, a2], &[b1, b2], z, ctl)
}

/// Laguerre function L_{1/2}(x) through its Bessel representation
///
/// L_{1/2}(x) = e^{x/2} [(1 − x) I₀(−x/2) − x I₁(−x/2)].
///
/// For x ≤ 0 the exponentially scaled Bessel functions are used so large
/// |x| does not overflow.
pub fn laguerre_half(x: f64) -> f64 {
    let y = -0.5 * x;
    if x <= 0.0 {
        (1.0 - x) * bessel_i0e(y) - x * bessel_i1e(y)
    } else {
        (0.5 * x).exp() * ((1.0 - x) * bessel_i0(y) - x * bessel_i1(y))
    }
}

/// L_{1/2}(x) = ₁F₁(−1/2; 1; x) by direct series. Cross-check route.
pub fn laguerre_half_series(x: f64) -> Result<f64, SpecfunError> {
    hyp1f1(-0.5, 1.0, x, SeriesControl::default())
}

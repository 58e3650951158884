//! Globally adaptive Gauss–Kronrod (7/15) quadrature.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use super::SpecfunError;

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the odd-indexed Kronrod nodes (and the centre).
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Absolute and relative error targets; the integral is accepted once the
/// estimated error is below `max(abs, rel · |I|)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadTolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
}

impl QuadTolerance {
    pub fn new(abs: f64, rel: f64) -> Self {
        Self {
            abs,
            rel,
            max_intervals: 20_000,
        }
    }
}

impl Default for QuadTolerance {
    fn default() -> Self {
        Self::new(1e-12, 1e-10)
    }
}

/// ∫_lo^hi f(t) dt with a single tolerance used both absolutely and
/// relatively. `hi` may be `f64::INFINITY`.
pub fn adaptive_quad<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64, tol: f64) -> Result<f64, SpecfunError> {
    adaptive_quad_with(f, lo, hi, QuadTolerance::new(tol, tol))
}

pub fn adaptive_quad_with<F: Fn(f64) -> f64>(
    f: F,
    lo: f64,
    hi: f64,
    tol: QuadTolerance,
) -> Result<f64, SpecfunError> {
    if lo.is_nan() || hi.is_nan() || lo.is_infinite() {
        return Err(SpecfunError::Domain(format!(
            "integration limits must be finite lower and finite or +inf upper (got {lo}, {hi})"
        )));
    }
    if hi == lo {
        return Ok(0.0);
    }
    if hi < lo {
        return Ok(-adaptive_quad_with(f, hi, lo, tol)?);
    }
    if hi.is_infinite() {
        // t = lo + u/(1−u), dt = du/(1−u)²
        let g = |u: f64| {
            let w = 1.0 - u;
            let v = f(lo + u / w) / (w * w);
            if v.is_finite() {
                v
            } else {
                0.0
            }
        };
        integrate(&g, 0.0, 1.0, tol)
    } else {
        integrate(&f, lo, hi, tol)
    }
}

#[derive(Debug)]
struct Segment {
    lo: f64,
    hi: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64) -> Segment {
    let centre = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = f(centre);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for j in 0..7 {
        let dx = half * XGK[j];
        let pair = f(centre - dx) + f(centre + dx);
        kronrod += WGK[j] * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    Segment {
        lo,
        hi,
        value: kronrod * half,
        error: ((kronrod - gauss) * half).abs(),
    }
}

fn integrate<F: Fn(f64) -> f64>(f: &F, lo: f64, hi: f64, tol: QuadTolerance) -> Result<f64, SpecfunError> {
    let first = gauss_kronrod(f, lo, hi);
    let mut total = first.value;
    let mut error = first.error;
    let mut heap = BinaryHeap::new();
    heap.push(first);
    while error > tol.abs.max(tol.rel * total.abs()) {
        if heap.len() >= tol.max_intervals {
            return Err(SpecfunError::QuadratureNotConverged {
                estimate: total,
                error,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap never empty");
        let mid = 0.5 * (worst.lo + worst.hi);
        if mid <= worst.lo || mid >= worst.hi {
            // interval cannot be split further in f64
            heap.push(Segment {
                error: 0.0,
                ..worst
            });
            error = heap.iter().map(|s| s.error).sum();
            if heap.iter().all(|s| s.error == 0.0) {
                break;
            }
            continue;
        }
        let left = gauss_kronrod(f, worst.lo, mid);
        let right = gauss_kronrod(f, mid, worst.hi);
        total += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
        if !total.is_finite() {
            return Err(SpecfunError::QuadratureNotConverged {
                estimate: total,
                error,
                intervals: heap.len(),
            });
        }
    }
    // Re-sum to drop the drift of the incremental updates.
    Ok(heap.iter().map(|s| s.value).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomial() {
        let v = adaptive_quad(|t| 3.0 * t * t, 0.0, 1.0, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-12);
    }

    #[test]
    fn exponential_tail() {
        let v = adaptive_quad(|t| (-t).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((v - 1.0).abs() < 1e-10);
    }

    #[test]
    fn gaussian_moment_tail() {
        let v = adaptive_quad(|t| t * (-t * t).exp(), 0.0, f64::INFINITY, 1e-12).unwrap();
        assert!((v - 0.5).abs() < 1e-10);
    }

    #[test]
    fn integrable_endpoint_singularity() {
        // ∫₀¹ t^{-1/2} dt = 2
        let v = adaptive_quad_with(|t| t.powf(-0.5), 0.0, 1.0, QuadTolerance::new(1e-10, 1e-10)).unwrap();
        assert!((v - 2.0).abs() < 1e-8);
    }

    #[test]
    fn reversed_and_empty_limits() {
        assert_eq!(adaptive_quad(|t| t, 2.0, 2.0, 1e-12).unwrap(), 0.0);
        let v = adaptive_quad(|t| t, 1.0, 0.0, 1e-12).unwrap();
        assert!((v + 0.5).abs() < 1e-14);
    }

    #[test]
    fn reports_non_convergence() {
        let tol = QuadTolerance {
            abs: 1e-14,
            rel: 1e-14,
            max_intervals: 3,
        };
        let r = adaptive_quad_with(|t| (50.0 * t).sin().abs(), 0.0, 10.0, tol);
        assert!(matches!(r, Err(SpecfunError::QuadratureNotConverged { .. })));
    }

    #[test]
    fn rejects_infinite_lower_limit() {
        assert!(adaptive_quad(|t| t, f64::NEG_INFINITY, 0.0, 1e-8).is_err());
    }
}

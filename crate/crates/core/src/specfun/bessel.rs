use std::f64::consts::PI;

const SERIES_LIMIT: f64 = 15.0;

/// Modified Bessel function of the first kind, order zero.
pub fn bessel_i0(z: f64) -> f64 {
    let x = z.abs();
    if x <= SERIES_LIMIT {
        series(0, x)
    } else {
        x.exp() * asymptotic_scaled(0, x)
    }
}

/// Modified Bessel function of the first kind, order one.
pub fn bessel_i1(z: f64) -> f64 {
    let x = z.abs();
    let v = if x <= SERIES_LIMIT {
        series(1, x)
    } else {
        x.exp() * asymptotic_scaled(1, x)
    };
    v.copysign(z)
}

/// Exponentially scaled I₀: e^{−|z|} I₀(z). Finite for any real z.
pub fn bessel_i0e(z: f64) -> f64 {
    let x = z.abs();
    if x <= SERIES_LIMIT {
        series(0, x) * (-x).exp()
    } else {
        asymptotic_scaled(0, x)
    }
}

/// Exponentially scaled I₁: e^{−|z|} I₁(z).
pub fn bessel_i1e(z: f64) -> f64 {
    let x = z.abs();
    let v = if x <= SERIES_LIMIT {
        series(1, x) * (-x).exp()
    } else {
        asymptotic_scaled(1, x)
    };
    v.copysign(z)
}

// Σ (x/2)^{2k+ν} / (k! (k+ν)!)
fn series(order: u32, x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut term = if order == 0 { 1.0 } else { 0.5 * x };
    let mut sum = term;
    let nu = order as f64;
    for k in 1..500 {
        let k = k as f64;
        term *= q / (k * (k + nu));
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}

// e^{−x} I_ν(x) ~ (2πx)^{−1/2} Σ_k (−1)^k a_k(ν) / x^k, truncated at the
// smallest term.
fn asymptotic_scaled(order: u32, x: f64) -> f64 {
    let mu = 4.0 * (order as f64).powi(2);
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut prev = f64::INFINITY;
    for k in 1..100 {
        let odd = (2 * k - 1) as f64;
        term *= -(mu - odd * odd) / (k as f64 * 8.0 * x);
        if term.abs() >= prev {
            break;
        }
        sum += term;
        prev = term.abs();
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    sum / (2.0 * PI * x).sqrt()
}

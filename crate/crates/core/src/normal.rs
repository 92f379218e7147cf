//! Standard normal distribution helpers.

use std::f64::consts::FRAC_1_SQRT_2;

/// Standard normal CDF, `Φ(x) = erfc(-x/√2)/2`.
///
/// `libm::erfc` is a port of the FreeBSD/musl implementation (error below
/// 1 ulp), so the result is accurate well past 1e-12 absolute, including deep
/// in both tails.
pub fn cdf(x: f64) -> f64 {
    if x == f64::INFINITY {
        return 1.0;
    }
    if x == f64::NEG_INFINITY {
        return 0.0;
    }
    0.5 * libm::erfc(-x * FRAC_1_SQRT_2)
}

/// Standard normal density.
pub fn pdf(x: f64) -> f64 {
    const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// Standard normal quantile for `p` in (0,1).
///
/// Bisection on [`cdf`] followed by Newton polishing; only used for
/// confidence-interval half widths.
pub fn quantile(p: f64) -> f64 {
    assert!(p > 0.0 && p < 1.0, "quantile requires p in (0,1), got {p}");
    let (mut lo, mut hi) = (-40.0_f64, 40.0_f64);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..3 {
        let d = pdf(x);
        if d > 0.0 {
            x -= (cdf(x) - p) / d;
        }
    }
    x
}

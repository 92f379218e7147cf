//! Estimators built on the sample mean of componentwise maxima.
//!
//! For a BEV law with uniform margins, `W = max(U1, U2)` has CDF `w^l` with
//! `l = l(1,1)`, so `E W = l / (1 + l)` and `λ = 2 - l = 3 - 1/(1 - E W)`.
//! More generally `E max(U1^{1/x1}, U2^{1/x2}) = l(x1,x2) / (1 + l(x1,x2))`.

use super::{BivariateSample, Method, PseudoSample, TdcEstimate};
use crate::error::{Error, Result};
use crate::models::StdfPoint;

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(xs: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut c = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            c += (sum - t) + x;
        } else {
            c += (x - t) + sum;
        }
        sum = t;
    }
    sum + c
}

/// `(1/n) Σ max(u1, u2)`. Exact up to the final division for rank-based
/// samples, since the summands are half-integers.
fn mean_of_maxima(ps: &PseudoSample) -> f64 {
    let n = ps.len() as f64;
    let total = if ps.is_rank_based() {
        ps.raw().iter().map(|p| p[0].max(p[1])).sum::<f64>()
    } else {
        compensated_sum(ps.raw().iter().map(|p| p[0].max(p[1])))
    };
    total / (n * ps.scale())
}

fn lambda_from_mean(m: f64) -> f64 {
    3.0 - 1.0 / (1.0 - m)
}

/// Rank-based mean-of-maxima TDC estimate `3 - (1 - M)^{-1}`.
///
/// For rank input `M ≥ 1/2`, hence `value_raw ≤ 1` with equality exactly for
/// comonotone samples.
pub fn tdc_new(ps: &PseudoSample) -> TdcEstimate {
    TdcEstimate::new(Method::New, lambda_from_mean(mean_of_maxima(ps)), None)
}

/// Empirical STDF `M_x / (1 - M_x)` with `M_x = (1/n) Σ max(u1^{1/x1}, u2^{1/x2})`.
pub fn stdf_new(ps: &PseudoSample, p: StdfPoint) -> Result<f64> {
    if !(p.x1 > 0.0 && p.x2 > 0.0) {
        return Err(Error::Input(format!(
            "empirical STDF needs x1, x2 > 0, got ({}, {})",
            p.x1, p.x2
        )));
    }
    let m = if p.x1 == 1.0 && p.x2 == 1.0 {
        mean_of_maxima(ps)
    } else {
        let (a1, a2) = (1.0 / p.x1, 1.0 / p.x2);
        compensated_sum(ps.iter().map(|[u1, u2]| u1.powf(a1).max(u2.powf(a2)))) / ps.len() as f64
    };
    Ok(m / (1.0 - m))
}

/// Mean-of-maxima estimate with caller-supplied marginal CDFs.
///
/// Without ranks the estimate is no longer bounded by 1 for a given sample;
/// only its expectation is.
pub fn tdc_new_known_margins<F1, F2>(sample: &BivariateSample, f1: F1, f2: F2) -> Result<TdcEstimate>
where
    F1: Fn(f64) -> f64,
    F2: Fn(f64) -> f64,
{
    let mut maxima = Vec::with_capacity(sample.len());
    for (i, &[x1, x2]) in sample.pairs().iter().enumerate() {
        let (a, b) = (f1(x1), f2(x2));
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::Input(format!(
                "marginal CDF value outside [0,1] at pair {}: ({a}, {b})",
                i + 1
            )));
        }
        maxima.push(a.max(b));
    }
    let m = compensated_sum(maxima) / sample.len() as f64;
    if m >= 1.0 {
        return Err(Error::Input("all marginal CDF values equal 1".into()));
    }
    Ok(TdcEstimate::new(Method::NewKnownMargins, lambda_from_mean(m), None))
}

/// Asymptotic variance `l (1 + l)^2 / (2 + l)` of `√n (λ̂ - λ)` under known
/// margins, as a function of `l = l(1, 1) = 2 - λ`.
pub fn asymptotic_variance(l11: f64) -> Result<f64> {
    if !(1.0..=2.0).contains(&l11) {
        return Err(Error::Input(format!(
            "l(1,1) must lie in [1, 2], got {l11}"
        )));
    }
    Ok(l11 * (1.0 + l11).powi(2) / (2.0 + l11))
}

/// Unit Fréchet CDF `exp(-1/x)` (0 for `x ≤ 0`).
pub fn unit_frechet_cdf(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::rank_transform;

    fn comonotone(n: usize) -> BivariateSample {
        BivariateSample::new((0..n).map(|i| [i as f64, (i as f64).sqrt()]).collect()).unwrap()
    }

    #[test]
    fn comonotone_gives_one() {
        for n in [2, 3, 17, 1000, 12345] {
            let ps = rank_transform(&comonotone(n));
            assert_eq!(tdc_new(&ps).value_raw, 1.0);
            assert_eq!(stdf_new(&ps, StdfPoint { x1: 1.0, x2: 1.0 }).unwrap(), 1.0);
        }
    }

    #[test]
    fn identity_with_stdf() {
        let s = BivariateSample::new(vec![[0.1, 3.0], [2.0, 1.0], [0.5, 0.2], [4.0, 5.0], [1.0, -1.0]])
            .unwrap();
        let ps = rank_transform(&s);
        let l = stdf_new(&ps, StdfPoint { x1: 1.0, x2: 1.0 }).unwrap();
        assert!((tdc_new(&ps).value_raw - (2.0 - l)).abs() < 1e-12);
        assert!(stdf_new(&ps, StdfPoint { x1: 0.0, x2: 1.0 }).is_err());
    }

    #[test]
    fn population_limit_algebra() {
        // M = l/(1+l) maps back to 2 - l
        for l in [1.0, 1.3, 1.6245, 2.0] {
            assert!((lambda_from_mean(l / (1.0 + l)) - (2.0 - l)).abs() < 1e-14);
        }
    }

    #[test]
    fn anti_monotone_is_negative() {
        let n = 50;
        let s = BivariateSample::new((0..n).map(|i| [i as f64, -(i as f64)]).collect()).unwrap();
        let est = tdc_new(&rank_transform(&s));
        assert!(est.value_raw < 0.0);
        assert_eq!(est.value_clamped, 0.0);
    }

    #[test]
    fn known_margins() {
        assert!((unit_frechet_cdf(1.0) - (-1.0f64).exp()).abs() < 1e-16);
        let s = comonotone(100);
        let s = BivariateSample::new(s.pairs().iter().map(|p| [p[0] + 1.0, p[0] + 1.0]).collect()).unwrap();
        let est = tdc_new_known_margins(&s, unit_frechet_cdf, unit_frechet_cdf).unwrap();
        assert_eq!(est.method, Method::NewKnownMargins);
        let m = compensated_sum(s.pairs().iter().map(|p| unit_frechet_cdf(p[0]))) / 100.0;
        assert_eq!(est.value_raw, 3.0 - 1.0 / (1.0 - m));
        assert_ne!(est.value_raw, 1.0);
        assert!(tdc_new_known_margins(&s, |x| x, unit_frechet_cdf).is_err());
    }

    #[test]
    fn variance_formula() {
        assert!((asymptotic_variance(1.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((asymptotic_variance(2.0).unwrap() - 4.5).abs() < 1e-15);
        assert!((asymptotic_variance(2f64.powf(0.7)).unwrap() - 3.087_216_302_885_679).abs() < 1e-12);
        assert!(asymptotic_variance(0.9).is_err());
        assert!(asymptotic_variance(2.1).is_err());
    }
}

//! Confidence intervals for TDC estimates.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rank_transform, tdc_huang, tdc_new, ConfidenceInterval, Method, PseudoSample, TdcEstimate};
use crate::error::{Error, Result};
use crate::normal;
use crate::sampling::stream;

pub const MIN_RESAMPLES: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CiConfig {
    pub level: f64,
    pub resamples: usize,
    /// Resample `b` draws from the stream seeded with `seed + b`.
    pub seed: u64,
}

impl Default for CiConfig {
    fn default() -> Self {
        Self {
            level: 0.95,
            resamples: 1000,
            seed: 0,
        }
    }
}

/// Attaches a confidence interval to `est`, which must have been computed from `ps`.
///
/// Rank-based estimates get a percentile bootstrap: pairs are resampled with
/// replacement, re-ranked, and the estimator is recomputed (Huang at the same
/// k). Known-margins estimates get the normal interval
/// `λ̂ ± z sqrt(σ²(2 - λ̂) / n)`.
pub fn ci_tdc(est: &TdcEstimate, ps: &PseudoSample, cfg: &CiConfig) -> Result<TdcEstimate> {
    if !(cfg.level > 0.0 && cfg.level < 1.0) {
        return Err(Error::Input(format!("confidence level must lie in (0,1), got {}", cfg.level)));
    }
    let alpha = 1.0 - cfg.level;
    let n = ps.len();
    let ci = match est.method {
        Method::NewKnownMargins => {
            let l = (2.0 - est.value_raw).clamp(1.0, 2.0);
            let half = normal::quantile(1.0 - alpha / 2.0)
                * (super::asymptotic_variance(l)? / n as f64).sqrt();
            ConfidenceInterval {
                lower: est.value_raw - half,
                upper: est.value_raw + half,
                level: cfg.level,
            }
        }
        Method::New | Method::Huang => {
            if cfg.resamples < MIN_RESAMPLES {
                return Err(Error::Input(format!(
                    "bootstrap needs at least {MIN_RESAMPLES} resamples, got {}",
                    cfg.resamples
                )));
            }
            let base = ps.as_sample();
            let data = base.pairs();
            let k = est.k;
            let mut stats = (0..cfg.resamples)
                .into_par_iter()
                .map(|b| {
                    let mut rng = stream(cfg.seed.wrapping_add(b as u64));
                    let pairs: Vec<[f64; 2]> = (0..n).map(|_| data[rng.random_range(0..n)]).collect();
                    let resample = rank_transform(&crate::estimators::BivariateSample::new(pairs)?);
                    Ok(match k {
                        Some(k) => tdc_huang(&resample, k)?.value_raw,
                        None => tdc_new(&resample).value_raw,
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            stats.sort_by(f64::total_cmp);
            ConfidenceInterval {
                lower: quantile_sorted(&stats, alpha / 2.0),
                upper: quantile_sorted(&stats, 1.0 - alpha / 2.0),
                level: cfg.level,
            }
        }
    };
    let mut out = est.clone();
    out.ci = Some(ci);
    Ok(out)
}

/// Linear-interpolation sample quantile of sorted data.
fn quantile_sorted(xs: &[f64], q: f64) -> f64 {
    let h = q * (xs.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(xs.len() - 1);
    xs[lo] + (h - lo as f64) * (xs[hi] - xs[lo])
}

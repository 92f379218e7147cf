//! Huang's threshold estimator, its k-path and plateau-based choice of k.

use serde::{Deserialize, Serialize};

use super::{Method, PseudoSample, TdcEstimate};
use crate::error::{Error, Result};

/// Whether an observation with larger pseudo-coordinate `value / scale`
/// exceeds `1 - k/n`. Written as `value·n > scale·(n - k)` so that rank-based
/// samples compare exactly (integers and half-integers times integers).
#[inline]
fn exceeds(max_value: f64, n: f64, scale: f64, k: usize) -> bool {
    max_value * n > scale * (n - k as f64)
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 || k >= n {
        return Err(Error::Input(format!(
            "threshold k must satisfy 1 <= k <= n-1 = {}, got {k}",
            n - 1
        )));
    }
    Ok(())
}

/// `2 - (1/k) Σ 1{u1 > 1 - k/n ∨ u2 > 1 - k/n}`.
pub fn tdc_huang(ps: &PseudoSample, k: usize) -> Result<TdcEstimate> {
    let n = ps.len();
    check_k(n, k)?;
    let (nf, scale) = (n as f64, ps.scale());
    let count = ps
        .raw()
        .iter()
        .filter(|p| exceeds(p[0].max(p[1]), nf, scale, k))
        .count();
    Ok(TdcEstimate::new(
        Method::Huang,
        2.0 - count as f64 / k as f64,
        Some(k),
    ))
}

/// Huang estimates for every `k = 1..n-1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KPath {
    pub entries: Vec<(usize, f64)>,
}

impl KPath {
    pub fn values(&self) -> impl Iterator<Item = f64> + '_ {
        self.entries.iter().map(|e| e.1)
    }

    pub fn value_at(&self, k: usize) -> Option<f64> {
        self.entries.get(k.checked_sub(1)?).filter(|e| e.0 == k).map(|e| e.1)
    }
}

/// Full k-path from one sort of the per-pair maxima.
pub fn kpath(ps: &PseudoSample) -> KPath {
    let n = ps.len();
    let (nf, scale) = (n as f64, ps.scale());
    let mut maxima: Vec<f64> = ps.raw().iter().map(|p| p[0].max(p[1])).collect();
    maxima.sort_by(|a, b| b.total_cmp(a));
    let mut count = 0;
    let entries = (1..n)
        .map(|k| {
            while count < n && exceeds(maxima[count], nf, scale, k) {
                count += 1;
            }
            (k, 2.0 - count as f64 / k as f64)
        })
        .collect();
    KPath { entries }
}

/// Tuning constants of the plateau search.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauConfig {
    /// Moving-average half width is `max(min_half_width, ⌊fraction · n⌋)`.
    pub smoothing_fraction: f64,
    pub min_half_width: usize,
    /// A window is a plateau when its summed absolute deviation from its
    /// first value is at most `deviation_multiplier · std(smoothed path)`.
    pub deviation_multiplier: f64,
}

impl Default for PlateauConfig {
    fn default() -> Self {
        Self {
            smoothing_fraction: 0.005,
            min_half_width: 1,
            deviation_multiplier: 2.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlateauSelection {
    /// First k of the plateau window (or the fallback `⌊√n⌋`).
    pub k: usize,
    pub estimate: f64,
    pub plateau_found: bool,
    pub window: usize,
}

/// Plateau choice of k on a k-path.
///
/// The path is smoothed with a centred box kernel of half width `b`; over the
/// smoothed values `λ̄` a window of length `m = ⌊√(n - 2b)⌋` is slid from the
/// smallest k, and the first window with
/// `Σ_{i=1}^{m-1} |λ̄_{p+i} - λ̄_p| ≤ 2 σ(λ̄)` is the plateau. The estimate is the
/// window mean. Without a plateau k falls back to `⌊√n⌋` and the raw path
/// value there.
pub fn select_k(kp: &KPath, n: usize, cfg: &PlateauConfig) -> Result<PlateauSelection> {
    if n < 2 || kp.entries.len() != n - 1 || kp.entries.iter().enumerate().any(|(i, e)| e.0 != i + 1) {
        return Err(Error::Input(format!(
            "k-path must cover k = 1..{} in order",
            n.saturating_sub(1)
        )));
    }
    let path: Vec<f64> = kp.values().collect();
    let b = cfg
        .min_half_width
        .max((cfg.smoothing_fraction * n as f64).floor() as usize);

    let fallback = || {
        let k = ((n as f64).sqrt().floor() as usize).clamp(1, n - 1);
        PlateauSelection {
            k,
            estimate: path[k - 1],
            plateau_found: false,
            window: 0,
        }
    };

    if path.len() < 2 * b + 1 {
        return Ok(fallback());
    }
    let width = (2 * b + 1) as f64;
    let mut running: f64 = path[..2 * b + 1].iter().sum();
    let mut smooth = Vec::with_capacity(path.len() - 2 * b);
    smooth.push(running / width);
    for j in (2 * b + 1)..path.len() {
        running += path[j] - path[j - 2 * b - 1];
        smooth.push(running / width);
    }

    let m = (((n - 2 * b) as f64).sqrt().floor() as usize).clamp(1, smooth.len());
    let mean = smooth.iter().sum::<f64>() / smooth.len() as f64;
    let sigma = (smooth.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / smooth.len() as f64).sqrt();
    let bound = cfg.deviation_multiplier * sigma;

    for p in 0..=(smooth.len() - m) {
        let w = &smooth[p..p + m];
        let dev: f64 = w[1..].iter().map(|x| (x - w[0]).abs()).sum();
        if dev <= bound {
            return Ok(PlateauSelection {
                // smoothed index p is centred on path index p + b, i.e. k = p + b + 1
                k: p + b + 1,
                estimate: w.iter().sum::<f64>() / m as f64,
                plateau_found: true,
                window: m,
            });
        }
    }
    Ok(fallback())
}

/// Huang estimate at the plateau-selected k.
pub fn tdc_huang_auto(ps: &PseudoSample, cfg: &PlateauConfig) -> Result<(TdcEstimate, PlateauSelection)> {
    let n = ps.len();
    let sel = select_k(&kpath(ps), n, cfg)?;
    Ok((TdcEstimate::new(Method::Huang, sel.estimate, Some(sel.k)), sel))
}

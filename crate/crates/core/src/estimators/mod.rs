//! Nonparametric tail-dependence estimators.
//!
//! All estimators work on a [`PseudoSample`], the margin-free representation
//! obtained by [`rank_transform`]: `u = rank / (n + 1)`. Rank-based pseudo
//! samples keep the (half-)integer ranks internally so that sums of maxima and
//! threshold comparisons are exact.

mod bootstrap;
mod huang;
mod mean_max;
mod sample;

use serde::{Deserialize, Serialize};

pub use bootstrap::{ci_tdc, CiConfig};
pub use huang::{kpath, select_k, tdc_huang, tdc_huang_auto, KPath, PlateauConfig, PlateauSelection};
pub use mean_max::{asymptotic_variance, stdf_new, tdc_new, tdc_new_known_margins, unit_frechet_cdf};
pub(crate) use mean_max::compensated_sum;
pub use sample::{rank_transform, BivariateSample, PseudoSample};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// `3 - 1/(1 - mean max(u1, u2))` on ranks.
    New,
    /// Threshold estimator `2 - (1/k) #{u1 > 1-k/n or u2 > 1-k/n}`.
    Huang,
    /// Mean-of-maxima estimator with known marginal CDFs.
    NewKnownMargins,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::New => "new",
            Method::Huang => "huang",
            Method::NewKnownMargins => "new_known_margins",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceInterval {
    pub lower: f64,
    pub upper: f64,
    pub level: f64,
}

/// A tail-dependence estimate.
///
/// `value_raw` is the estimator's arithmetic result and may fall outside
/// `[0, 1]` (e.g. negative near independence at small `n`); `value_clamped`
/// is its projection on `[0, 1]`. `k` is set exactly for [`Method::Huang`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TdcEstimate {
    pub method: Method,
    pub value_raw: f64,
    pub value_clamped: f64,
    pub k: Option<usize>,
    pub ci: Option<ConfidenceInterval>,
}

impl TdcEstimate {
    pub(crate) fn new(method: Method, value_raw: f64, k: Option<usize>) -> Self {
        debug_assert_eq!(k.is_some(), method == Method::Huang);
        Self {
            method,
            value_raw,
            value_clamped: value_raw.clamp(0.0, 1.0),
            k,
            ci: None,
        }
    }
}

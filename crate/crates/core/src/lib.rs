//! Tail-dependence estimation for bivariate extreme value (BEV) distributions.
//!
//! The crate is organised bottom-up:
//!
//! - [`models`]: closed-form stable tail dependence functions (STDF), copulas
//!   and true tail-dependence coefficients for the logistic, asymmetric
//!   logistic and Hüsler-Reiss families.
//! - [`sampling`]: seeded conditional-inversion sampler for any [`BevModel`].
//! - [`estimators`]: rank transform, the mean-of-maxima TDC and STDF
//!   estimators, the Huang threshold estimator with plateau k selection and
//!   bootstrap confidence intervals.
//! - [`simulation`]: Monte Carlo bias/RMSE study over a (model × n) grid.
//! - [`pipeline`]: prices → negative log-returns → monthly maxima → aligned pairs.

pub mod error;
pub mod estimators;
pub mod models;
pub mod normal;
pub mod pipeline;
pub mod sampling;
pub mod simulation;

pub use error::{Error, Result};
pub use estimators::{
    asymptotic_variance, ci_tdc, kpath, rank_transform, select_k, stdf_new, tdc_huang,
    tdc_huang_auto, tdc_new, tdc_new_known_margins, BivariateSample, CiConfig, ConfidenceInterval,
    KPath, Method, PlateauConfig, PlateauSelection, PseudoSample, TdcEstimate,
};
pub use models::{BevModel, Family, StdfPoint};
pub use sampling::{sample_copula, to_frechet, SamplerConfig, UnitSquarePair};

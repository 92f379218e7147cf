//! Parametric bivariate extreme value models.
//!
//! Every model is described by its stable tail dependence function (STDF)
//! `l(x1, x2)`, homogeneous of order one, with `max(x1,x2) ≤ l ≤ x1 + x2`.
//! The associated copula is `C(u, v) = exp(-l(-ln u, -ln v))` and the
//! tail-dependence coefficient is `λ = 2 - l(1, 1)`.
//!
//! | family         | spec string                  | STDF                                                        |
//! |----------------|------------------------------|-------------------------------------------------------------|
//! | logistic       | `logistic:r=0.7`             | `(x1^(1/r) + x2^(1/r))^r`, `0 < r ≤ 1`                      |
//! | asym. logistic | `alog:r=0.7,t1=0.5,t2=0.5`   | `(1-t1)x1 + (1-t2)x2 + ((t1 x1)^(1/r) + (t2 x2)^(1/r))^r`   |
//! | Hüsler-Reiss   | `hr:r=0.7`                   | `x1 Φ(1/r + r/2 ln(x1/x2)) + x2 Φ(1/r + r/2 ln(x2/x1))`     |

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::normal;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Logistic,
    AsymLogistic,
    HuslerReiss,
}

impl Family {
    /// Short name used in model spec strings.
    pub fn tag(self) -> &'static str {
        match self {
            Family::Logistic => "logistic",
            Family::AsymLogistic => "alog",
            Family::HuslerReiss => "hr",
        }
    }
}

/// A validated parametric BEV model.
///
/// Fields are private so that every value in circulation satisfies the family
/// constraints. The logistic family is stored with `t1 = t2 = 1`, which makes it
/// share the asymmetric-logistic code path bit for bit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BevModel {
    family: Family,
    r: f64,
    t1: f64,
    t2: f64,
}

impl BevModel {
    pub fn logistic(r: f64) -> Result<Self> {
        check_logistic_r(r)?;
        Ok(Self {
            family: Family::Logistic,
            r,
            t1: 1.0,
            t2: 1.0,
        })
    }

    pub fn asym_logistic(r: f64, t1: f64, t2: f64) -> Result<Self> {
        check_logistic_r(r)?;
        for (name, t) in [("t1", t1), ("t2", t2)] {
            if !(0.0..=1.0).contains(&t) {
                return Err(Error::Parameter(format!(
                    "asymmetric logistic requires 0 <= {name} <= 1, got {t}"
                )));
            }
        }
        Ok(Self {
            family: Family::AsymLogistic,
            r,
            t1,
            t2,
        })
    }

    pub fn husler_reiss(r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return Err(Error::Parameter(format!(
                "Hüsler-Reiss requires finite r > 0, got {r}"
            )));
        }
        Ok(Self {
            family: Family::HuslerReiss,
            r,
            t1: 1.0,
            t2: 1.0,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    /// Dependence parameter `r`.
    pub fn r(&self) -> f64 {
        self.r
    }

    /// Asymmetry weights `(t1, t2)`; `(1, 1)` for the symmetric families.
    pub fn weights(&self) -> (f64, f64) {
        (self.t1, self.t2)
    }

    /// Parameter list in spec-string form, e.g. `r=0.7,t1=0.5,t2=0.5`.
    pub fn params_string(&self) -> String {
        match self.family {
            Family::AsymLogistic => format!("r={},t1={},t2={}", self.r, self.t1, self.t2),
            _ => format!("r={}", self.r),
        }
    }

    /// Stable tail dependence function `l(x1, x2)`.
    pub fn stdf(&self, p: StdfPoint) -> f64 {
        let StdfPoint { x1, x2 } = p;
        let l = match self.family {
            Family::Logistic | Family::AsymLogistic => {
                (1.0 - self.t1) * x1
                    + (1.0 - self.t2) * x2
                    + logistic_core(self.t1 * x1, self.t2 * x2, self.r)
            }
            Family::HuslerReiss => husler_reiss_stdf(x1, x2, self.r),
        };
        // The exact function lies within these bounds; clamping only removes
        // last-ulp rounding excursions.
        l.clamp(x1.max(x2), x1 + x2)
    }

    /// Partial derivative `∂l/∂x1` at `(x1, x2)`, for `x1 > 0`.
    pub fn stdf_dx1(&self, p: StdfPoint) -> f64 {
        let StdfPoint { x1, x2 } = p;
        match self.family {
            Family::Logistic | Family::AsymLogistic => {
                if self.t1 == 0.0 {
                    return 1.0;
                }
                // ∂/∂x (a^{1/r} + b^{1/r})^r = t1 (1 + (b/a)^{1/r})^{r-1}, a = t1 x1, b = t2 x2
                let ratio = (self.t2 * x2) / (self.t1 * x1);
                let w = ratio.powf(1.0 / self.r);
                (1.0 - self.t1) + self.t1 * (1.0 + w).powf(self.r - 1.0)
            }
            // x1 φ(a1) = x2 φ(a2), so the density terms cancel
            Family::HuslerReiss => normal::cdf(1.0 / self.r + 0.5 * self.r * (x1 / x2).ln()),
        }
    }

    /// True tail-dependence coefficient `2 - l(1, 1)`.
    pub fn true_tdc(&self) -> f64 {
        (2.0 - self.stdf(StdfPoint { x1: 1.0, x2: 1.0 })).clamp(0.0, 1.0)
    }

    /// Copula `C(u, v) = exp(-l(-ln u, -ln v))` on `[0,1]²`.
    ///
    /// At `u = 0` or `v = 0` the copula is 0 by continuity.
    pub fn copula(&self, u: f64, v: f64) -> Result<f64> {
        for (name, w) in [("u", u), ("v", v)] {
            if !(0.0..=1.0).contains(&w) {
                return Err(Error::Input(format!("copula argument {name}={w} outside [0,1]")));
            }
        }
        if u == 0.0 || v == 0.0 {
            return Ok(0.0);
        }
        let l = self.stdf(StdfPoint {
            x1: -u.ln(),
            x2: -v.ln(),
        });
        Ok((-l).exp())
    }

    /// Conditional distribution `∂C/∂u (u, v) = P(V ≤ v | U = u)` for interior `(u, v)`.
    pub fn copula_du(&self, u: f64, v: f64) -> Result<f64> {
        for (name, w) in [("u", u), ("v", v)] {
            if !(w > 0.0 && w < 1.0) {
                return Err(Error::Input(format!(
                    "conditional copula argument {name}={w} must lie in (0,1)"
                )));
            }
        }
        Ok(self.conditional_cdf(-u.ln(), u, v))
    }

    /// `∂C/∂u` with `x1 = -ln u` precomputed; `u`, `v` interior.
    pub(crate) fn conditional_cdf(&self, x1: f64, u: f64, v: f64) -> f64 {
        let p = StdfPoint { x1, x2: -v.ln() };
        let c = (-self.stdf(p)).exp();
        (c * self.stdf_dx1(p) / u).clamp(0.0, 1.0)
    }
}

impl fmt::Display for BevModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.family.tag(), self.params_string())
    }
}

impl FromStr for BevModel {
    type Err = Error;

    /// Parses `logistic:r=0.7`, `alog:r=0.7,t1=0.5,t2=0.5` or `hr:r=0.7`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (family, rest) = s
            .split_once(':')
            .ok_or_else(|| Error::parse(s, "expected `<family>:<key>=<value>,...`"))?;
        let family = match family.trim().to_ascii_lowercase().as_str() {
            "logistic" | "log" => Family::Logistic,
            "alog" | "asym_logistic" | "asymlogistic" => Family::AsymLogistic,
            "hr" | "husler_reiss" | "huslerreiss" => Family::HuslerReiss,
            other => {
                return Err(Error::parse(
                    other,
                    "unknown model family (expected logistic, alog or hr)",
                ))
            }
        };
        let allowed: &[&str] = match family {
            Family::AsymLogistic => &["r", "t1", "t2"],
            _ => &["r"],
        };
        let mut values: [Option<f64>; 3] = [None; 3];
        for token in rest.split(',') {
            let token = token.trim();
            let (key, value) = token
                .split_once('=')
                .ok_or_else(|| Error::parse(token, "expected `key=value`"))?;
            let key = key.trim();
            let idx = allowed
                .iter()
                .position(|k| *k == key)
                .ok_or_else(|| Error::parse(key, format!("unknown parameter for {}", family.tag())))?;
            let parsed: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::parse(token, "parameter value is not a number"))?;
            if values[idx].replace(parsed).is_some() {
                return Err(Error::parse(token, "duplicate parameter"));
            }
        }
        let get = |i: usize| {
            values[i].ok_or_else(|| Error::parse(s, format!("missing parameter `{}`", allowed[i])))
        };
        match family {
            Family::Logistic => BevModel::logistic(get(0)?),
            Family::AsymLogistic => BevModel::asym_logistic(get(0)?, get(1)?, get(2)?),
            Family::HuslerReiss => BevModel::husler_reiss(get(0)?),
        }
    }
}

/// Argument of an STDF; both coordinates nonnegative and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StdfPoint {
    pub x1: f64,
    pub x2: f64,
}

impl StdfPoint {
    pub fn new(x1: f64, x2: f64) -> Result<Self> {
        if x1.is_nan() || x2.is_nan() {
            return Err(Error::Input("STDF argument is NaN".into()));
        }
        if x1 < 0.0 || x2 < 0.0 || !x1.is_finite() || !x2.is_finite() {
            return Err(Error::Input(format!(
                "STDF arguments must be finite and nonnegative, got ({x1}, {x2})"
            )));
        }
        Ok(Self { x1, x2 })
    }
}

fn check_logistic_r(r: f64) -> Result<()> {
    if r > 0.0 && r <= 1.0 {
        Ok(())
    } else {
        Err(Error::Parameter(format!(
            "logistic dependence requires 0 < r <= 1, got {r}"
        )))
    }
}

/// `(a^{1/r} + b^{1/r})^r` evaluated as `max · (1 + (min/max)^{1/r})^r`,
/// which neither overflows nor produces `0^{..}` NaNs.
fn logistic_core(a: f64, b: f64, r: f64) -> f64 {
    let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
    if hi == 0.0 {
        return 0.0;
    }
    if lo == 0.0 {
        return hi;
    }
    hi * (1.0 + (lo / hi).powf(1.0 / r)).powf(r)
}

fn husler_reiss_stdf(x1: f64, x2: f64, r: f64) -> f64 {
    if x1 == 0.0 {
        return x2;
    }
    if x2 == 0.0 {
        return x1;
    }
    let log_ratio = (x1 / x2).ln();
    let a = 1.0 / r;
    let h = 0.5 * r * log_ratio;
    x1 * normal::cdf(a + h) + x2 * normal::cdf(a - h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pt(x1: f64, x2: f64) -> StdfPoint {
        StdfPoint::new(x1, x2).unwrap()
    }

    fn table_models() -> Vec<BevModel> {
        vec![
            BevModel::logistic(0.7).unwrap(),
            BevModel::asym_logistic(0.7, 0.5, 0.5).unwrap(),
            BevModel::husler_reiss(0.7).unwrap(),
        ]
    }

    #[test]
    fn table_one_lambdas() {
        let [lo, al, hr] = table_models().try_into().unwrap();
        assert!((lo.stdf(pt(1.0, 1.0)) - 2f64.powf(0.7)).abs() < 1e-15);
        assert!((lo.true_tdc() - 0.3755).abs() < 5e-5);
        assert!((al.true_tdc() - 0.1877).abs() < 5e-5);
        assert!((hr.stdf(pt(1.0, 1.0)) - 1.846_872_548_980_330_5).abs() < 1e-12);
        assert!((hr.true_tdc() - 0.1531).abs() < 5e-5);
    }

    #[test]
    fn independence_and_limits() {
        let ind = BevModel::logistic(1.0).unwrap();
        assert!((ind.stdf(pt(1.0, 1.0)) - 2.0).abs() < 1e-15);
        assert_eq!(ind.true_tdc(), 0.0);
        let near_complete = BevModel::logistic(0.01).unwrap();
        assert!(near_complete.true_tdc() > 0.99);
        // independence components of the asymmetric model
        for m in [
            BevModel::asym_logistic(0.7, 0.0, 0.5).unwrap(),
            BevModel::asym_logistic(0.7, 0.5, 0.0).unwrap(),
            BevModel::asym_logistic(1.0, 0.3, 0.8).unwrap(),
        ] {
            let l = m.stdf(pt(0.4, 1.3));
            assert!((l - 1.7).abs() < 1e-14, "{m}: {l}");
            assert!(m.stdf_dx1(pt(0.4, 1.3)).is_finite());
        }
    }

    #[test]
    fn asym_with_unit_weights_is_logistic() {
        let lo = BevModel::logistic(0.7).unwrap();
        let al = BevModel::asym_logistic(0.7, 1.0, 1.0).unwrap();
        for &(a, b) in &[(1.0, 1.0), (0.2, 3.0), (5.0, 0.0), (1e-8, 7.0)] {
            assert_eq!(lo.stdf(pt(a, b)), al.stdf(pt(a, b)));
        }
    }

    #[test]
    fn copula_examples() {
        let ind = BevModel::logistic(1.0).unwrap();
        assert!((ind.copula(0.3, 0.6).unwrap() - 0.18).abs() < 1e-15);
        assert!((ind.copula_du(0.3, 0.6).unwrap() - 0.6).abs() < 1e-14);
        for m in table_models() {
            assert!((m.copula(0.3, 1.0).unwrap() - 0.3).abs() < 1e-15);
            assert!((m.copula(1.0, 0.3).unwrap() - 0.3).abs() < 1e-15);
            assert_eq!(m.copula(0.0, 0.4).unwrap(), 0.0);
            assert!(m.copula(1.2, 0.4).is_err());
            assert!((m.copula_du(0.4, 1.0 - 1e-9).unwrap() - 1.0).abs() < 1e-6);
            assert!(m.copula_du(0.0, 0.5).is_err());
            assert!(m.copula_du(0.5, 1.0).is_err());
        }
        let hr = BevModel::husler_reiss(0.7).unwrap();
        assert!((hr.copula(0.5, 0.5).unwrap() - 0.277_994_346_958_675_6).abs() < 1e-12);
    }

    #[test]
    fn copula_du_matches_central_difference() {
        let lo = BevModel::logistic(0.7).unwrap();
        let h = 1e-6;
        let fd = (lo.copula(0.5 + h, 0.5).unwrap() - lo.copula(0.5 - h, 0.5).unwrap()) / (2.0 * h);
        assert!((lo.copula_du(0.5, 0.5).unwrap() - fd).abs() < 1e-6);
    }

    #[test]
    fn frechet_bounds_on_grid() {
        for m in table_models() {
            for i in 1..10 {
                for j in 1..10 {
                    let (u, v) = (i as f64 / 10.0, j as f64 / 10.0);
                    let c = m.copula(u, v).unwrap();
                    assert!(c >= (u + v - 1.0).max(0.0) - 1e-15 && c <= u.min(v) + 1e-15);
                }
            }
        }
    }

    #[test]
    fn spec_strings() {
        let m: BevModel = "alog:r=0.7,t1=0.5,t2=0.5".parse().unwrap();
        assert_eq!(m, BevModel::asym_logistic(0.7, 0.5, 0.5).unwrap());
        assert_eq!(m.to_string(), "alog:r=0.7,t1=0.5,t2=0.5");
        assert_eq!("hr:r=0.7".parse::<BevModel>().unwrap().to_string(), "hr:r=0.7");
        assert_eq!(
            "logistic:r=0.7".parse::<BevModel>().unwrap(),
            BevModel::logistic(0.7).unwrap()
        );

        match "logistic:r=1.5".parse::<BevModel>() {
            Err(Error::Parameter(msg)) => assert!(msg.contains("1.5")),
            other => panic!("{other:?}"),
        }
        let bad = [
            ("gumbel:r=0.5", "gumbel"),
            ("logistic:q=0.5", "q"),
            ("logistic:r=abc", "r=abc"),
            ("alog:r=0.7,t1=0.5", "alog:r=0.7,t1=0.5"),
            ("hr", "hr"),
            ("hr:r", "r"),
        ];
        for (s, tok) in bad {
            match s.parse::<BevModel>() {
                Err(Error::Parse { token, .. }) => assert_eq!(token, tok, "{s}"),
                other => panic!("{s}: {other:?}"),
            }
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(BevModel::logistic(0.0).is_err());
        assert!(BevModel::logistic(f64::NAN).is_err());
        assert!(BevModel::asym_logistic(0.5, -0.1, 0.5).is_err());
        assert!(BevModel::asym_logistic(0.5, 0.5, 1.1).is_err());
        assert!(BevModel::husler_reiss(0.0).is_err());
        assert!(BevModel::husler_reiss(f64::INFINITY).is_err());
        assert!(StdfPoint::new(f64::NAN, 1.0).is_err());
        assert!(StdfPoint::new(-1.0, 1.0).is_err());
    }

    fn any_model() -> impl Strategy<Value = BevModel> {
        prop_oneof![
            (0.01f64..=1.0).prop_map(|r| BevModel::logistic(r).unwrap()),
            (0.01f64..=1.0, 0.0f64..=1.0, 0.0f64..=1.0)
                .prop_map(|(r, a, b)| BevModel::asym_logistic(r, a, b).unwrap()),
            (0.05f64..20.0).prop_map(|r| BevModel::husler_reiss(r).unwrap()),
        ]
    }

    proptest! {
        #[test]
        fn homogeneity_bounds_margins(m in any_model(), x1 in 0.0f64..10.0, x2 in 0.0f64..10.0, c in 1e-3f64..1e3) {
            let l = m.stdf(pt(x1, x2));
            let lc = m.stdf(pt(c * x1, c * x2));
            prop_assert!((lc - c * l).abs() <= 1e-12 * c * (x1 + x2));
            prop_assert!(l >= x1.max(x2) && l <= x1 + x2);
            prop_assert!((m.stdf(pt(x1, 0.0)) - x1).abs() <= 1e-14);
            prop_assert!((m.stdf(pt(0.0, x2)) - x2).abs() <= 1e-14);
        }

        #[test]
        fn conditional_is_monotone(m in any_model(), u in 0.01f64..0.99) {
            let mut prev = 0.0;
            for i in 1..1000 {
                let v = i as f64 / 1000.0;
                let c = m.copula_du(u, v).unwrap();
                prop_assert!(c >= prev - 1e-15, "{} u={} v={}: {} < {}", m, u, v, c, prev);
                prev = c;
            }
        }
    }
}

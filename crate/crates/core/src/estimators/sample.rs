use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Raw observations `(x1, x2)`; at least two pairs, no NaN.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BivariateSample {
    pairs: Vec<[f64; 2]>,
}

impl BivariateSample {
    pub fn new(pairs: Vec<[f64; 2]>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Input(format!(
                "a bivariate sample needs at least 2 pairs, got {}",
                pairs.len()
            )));
        }
        if let Some(i) = pairs.iter().position(|p| p[0].is_nan() || p[1].is_nan()) {
            return Err(Error::Input(format!("pair {} contains NaN", i + 1)));
        }
        Ok(Self { pairs })
    }

    pub fn pairs(&self) -> &[[f64; 2]] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// The same sample with the coordinates of every pair exchanged.
    pub fn swapped(&self) -> Self {
        Self {
            pairs: self.pairs.iter().map(|&[a, b]| [b, a]).collect(),
        }
    }
}

/// Pseudo-observations in `(0,1)²`.
///
/// Stored as `values / scale`: for rank-based samples `values` are the
/// (average) ranks and `scale = n + 1`; for externally supplied uniforms
/// `scale = 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct PseudoSample {
    values: Vec<[f64; 2]>,
    scale: f64,
    ranked: bool,
}

impl PseudoSample {
    /// Wraps pseudo-observations computed elsewhere; each coordinate must lie
    /// strictly inside `(0, 1)`.
    pub fn from_uniforms(pairs: Vec<[f64; 2]>) -> Result<Self> {
        if pairs.len() < 2 {
            return Err(Error::Input(format!(
                "a pseudo sample needs at least 2 pairs, got {}",
                pairs.len()
            )));
        }
        if let Some((i, p)) = pairs
            .iter()
            .enumerate()
            .find(|(_, p)| !(p[0] > 0.0 && p[0] < 1.0 && p[1] > 0.0 && p[1] < 1.0))
        {
            return Err(Error::Input(format!(
                "pseudo-observation {} = ({}, {}) is not inside (0,1)²",
                i + 1,
                p[0],
                p[1]
            )));
        }
        Ok(Self {
            values: pairs,
            scale: 1.0,
            ranked: false,
        })
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Whether the sample came from [`rank_transform`].
    pub fn is_rank_based(&self) -> bool {
        self.ranked
    }

    /// Pseudo-observation `i` as `(u1, u2)`.
    pub fn get(&self, i: usize) -> [f64; 2] {
        let [a, b] = self.values[i];
        [a / self.scale, b / self.scale]
    }

    pub fn iter(&self) -> impl ExactSizeIterator<Item = [f64; 2]> + '_ {
        (0..self.len()).map(|i| self.get(i))
    }

    /// Unscaled values (ranks for rank-based samples).
    pub(crate) fn raw(&self) -> &[[f64; 2]] {
        &self.values
    }

    pub(crate) fn scale(&self) -> f64 {
        self.scale
    }

    /// Raw sample view of the pseudo-observations, for resampling.
    pub(crate) fn as_sample(&self) -> BivariateSample {
        BivariateSample {
            pairs: self.values.clone(),
        }
    }
}

/// Average ranks (1-based) of `xs`, preserving input order.
fn average_ranks(xs: impl ExactSizeIterator<Item = f64>) -> Vec<f64> {
    let xs: Vec<f64> = xs.collect();
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && xs[order[end]] == xs[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end share their mean rank
        let rank = (start + 1 + end) as f64 / 2.0;
        for &i in &order[start..end] {
            ranks[i] = rank;
        }
        start = end;
    }
    ranks
}

/// Margin-wise ranks divided by `n + 1`. Ties receive average ranks.
pub fn rank_transform(sample: &BivariateSample) -> PseudoSample {
    let r1 = average_ranks(sample.pairs.iter().map(|p| p[0]));
    let r2 = average_ranks(sample.pairs.iter().map(|p| p[1]));
    PseudoSample {
        values: r1.into_iter().zip(r2).map(|(a, b)| [a, b]).collect(),
        scale: (sample.len() + 1) as f64,
        ranked: true,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorted_input() {
        let s = BivariateSample::new(vec![[1.0, 10.0], [2.0, 20.0], [3.0, 30.0]]).unwrap();
        let ps = rank_transform(&s);
        let u: Vec<f64> = ps.iter().map(|p| p[0]).collect();
        assert_eq!(u, vec![0.25, 0.5, 0.75]);
    }

    #[test]
    fn ties_get_average_ranks() {
        let s = BivariateSample::new(vec![[5.0, 1.0], [5.0, 2.0], [1.0, 3.0], [7.0, 4.0]]).unwrap();
        let ps = rank_transform(&s);
        // 5.0 occupies positions 2 and 3
        assert_eq!(ps.raw()[0][0], 2.5);
        assert_eq!(ps.raw()[1][0], 2.5);
        assert_eq!(ps.get(0)[0], 2.5 / 5.0);

        let two = BivariateSample::new(vec![[5.0, 1.0], [5.0, 2.0]]).unwrap();
        assert_eq!(rank_transform(&two).get(0)[0], 1.5 / 3.0);
    }

    #[test]
    fn order_preserved_and_monotone_invariant() {
        let s = BivariateSample::new(vec![[0.3, -1.0], [-2.0, 4.0], [9.0, 0.5], [1.0, 2.0]]).unwrap();
        let t = BivariateSample::new(
            s.pairs().iter().map(|&[a, b]| [a.exp(), b * b * b + 3.0]).collect(),
        )
        .unwrap();
        let ps = rank_transform(&s);
        assert_eq!(ps, rank_transform(&t));
        assert_eq!(ps.raw().iter().map(|p| p[0]).collect::<Vec<_>>(), vec![2.0, 1.0, 4.0, 3.0]);
    }

    #[test]
    fn validation() {
        assert!(BivariateSample::new(vec![[1.0, 2.0]]).is_err());
        assert!(BivariateSample::new(vec![[1.0, 2.0], [f64::NAN, 1.0]]).is_err());
        assert!(PseudoSample::from_uniforms(vec![[0.2, 0.3], [1.0, 0.5]]).is_err());
        assert!(PseudoSample::from_uniforms(vec![[0.2, 0.3], [0.0, 0.5]]).is_err());
        let ps = PseudoSample::from_uniforms(vec![[0.2, 0.3], [0.6, 0.5]]).unwrap();
        assert!(!ps.is_rank_based());
        assert_eq!(ps.get(1), [0.6, 0.5]);
    }
}

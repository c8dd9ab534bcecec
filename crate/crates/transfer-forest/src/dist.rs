//! Label distributions and the entropy kernel.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Normalized class-probability vector backed by integer sample counts.
///
/// Counts are the stored representation so model round-trips are bit-exact;
/// probabilities are reconstructed on demand. A distribution with total
/// count 0 is "empty" and carries no probability mass.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LabelDistribution {
    counts: Vec<u64>,
}

impl LabelDistribution {
    pub fn from_counts(counts: Vec<u64>) -> Self {
        LabelDistribution { counts }
    }

    pub fn empty(class_count: usize) -> Self {
        LabelDistribution {
            counts: vec![0; class_count],
        }
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of classes.
    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.count() == 0
    }

    /// Total sample count backing the distribution.
    pub fn count(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// Probability vector; all zeros when the distribution is empty.
    pub fn probs(&self) -> Vec<f64> {
        let total = self.count();
        if total == 0 {
            return vec![0.0; self.counts.len()];
        }
        let total = total as f64;
        self.counts.iter().map(|&c| c as f64 / total).collect()
    }

    /// Majority class id; ties broken by lowest class id.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (c, &n) in self.counts.iter().enumerate() {
            if n > self.counts[best] {
                best = c;
            }
        }
        best
    }

    /// Element-wise sum of counts.
    pub fn merged(&self, other: &LabelDistribution) -> LabelDistribution {
        let counts = self
            .counts
            .iter()
            .zip(&other.counts)
            .map(|(a, b)| a + b)
            .collect();
        LabelDistribution { counts }
    }
}

/// Shannon entropy in bits; `0 * log2(0)` contributes 0.
///
/// Errors on an empty distribution.
pub fn entropy(dist: &LabelDistribution) -> Result<f64> {
    let total = dist.count();
    if total == 0 {
        return Err(Error::EmptyDistribution);
    }
    Ok(entropy_counts(dist.counts(), total))
}

/// Entropy of raw counts with a precomputed total. Internal hot path for
/// split search; callers guarantee `total > 0`.
pub(crate) fn entropy_counts(counts: &[u64], total: u64) -> f64 {
    debug_assert!(total > 0);
    let total = total as f64;
    let mut h = 0.0;
    for &c in counts {
        if c > 0 {
            let p = c as f64 / total;
            h -= p * p.log2();
        }
    }
    h
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entropy_pure_class_is_zero() {
        let d = LabelDistribution::from_counts(vec![4, 0]);
        assert_eq!(entropy(&d).unwrap(), 0.0);
    }

    #[test]
    fn entropy_uniform_binary_is_one() {
        let d = LabelDistribution::from_counts(vec![2, 2]);
        assert_eq!(entropy(&d).unwrap(), 1.0);
    }

    #[test]
    fn entropy_three_quarters() {
        let d = LabelDistribution::from_counts(vec![3, 1]);
        assert!((entropy(&d).unwrap() - 0.8112781).abs() < 1e-6);
    }

    #[test]
    fn entropy_empty_errors() {
        let d = LabelDistribution::empty(2);
        assert!(matches!(entropy(&d), Err(Error::EmptyDistribution)));
    }

    #[test]
    fn argmax_tie_breaks_low() {
        let d = LabelDistribution::from_counts(vec![0, 3, 3]);
        assert_eq!(d.argmax(), 1);
    }
}

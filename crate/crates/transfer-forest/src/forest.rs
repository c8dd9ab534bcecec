//! Random forests: induction configuration, weighted voting, prediction.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::dataset::{Dataset, FeatureKind, Schema, Value};
use crate::error::{Error, Result};
use crate::tree::{build_tree, Node, NodeKind};

/// How many candidate features each split draws, uniformly at random
/// without replacement.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FeatureSubsample {
    /// `ceil(log2(r))` features, the standard forest default.
    Log2,
    /// Every feature (plain greedy trees).
    All,
    Fixed(usize),
}

impl FeatureSubsample {
    /// Resolved count, clamped to `[1, r]`.
    pub fn resolve(&self, r: usize) -> usize {
        let k = match self {
            FeatureSubsample::Log2 => (r as f64).log2().ceil() as usize,
            FeatureSubsample::All => r,
            FeatureSubsample::Fixed(k) => *k,
        };
        k.clamp(1, r)
    }
}

#[derive(Debug, Clone)]
pub struct InductionConfig {
    pub tree_count: usize,
    pub feature_subsample: FeatureSubsample,
    pub min_samples_split: usize,
    pub max_depth: Option<usize>,
    /// Trees differ only via random feature subsets unless bootstrap
    /// resampling is switched on.
    pub bootstrap: bool,
    pub seed: u64,
}

impl Default for InductionConfig {
    fn default() -> Self {
        InductionConfig {
            tree_count: 50,
            feature_subsample: FeatureSubsample::Log2,
            min_samples_split: 2,
            max_depth: None,
            bootstrap: false,
            seed: 0,
        }
    }
}

impl InductionConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    fn validate(&self) -> Result<()> {
        if self.tree_count == 0 {
            return Err(Error::InvalidConfig("tree_count must be >= 1".into()));
        }
        if self.min_samples_split == 0 {
            return Err(Error::InvalidConfig("min_samples_split must be >= 1".into()));
        }
        Ok(())
    }
}

/// splitmix64 step; the basis for all derived seeds.
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Deterministically mixes a salt into a seed. Chained calls derive
/// independent streams for (seed, tree index, node path, ...), so results
/// do not depend on scheduling.
pub fn derive_seed(seed: u64, salt: u64) -> u64 {
    splitmix64(seed ^ splitmix64(salt.wrapping_add(0xA076_1D64_78BD_642F)))
}

pub(crate) fn rng_for(seed: u64, salt: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, salt))
}

/// Weighted collection of trees over a shared schema. Immutable after
/// construction and safe to share across threads.
#[derive(Debug, Clone)]
pub struct Forest {
    schema: Arc<Schema>,
    trees: Vec<Node>,
    weights: Vec<f64>,
    provenance: String,
}

impl Forest {
    /// Assembles a forest, validating weights (normalized if their sum is
    /// within 1e-9 of 1) and that every tree only references features and
    /// classes valid under the schema.
    pub fn new(
        schema: Arc<Schema>,
        trees: Vec<Node>,
        weights: Vec<f64>,
        provenance: impl Into<String>,
    ) -> Result<Self> {
        if trees.is_empty() {
            return Err(Error::Model("forest has no trees".into()));
        }
        if weights.len() != trees.len() {
            return Err(Error::Model(format!(
                "{} weights for {} trees",
                weights.len(),
                trees.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
            return Err(Error::Model("weights must be non-negative and finite".into()));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Model(format!("weights sum to {sum}, expected 1")));
        }
        for (t, tree) in trees.iter().enumerate() {
            validate_node(tree, &schema)
                .map_err(|e| Error::Model(format!("tree {t}: {e}")))?;
        }
        Ok(Forest {
            schema,
            trees,
            weights,
            provenance: provenance.into(),
        })
    }

    pub(crate) fn uniform_weights(n: usize) -> Vec<f64> {
        vec![1.0 / n as f64; n]
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn trees(&self) -> &[Node] {
        &self.trees
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn provenance(&self) -> &str {
        &self.provenance
    }

    pub fn tree_count(&self) -> usize {
        self.trees.len()
    }

    /// Same trees and weights under a different origin tag.
    pub fn with_provenance(mut self, provenance: impl Into<String>) -> Self {
        self.provenance = provenance.into();
        self
    }

    /// Replaces every tree through a fallible per-tree transform, applied
    /// in parallel, resetting weights to uniform.
    pub(crate) fn map_trees<F>(&self, provenance: &str, f: F) -> Result<Forest>
    where
        F: Fn(usize, &Node) -> Result<Node> + Sync,
    {
        let trees: Vec<Node> = self
            .trees
            .par_iter()
            .enumerate()
            .map(|(t, tree)| f(t, tree))
            .collect::<Result<_>>()?;
        Ok(Forest {
            schema: self.schema.clone(),
            weights: Forest::uniform_weights(trees.len()),
            trees,
            provenance: provenance.to_string(),
        })
    }

    pub(crate) fn with_weights(&self, weights: Vec<f64>, provenance: &str) -> Result<Forest> {
        Forest::new(
            self.schema.clone(),
            self.trees.clone(),
            weights,
            provenance,
        )
    }

    /// Per-class weighted vote shares for one row: each tree casts its
    /// leaf's majority class, weighted by the tree weight.
    pub(crate) fn vote_shares_unchecked(&self, row: &[Value]) -> Vec<f64> {
        let mut shares = vec![0.0; self.schema.class_count()];
        for (tree, &w) in self.trees.iter().zip(&self.weights) {
            shares[tree.predict_class(row)] += w;
        }
        shares
    }

    /// Predicts the class of one row along with the per-class weighted
    /// vote shares. Ties break to the lowest class id.
    pub fn predict(&self, row: &[Value]) -> Result<(usize, Vec<f64>)> {
        crate::dataset::validate_row(&self.schema, row)?;
        let shares = self.vote_shares_unchecked(row);
        Ok((argmax_shares(&shares), shares))
    }

    /// Vote shares for every row of a conforming dataset.
    pub fn vote_shares_dataset(&self, ds: &Dataset) -> Result<Vec<Vec<f64>>> {
        self.check_schema(ds)?;
        Ok(ds
            .all_indices()
            .par_iter()
            .map(|&i| self.vote_shares_unchecked(ds.row(i)))
            .collect())
    }

    /// Predicted classes for every row of a conforming dataset.
    pub fn predict_dataset(&self, ds: &Dataset) -> Result<Vec<usize>> {
        Ok(self
            .vote_shares_dataset(ds)?
            .iter()
            .map(|s| argmax_shares(s))
            .collect())
    }

    pub fn check_schema(&self, ds: &Dataset) -> Result<()> {
        if **ds.schema() != *self.schema {
            return Err(Error::SchemaMismatch(
                "dataset schema differs from forest schema".into(),
            ));
        }
        Ok(())
    }

    pub fn structurally_eq(&self, other: &Forest) -> bool {
        *self.schema == *other.schema
            && self.provenance == other.provenance
            && self.weights.len() == other.weights.len()
            && self
                .weights
                .iter()
                .zip(&other.weights)
                .all(|(a, b)| a.to_bits() == b.to_bits())
            && self.trees.len() == other.trees.len()
            && self
                .trees
                .iter()
                .zip(&other.trees)
                .all(|(a, b)| a.structurally_eq(b))
    }
}

pub(crate) fn argmax_shares(shares: &[f64]) -> usize {
    let mut best = 0;
    for (c, &s) in shares.iter().enumerate() {
        if s > shares[best] {
            best = c;
        }
    }
    best
}

pub(crate) fn validate_node(node: &Node, schema: &Schema) -> Result<()> {
    match &node.kind {
        NodeKind::Leaf { dist } => {
            if dist.len() != schema.class_count() {
                return Err(Error::Model(format!(
                    "leaf distribution over {} classes, schema has {}",
                    dist.len(),
                    schema.class_count()
                )));
            }
        }
        NodeKind::Numeric { feature, threshold, retained_left, retained_right, left, right } => {
            match schema.features.get(*feature).map(|f| &f.kind) {
                Some(FeatureKind::Numeric) => {}
                Some(_) => {
                    return Err(Error::Model(format!(
                        "numeric split on categorical feature {feature}"
                    )))
                }
                None => return Err(Error::Model(format!("no feature index {feature}"))),
            }
            if !threshold.is_finite() {
                return Err(Error::Model("non-finite threshold".into()));
            }
            for d in [retained_left, retained_right] {
                if d.len() != schema.class_count() {
                    return Err(Error::Model("retained distribution class count".into()));
                }
            }
            validate_node(left, schema)?;
            validate_node(right, schema)?;
        }
        NodeKind::Categorical { feature, children } => {
            let cardinality = match schema.features.get(*feature).map(|f| &f.kind) {
                Some(FeatureKind::Categorical { values }) => values.len(),
                Some(_) => {
                    return Err(Error::Model(format!(
                        "categorical split on numeric feature {feature}"
                    )))
                }
                None => return Err(Error::Model(format!("no feature index {feature}"))),
            };
            if children.len() != cardinality {
                return Err(Error::Model(format!(
                    "categorical node has {} children for {} categories",
                    children.len(),
                    cardinality
                )));
            }
            for c in children {
                validate_node(c, schema)?;
            }
        }
    }
    Ok(())
}

/// Induces `tree_count` independent trees; uniform weights. Each tree
/// consumes a random stream derived from `(config.seed, tree index)`, so
/// the forest is identical regardless of scheduling.
pub fn build_forest(ds: &Dataset, config: &InductionConfig) -> Result<Forest> {
    config.validate()?;
    if ds.is_empty() {
        return Err(Error::EmptySamples);
    }
    let trees: Vec<Node> = (0..config.tree_count)
        .into_par_iter()
        .map(|t| {
            let mut rng = rng_for(config.seed, t as u64);
            let idx = if config.bootstrap {
                let n = ds.len();
                (0..n).map(|_| rng.gen_range(0..n)).collect()
            } else {
                ds.all_indices()
            };
            build_tree(ds, &idx, config, &mut rng)
        })
        .collect::<Result<_>>()?;
    Forest::new(
        ds.schema().clone(),
        trees,
        Forest::uniform_weights(config.tree_count),
        "source-trained",
    )
}

/// Deterministic shuffle helper for sampling without replacement.
pub(crate) fn shuffled_indices<R: Rng>(n: usize, rng: &mut R) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(rng);
    idx
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Schema;

    fn two_feature_ds(n: usize, seed: u64) -> Dataset {
        let schema = Schema::numeric(&["x", "y"], &["0", "1"]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..n {
            let x: f64 = rng.gen();
            let y: f64 = rng.gen();
            rows.push(vec![Value::Num(x), Value::Num(y)]);
            labels.push(usize::from(x > 0.5));
        }
        Dataset::new(schema, rows, labels).unwrap()
    }

    #[test]
    fn single_tree_forest_matches_its_tree() {
        let ds = two_feature_ds(64, 9);
        let config = InductionConfig {
            tree_count: 1,
            ..Default::default()
        };
        let forest = build_forest(&ds, &config).unwrap();
        for i in 0..ds.len() {
            let (class, _) = forest.predict(ds.row(i)).unwrap();
            assert_eq!(class, forest.trees()[0].predict_class(ds.row(i)));
        }
    }

    #[test]
    fn different_seeds_give_different_forests() {
        let ds = two_feature_ds(64, 9);
        let a = build_forest(&ds, &InductionConfig::default().with_seed(1)).unwrap();
        let b = build_forest(&ds, &InductionConfig::default().with_seed(2)).unwrap();
        assert!(!a.structurally_eq(&b));
    }

    #[test]
    fn same_seed_is_deterministic() {
        let ds = two_feature_ds(64, 9);
        let a = build_forest(&ds, &InductionConfig::default().with_seed(7)).unwrap();
        let b = build_forest(&ds, &InductionConfig::default().with_seed(7)).unwrap();
        assert!(a.structurally_eq(&b));
    }

    #[test]
    fn weighted_vote_and_tie_break() {
        // Two single-leaf trees voting for classes 0 and 1.
        let schema = Schema::numeric(&["x"], &["0", "1", "2"]);
        let leaf = |class: usize| Node {
            id: 0,
            kind: NodeKind::Leaf {
                dist: crate::dist::LabelDistribution::from_counts(
                    (0..3).map(|c| u64::from(c == class)).collect(),
                ),
            },
        };
        let forest = Forest::new(
            schema.clone(),
            vec![leaf(0), leaf(1)],
            vec![0.7, 0.3],
            "test",
        )
        .unwrap();
        let (class, shares) = forest.predict(&[Value::Num(0.0)]).unwrap();
        assert_eq!(class, 0);
        assert_eq!(shares, vec![0.7, 0.3, 0.0]);

        // Tie between class 0 and class 2 resolves to class 0.
        let tied = Forest::new(schema, vec![leaf(2), leaf(0)], vec![0.5, 0.5], "test").unwrap();
        let (class, _) = tied.predict(&[Value::Num(0.0)]).unwrap();
        assert_eq!(class, 0);
    }

    #[test]
    fn predict_rejects_schema_mismatch() {
        let ds = two_feature_ds(16, 0);
        let forest = build_forest(&ds, &InductionConfig::default()).unwrap();
        assert!(forest.predict(&[Value::Num(0.1)]).is_err());
        assert!(forest
            .predict(&[Value::Num(0.1), Value::Cat(0)])
            .is_err());
    }
}

//! Non-transfer benchmarks and trivial tree-based transfer baselines.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::dist::LabelDistribution;
use crate::error::Result;
use crate::forest::{build_forest, Forest, InductionConfig};
use crate::ser::{reduce_tree, SerStats};
use crate::tree::{Node, NodeKind};

/// The source model, untouched: the floor any transfer method must beat.
pub fn src_only(forest: &Forest) -> Forest {
    forest.clone().with_provenance("src_only")
}

/// A fresh forest induced on the target sample alone: the traditional
/// skyline.
pub fn tgt_only(target: &Dataset, config: &InductionConfig) -> Result<Forest> {
    Ok(build_forest(target, config)?.with_provenance("tgt_only"))
}

/// Routes the target samples through each tree and replaces every leaf
/// distribution that receives a non-empty slice with the empirical
/// distribution of that slice. Structure and thresholds are untouched.
pub fn relabel(forest: &Forest, target: &Dataset) -> Result<Forest> {
    forest.check_schema(target)?;
    let idx = target.all_indices();
    forest.map_trees("relabel", |_, tree| Ok(relabel_node(tree, target, idx.clone())))
}

fn relabel_node(node: &Node, ds: &Dataset, idx: Vec<usize>) -> Node {
    match &node.kind {
        NodeKind::Leaf { dist } => {
            let dist = if idx.is_empty() {
                dist.clone()
            } else {
                LabelDistribution::from_counts(ds.label_counts(&idx))
            };
            Node {
                id: node.id,
                kind: NodeKind::Leaf { dist },
            }
        }
        NodeKind::Numeric { feature, threshold, retained_left, retained_right, left, right } => {
            let mut parts = node.partition(ds, &idx).into_iter();
            let left_part = parts.next().expect("left");
            let right_part = parts.next().expect("right");
            Node {
                id: node.id,
                kind: NodeKind::Numeric {
                    feature: *feature,
                    threshold: *threshold,
                    retained_left: retained_left.clone(),
                    retained_right: retained_right.clone(),
                    left: Box::new(relabel_node(left, ds, left_part)),
                    right: Box::new(relabel_node(right, ds, right_part)),
                },
            }
        }
        NodeKind::Categorical { feature, children } => {
            let parts = node.partition(ds, &idx);
            Node {
                id: node.id,
                kind: NodeKind::Categorical {
                    feature: *feature,
                    children: children
                        .iter()
                        .zip(parts)
                        .map(|(c, part)| relabel_node(c, ds, part))
                        .collect(),
                },
            }
        }
    }
}

/// How per-tree target accuracy turns into vote weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BiasScheme {
    /// Weight proportional to accuracy, floored at 1e-6.
    Accuracy,
    /// Weight proportional to `exp(-beta * error rate)`.
    SoftmaxNegError { beta: f64 },
}

impl Default for BiasScheme {
    fn default() -> Self {
        BiasScheme::Accuracy
    }
}

const ACCURACY_FLOOR: f64 = 1e-6;

/// Reweights the vote toward trees with lower error on the target sample.
/// Structure untouched.
pub fn bias(forest: &Forest, target: &Dataset, scheme: BiasScheme) -> Result<Forest> {
    forest.check_schema(target)?;
    let idx = target.all_indices();
    let raw: Vec<f64> = forest
        .trees()
        .par_iter()
        .map(|tree| {
            let errors = tree.count_errors(target, &idx);
            let error_rate = errors as f64 / idx.len().max(1) as f64;
            match scheme {
                BiasScheme::Accuracy => (1.0 - error_rate).max(ACCURACY_FLOOR),
                BiasScheme::SoftmaxNegError { beta } => (-beta * error_rate).exp(),
            }
        })
        .collect();
    let total: f64 = raw.iter().sum();
    let weights: Vec<f64> = raw.iter().map(|w| w / total).collect();
    let provenance = match scheme {
        BiasScheme::Accuracy => "bias(accuracy)",
        BiasScheme::SoftmaxNegError { .. } => "bias(softmax)",
    };
    forest.with_weights(weights, provenance)
}

/// Reduction-only pruning: collapses any subtree whose routed target
/// samples are classified worse than their majority label would be, and
/// nothing else. Leaves keep their source distributions.
pub fn prune(forest: &Forest, target: &Dataset) -> Result<Forest> {
    prune_with_stats(forest, target).map(|(f, _)| f)
}

pub fn prune_with_stats(forest: &Forest, target: &Dataset) -> Result<(Forest, Vec<SerStats>)> {
    forest.check_schema(target)?;
    let idx = target.all_indices();
    let results: Vec<(Node, SerStats)> = forest
        .trees()
        .par_iter()
        .map(|tree| reduce_tree(tree, target, &idx))
        .collect::<Result<_>>()?;
    let (trees, stats): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let out = Forest::new(
        forest.schema().clone(),
        trees,
        Forest::uniform_weights(forest.tree_count()),
        "prune",
    )?;
    Ok((out, stats))
}

//! Structure expansion/reduction (SER).
//!
//! One depth-first pass per tree over the routed target samples. At each
//! source leaf the pass grows a subtree fit to the samples reaching it
//! (expansion). After the recursion returns from an internal node's
//! children, the node is collapsed into a majority-label leaf when that
//! leaf would misclassify strictly fewer of its routed samples than the
//! current subtree does (reduction). Expansion precedes reduction by
//! construction: reductions happen only at source-internal nodes, so the
//! output model stays prefix-comparable with the source rules.
//!
//! Leaf decisions change only where the pass creates leaves: grown
//! subtrees carry their fitted distributions and collapsed nodes take
//! their slice majority, while a leaf whose samples grew nothing (pure,
//! too few, or inseparable) keeps its source decision. Retained decisions
//! that misclassify their slice are what give the reduction comparison
//! traction against structure that turned into noise in the target
//! domain.

use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::dist::LabelDistribution;
use crate::error::Result;
use crate::forest::{derive_seed, rng_for, Forest, InductionConfig};
use crate::tree::{build_subtree, Node, NodeKind};

/// Counters describing what one SER pass did to one tree.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SerStats {
    /// Leaves replaced by a grown subtree.
    pub expanded_leaves: usize,
    /// Internal nodes collapsed into leaves.
    pub reduced_nodes: usize,
    pub nodes_before: usize,
    pub nodes_after: usize,
}

impl SerStats {
    pub fn merged(self, other: SerStats) -> SerStats {
        SerStats {
            expanded_leaves: self.expanded_leaves + other.expanded_leaves,
            reduced_nodes: self.reduced_nodes + other.reduced_nodes,
            nodes_before: self.nodes_before + other.nodes_before,
            nodes_after: self.nodes_after + other.nodes_after,
        }
    }
}

/// Errors the slice majority label would make: `|S| - majority count`.
/// Zero on an empty slice.
pub fn leaf_error(ds: &Dataset, idx: &[usize]) -> usize {
    if idx.is_empty() {
        return 0;
    }
    let counts = ds.label_counts(idx);
    idx.len() - *counts.iter().max().expect("non-empty counts") as usize
}

/// Misclassifications of the slice routed through the subtree as it
/// currently stands.
pub fn subtree_error(node: &Node, ds: &Dataset, idx: &[usize]) -> usize {
    node.count_errors(ds, idx)
}

struct SerPass<'a> {
    ds: &'a Dataset,
    /// Expansion configuration and the tree-level seed; `None` disables
    /// expansion (the reduction-only pruning baseline).
    expansion: Option<(&'a InductionConfig, u64)>,
    next_id: u32,
    stats: SerStats,
}

/// Applies SER to one tree. Per-node expansion seeds derive from
/// `(config.seed, tree_index, node path)`, so the result is a pure
/// function of (tree, samples, config).
pub fn ser_tree(
    root: &Node,
    ds: &Dataset,
    idx: &[usize],
    config: &InductionConfig,
    tree_index: usize,
) -> Result<(Node, SerStats)> {
    let tree_seed = derive_seed(config.seed, 0x5345_5200 | tree_index as u64);
    run_pass(root, ds, idx, Some((config, tree_seed)))
}

/// SER with expansion disabled: the reduction step alone, used by the
/// pruning baseline.
pub(crate) fn reduce_tree(root: &Node, ds: &Dataset, idx: &[usize]) -> Result<(Node, SerStats)> {
    run_pass(root, ds, idx, None)
}

fn run_pass(
    root: &Node,
    ds: &Dataset,
    idx: &[usize],
    expansion: Option<(&InductionConfig, u64)>,
) -> Result<(Node, SerStats)> {
    let mut pass = SerPass {
        ds,
        expansion,
        next_id: root.max_id() + 1,
        stats: SerStats {
            nodes_before: root.node_count(),
            ..Default::default()
        },
    };
    let out = pass.walk(root, idx.to_vec(), 0);
    pass.stats.nodes_after = out.node_count();
    Ok((out, pass.stats))
}

impl SerPass<'_> {
    fn walk(&mut self, node: &Node, idx: Vec<usize>, path: u64) -> Node {
        match &node.kind {
            NodeKind::Leaf { .. } => {
                let Some((config, tree_seed)) = self.expansion else {
                    return node.clone();
                };
                if idx.is_empty() {
                    // No target evidence; the source leaf is all we have.
                    return node.clone();
                }
                let mut rng = rng_for(tree_seed, path);
                let built = build_subtree(self.ds, &idx, config, &mut rng, &mut self.next_id, 0);
                if built.is_leaf() {
                    // Nothing grew (pure, too small, or inseparable).
                    // Leaf decisions change only where the pass creates
                    // them, so the source leaf stands; if it misclassifies
                    // its slice, the ancestors' reduction comparisons
                    // adjudicate.
                    return node.clone();
                }
                self.stats.expanded_leaves += 1;
                built
            }
            _ => {
                let parts = node.partition(self.ds, &idx);
                let children: Vec<Node> = parts
                    .into_iter()
                    .enumerate()
                    .map(|(i, part)| {
                        let child = node.children()[i];
                        self.walk(child, part, derive_seed(path, i as u64 + 1))
                    })
                    .collect();
                let rebuilt = rebuild(node, children);
                if !idx.is_empty() {
                    let le = leaf_error(self.ds, &idx);
                    let se = subtree_error(&rebuilt, self.ds, &idx);
                    if le < se {
                        self.stats.reduced_nodes += 1;
                        return Node {
                            id: node.id,
                            kind: NodeKind::Leaf {
                                dist: LabelDistribution::from_counts(self.ds.label_counts(&idx)),
                            },
                        };
                    }
                }
                rebuilt
            }
        }
    }
}

fn rebuild(node: &Node, mut children: Vec<Node>) -> Node {
    let kind = match &node.kind {
        NodeKind::Leaf { .. } => unreachable!("rebuild on leaf"),
        NodeKind::Numeric { feature, threshold, retained_left, retained_right, .. } => {
            let right = children.pop().expect("two children");
            let left = children.pop().expect("two children");
            NodeKind::Numeric {
                feature: *feature,
                threshold: *threshold,
                retained_left: retained_left.clone(),
                retained_right: retained_right.clone(),
                left: Box::new(left),
                right: Box::new(right),
            }
        }
        NodeKind::Categorical { feature, .. } => NodeKind::Categorical {
            feature: *feature,
            children,
        },
    };
    Node { id: node.id, kind }
}

/// Applies [`ser_tree`] to every tree independently; uniform weights.
pub fn ser_forest(forest: &Forest, target: &Dataset, config: &InductionConfig) -> Result<Forest> {
    ser_forest_with_stats(forest, target, config).map(|(f, _)| f)
}

pub fn ser_forest_with_stats(
    forest: &Forest,
    target: &Dataset,
    config: &InductionConfig,
) -> Result<(Forest, Vec<SerStats>)> {
    forest.check_schema(target)?;
    let idx = target.all_indices();
    let results: Vec<(Node, SerStats)> = forest
        .trees()
        .par_iter()
        .enumerate()
        .map(|(t, tree)| ser_tree(tree, target, &idx, config, t))
        .collect::<Result<_>>()?;
    let (trees, stats): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    let out = Forest::new(
        forest.schema().clone(),
        trees,
        Forest::uniform_weights(forest.tree_count()),
        "ser",
    )?;
    Ok((out, stats))
}

//! Decision-tree nodes, routing, the information-gain kernel, and greedy
//! tree induction.
//!
//! Numeric split nodes retain the label distributions of the training
//! samples routed left and right at induction time; threshold refitting
//! relies on them later, so they are part of the model proper and survive
//! serialization.

use rand::Rng;

use crate::dataset::{Dataset, FeatureKind, Value};
use crate::dist::{entropy_counts, LabelDistribution};
use crate::error::{Error, Result};
use crate::forest::InductionConfig;

/// A decision-tree node. Ids are unique within a tree and stable across
/// transfer passes, which lets tests map surviving nodes back to their
/// source originals; they are not serialized.
#[derive(Debug, Clone)]
pub struct Node {
    pub(crate) id: u32,
    pub kind: NodeKind,
}

#[derive(Debug, Clone)]
pub enum NodeKind {
    Leaf {
        dist: LabelDistribution,
    },
    /// Binary split on a numeric feature: left takes `value <= threshold`.
    Numeric {
        feature: usize,
        threshold: f64,
        retained_left: LabelDistribution,
        retained_right: LabelDistribution,
        left: Box<Node>,
        right: Box<Node>,
    },
    /// Multiway split on a categorical feature, one child per category.
    Categorical {
        feature: usize,
        children: Vec<Node>,
    },
}

/// One root-to-leaf path constraint, for rule extraction.
#[derive(Debug, Clone, Copy)]
pub enum Literal {
    Le { feature: usize, threshold: f64 },
    Gt { feature: usize, threshold: f64 },
    Eq { feature: usize, category: u32 },
}

impl PartialEq for Literal {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Literal::Le { feature: f1, threshold: t1 }, Literal::Le { feature: f2, threshold: t2 }) => {
                f1 == f2 && t1.to_bits() == t2.to_bits()
            }
            (Literal::Gt { feature: f1, threshold: t1 }, Literal::Gt { feature: f2, threshold: t2 }) => {
                f1 == f2 && t1.to_bits() == t2.to_bits()
            }
            (Literal::Eq { feature: f1, category: c1 }, Literal::Eq { feature: f2, category: c2 }) => {
                f1 == f2 && c1 == c2
            }
            _ => false,
        }
    }
}

impl Node {
    pub fn id(&self) -> u32 {
        self.id
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self.kind, NodeKind::Leaf { .. })
    }

    pub fn leaf_dist(&self) -> Option<&LabelDistribution> {
        match &self.kind {
            NodeKind::Leaf { dist } => Some(dist),
            _ => None,
        }
    }

    pub fn children(&self) -> Vec<&Node> {
        match &self.kind {
            NodeKind::Leaf { .. } => Vec::new(),
            NodeKind::Numeric { left, right, .. } => vec![left, right],
            NodeKind::Categorical { children, .. } => children.iter().collect(),
        }
    }

    pub fn node_count(&self) -> usize {
        1 + self.children().iter().map(|c| c.node_count()).sum::<usize>()
    }

    pub(crate) fn max_id(&self) -> u32 {
        self.children()
            .iter()
            .map(|c| c.max_id())
            .fold(self.id, u32::max)
    }

    /// Reassigns ids in depth-first preorder starting from `*next`.
    pub(crate) fn assign_ids(&mut self, next: &mut u32) {
        self.id = *next;
        *next += 1;
        match &mut self.kind {
            NodeKind::Leaf { .. } => {}
            NodeKind::Numeric { left, right, .. } => {
                left.assign_ids(next);
                right.assign_ids(next);
            }
            NodeKind::Categorical { children, .. } => {
                for c in children {
                    c.assign_ids(next);
                }
            }
        }
    }

    /// Index of the child a row is routed to. Must not be called on a leaf.
    pub(crate) fn child_index(&self, row: &[Value]) -> usize {
        match &self.kind {
            NodeKind::Leaf { .. } => unreachable!("child_index on leaf"),
            NodeKind::Numeric { feature, threshold, .. } => {
                let v = row[*feature].as_num().expect("numeric feature value");
                usize::from(!(v <= *threshold))
            }
            NodeKind::Categorical { feature, .. } => {
                row[*feature].as_cat().expect("categorical feature value") as usize
            }
        }
    }

    /// Routes a row to the leaf at the end of its path.
    pub fn route(&self, row: &[Value]) -> &Node {
        let mut node = self;
        while !node.is_leaf() {
            let i = node.child_index(row);
            node = match &node.kind {
                NodeKind::Numeric { left, right, .. } => {
                    if i == 0 {
                        left
                    } else {
                        right
                    }
                }
                NodeKind::Categorical { children, .. } => &children[i],
                NodeKind::Leaf { .. } => unreachable!(),
            };
        }
        node
    }

    /// Class predicted for a row: majority class of the reached leaf.
    pub fn predict_class(&self, row: &[Value]) -> usize {
        self.route(row)
            .leaf_dist()
            .expect("route ends at leaf")
            .argmax()
    }

    /// Misclassification count of this (sub)tree over a sample slice.
    pub fn count_errors(&self, ds: &Dataset, idx: &[usize]) -> usize {
        idx.iter()
            .filter(|&&i| self.predict_class(ds.row(i)) != ds.label(i))
            .count()
    }

    /// Splits a sample slice among this node's children.
    pub(crate) fn partition(&self, ds: &Dataset, idx: &[usize]) -> Vec<Vec<usize>> {
        let n_children = self.children().len();
        let mut parts = vec![Vec::new(); n_children];
        for &i in idx {
            parts[self.child_index(ds.row(i))].push(i);
        }
        parts
    }

    /// Count-weighted union of all leaf distributions under this node,
    /// i.e. the empirical distribution of the training samples that
    /// reached the subtree.
    pub fn aggregate_leaf_counts(&self) -> LabelDistribution {
        match &self.kind {
            NodeKind::Leaf { dist } => dist.clone(),
            _ => {
                let mut acc: Option<LabelDistribution> = None;
                for c in self.children() {
                    let d = c.aggregate_leaf_counts();
                    acc = Some(match acc {
                        None => d,
                        Some(a) => a.merged(&d),
                    });
                }
                acc.expect("internal node has children")
            }
        }
    }

    /// All root-to-leaf literal sequences (the tree's rules).
    pub fn path_literals(&self) -> Vec<Vec<Literal>> {
        let mut out = Vec::new();
        let mut prefix = Vec::new();
        self.collect_paths(&mut prefix, &mut out);
        out
    }

    fn collect_paths(&self, prefix: &mut Vec<Literal>, out: &mut Vec<Vec<Literal>>) {
        match &self.kind {
            NodeKind::Leaf { .. } => out.push(prefix.clone()),
            NodeKind::Numeric { feature, threshold, left, right, .. } => {
                prefix.push(Literal::Le { feature: *feature, threshold: *threshold });
                left.collect_paths(prefix, out);
                prefix.pop();
                prefix.push(Literal::Gt { feature: *feature, threshold: *threshold });
                right.collect_paths(prefix, out);
                prefix.pop();
            }
            NodeKind::Categorical { feature, children } => {
                for (c, child) in children.iter().enumerate() {
                    prefix.push(Literal::Eq { feature: *feature, category: c as u32 });
                    child.collect_paths(prefix, out);
                    prefix.pop();
                }
            }
        }
    }

    /// Structural equality: same shape, split parameters (thresholds
    /// bit-exact), and distributions. Node ids are ignored.
    pub fn structurally_eq(&self, other: &Node) -> bool {
        match (&self.kind, &other.kind) {
            (NodeKind::Leaf { dist: a }, NodeKind::Leaf { dist: b }) => a == b,
            (
                NodeKind::Numeric {
                    feature: f1,
                    threshold: t1,
                    retained_left: rl1,
                    retained_right: rr1,
                    left: l1,
                    right: r1,
                },
                NodeKind::Numeric {
                    feature: f2,
                    threshold: t2,
                    retained_left: rl2,
                    retained_right: rr2,
                    left: l2,
                    right: r2,
                },
            ) => {
                f1 == f2
                    && t1.to_bits() == t2.to_bits()
                    && rl1 == rl2
                    && rr1 == rr2
                    && l1.structurally_eq(l2)
                    && r1.structurally_eq(r2)
            }
            (
                NodeKind::Categorical { feature: f1, children: c1 },
                NodeKind::Categorical { feature: f2, children: c2 },
            ) => {
                f1 == f2
                    && c1.len() == c2.len()
                    && c1.iter().zip(c2).all(|(a, b)| a.structurally_eq(b))
            }
            _ => false,
        }
    }
}

/// Information gain, in bits, of splitting a sample slice on a numeric
/// feature at a threshold: parent entropy minus size-weighted child
/// entropies. Clamped to `[0, parent entropy]` against rounding.
pub fn information_gain(
    ds: &Dataset,
    idx: &[usize],
    feature: usize,
    threshold: f64,
) -> Result<f64> {
    if idx.is_empty() {
        return Err(Error::EmptySamples);
    }
    if !ds.schema().features[feature].kind.is_numeric() {
        return Err(Error::NumericFeatureRequired(feature));
    }
    let class_count = ds.schema().class_count();
    let mut left = vec![0u64; class_count];
    let mut right = vec![0u64; class_count];
    for &i in idx {
        let v = ds.value(i, feature).as_num().expect("numeric");
        if v <= threshold {
            left[ds.label(i)] += 1;
        } else {
            right[ds.label(i)] += 1;
        }
    }
    let total = idx.len() as u64;
    let parent = ds.label_counts(idx);
    Ok(gain_from_counts(&parent, total, &left, &right))
}

pub(crate) fn gain_from_counts(parent: &[u64], total: u64, left: &[u64], right: &[u64]) -> f64 {
    let n = total as f64;
    let nl: u64 = left.iter().sum();
    let nr: u64 = right.iter().sum();
    let h_parent = entropy_counts(parent, total);
    let mut gain = h_parent;
    if nl > 0 {
        gain -= nl as f64 / n * entropy_counts(left, nl);
    }
    if nr > 0 {
        gain -= nr as f64 / n * entropy_counts(right, nr);
    }
    gain.clamp(0.0, h_parent)
}

/// Candidate thresholds for a numeric feature over a slice: midpoints of
/// consecutive distinct sorted values. Returns sorted `(value, label)`
/// pairs too so callers can sweep counts incrementally.
pub(crate) fn sorted_feature_values(
    ds: &Dataset,
    idx: &[usize],
    feature: usize,
) -> Vec<(f64, usize)> {
    let mut pairs: Vec<(f64, usize)> = idx
        .iter()
        .map(|&i| (ds.value(i, feature).as_num().expect("numeric"), ds.label(i)))
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).expect("finite values"));
    pairs
}

struct BestSplit {
    feature: usize,
    gain: f64,
    kind: BestSplitKind,
}

enum BestSplitKind {
    Numeric { threshold: f64 },
    Categorical,
}

/// Greedy IG-maximizing induction over a feature subset drawn per node.
///
/// Recursion stops on purity, `min_samples_split`, `max_depth`, or when
/// the drawn features admit no candidate split (constant numeric values,
/// single populated category); the node then becomes a leaf holding the
/// empirical label distribution of its slice. Zero-gain splits are taken
/// when nothing better exists: parity concepts need them, and every
/// candidate split strictly partitions its slice so recursion terminates
/// regardless.
pub fn build_tree<R: Rng>(
    ds: &Dataset,
    idx: &[usize],
    config: &InductionConfig,
    rng: &mut R,
) -> Result<Node> {
    if idx.is_empty() {
        return Err(Error::EmptySamples);
    }
    let mut next_id = 0;
    Ok(build_subtree(ds, idx, config, rng, &mut next_id, 0))
}

/// Induction entry point used by expansion passes, which graft subtrees
/// into an existing tree and must keep ids unique.
pub(crate) fn build_subtree<R: Rng>(
    ds: &Dataset,
    idx: &[usize],
    config: &InductionConfig,
    rng: &mut R,
    next_id: &mut u32,
    depth: usize,
) -> Node {
    debug_assert!(!idx.is_empty());
    let counts = ds.label_counts(idx);
    let id = *next_id;
    *next_id += 1;
    let leaf = |counts: Vec<u64>| Node {
        id,
        kind: NodeKind::Leaf {
            dist: LabelDistribution::from_counts(counts),
        },
    };

    let pure = counts.iter().filter(|&&c| c > 0).count() <= 1;
    let depth_capped = config.max_depth.is_some_and(|d| depth >= d);
    if pure || idx.len() < config.min_samples_split || depth_capped {
        return leaf(counts);
    }

    let features = sample_features(ds.schema().feature_count(), config, rng);
    let best = best_split(ds, idx, &counts, &features);
    let Some(best) = best else {
        return leaf(counts);
    };

    match best.kind {
        BestSplitKind::Numeric { threshold } => {
            let feature = best.feature;
            let (mut left_idx, mut right_idx) = (Vec::new(), Vec::new());
            for &i in idx {
                if ds.value(i, feature).as_num().expect("numeric") <= threshold {
                    left_idx.push(i);
                } else {
                    right_idx.push(i);
                }
            }
            let retained_left = LabelDistribution::from_counts(ds.label_counts(&left_idx));
            let retained_right = LabelDistribution::from_counts(ds.label_counts(&right_idx));
            let left = build_subtree(ds, &left_idx, config, rng, next_id, depth + 1);
            let right = build_subtree(ds, &right_idx, config, rng, next_id, depth + 1);
            Node {
                id,
                kind: NodeKind::Numeric {
                    feature,
                    threshold,
                    retained_left,
                    retained_right,
                    left: Box::new(left),
                    right: Box::new(right),
                },
            }
        }
        BestSplitKind::Categorical => {
            let feature = best.feature;
            let cardinality = ds.schema().features[feature].kind.cardinality();
            let mut parts = vec![Vec::new(); cardinality];
            for &i in idx {
                parts[ds.value(i, feature).as_cat().expect("categorical") as usize].push(i);
            }
            let children = parts
                .iter()
                .map(|part| {
                    if part.is_empty() {
                        // Unpopulated category: fall back to the parent's
                        // distribution so routing always ends at a leaf
                        // with mass.
                        let child_id = *next_id;
                        *next_id += 1;
                        Node {
                            id: child_id,
                            kind: NodeKind::Leaf {
                                dist: LabelDistribution::from_counts(counts.clone()),
                            },
                        }
                    } else {
                        build_subtree(ds, part, config, rng, next_id, depth + 1)
                    }
                })
                .collect();
            Node {
                id,
                kind: NodeKind::Categorical { feature, children },
            }
        }
    }
}

fn sample_features<R: Rng>(r: usize, config: &InductionConfig, rng: &mut R) -> Vec<usize> {
    let k = config.feature_subsample.resolve(r);
    let mut features = rand::seq::index::sample(rng, r, k).into_vec();
    // Canonical order so gain ties resolve to the lowest feature index.
    features.sort_unstable();
    features
}

fn best_split(
    ds: &Dataset,
    idx: &[usize],
    parent_counts: &[u64],
    features: &[usize],
) -> Option<BestSplit> {
    let class_count = ds.schema().class_count();
    let mut best: Option<BestSplit> = None;
    for &feature in features {
        let candidate = match &ds.schema().features[feature].kind {
            FeatureKind::Numeric => {
                best_numeric_split(ds, idx, feature, parent_counts, class_count).map(
                    |(threshold, gain)| BestSplit {
                        feature,
                        gain,
                        kind: BestSplitKind::Numeric { threshold },
                    },
                )
            }
            FeatureKind::Categorical { values } => {
                categorical_gain(ds, idx, feature, parent_counts, values.len(), class_count).map(
                    |gain| BestSplit {
                        feature,
                        gain,
                        kind: BestSplitKind::Categorical,
                    },
                )
            }
        };
        if let Some(c) = candidate {
            if best.as_ref().is_none_or(|b| c.gain > b.gain) {
                best = Some(c);
            }
        }
    }
    best
}

/// Best midpoint threshold by IG for one numeric feature; ties go to the
/// smaller threshold. `None` when the feature is constant on the slice.
fn best_numeric_split(
    ds: &Dataset,
    idx: &[usize],
    feature: usize,
    parent_counts: &[u64],
    class_count: usize,
) -> Option<(f64, f64)> {
    let pairs = sorted_feature_values(ds, idx, feature);
    let total = pairs.len() as u64;
    let mut left = vec![0u64; class_count];
    let mut right = parent_counts.to_vec();
    let mut best: Option<(f64, f64)> = None;
    for w in 0..pairs.len() - 1 {
        let (v, label) = pairs[w];
        left[label] += 1;
        right[label] -= 1;
        let next_v = pairs[w + 1].0;
        if v == next_v {
            continue;
        }
        let threshold = midpoint(v, next_v);
        let gain = gain_from_counts(parent_counts, total, &left, &right);
        if best.as_ref().is_none_or(|&(_, g)| gain > g) {
            best = Some((threshold, gain));
        }
    }
    best
}

pub(crate) fn midpoint(a: f64, b: f64) -> f64 {
    a + (b - a) / 2.0
}

/// Gain of the full multiway categorical partition; `None` when fewer than
/// two categories are populated (no partition happens).
fn categorical_gain(
    ds: &Dataset,
    idx: &[usize],
    feature: usize,
    parent_counts: &[u64],
    cardinality: usize,
    class_count: usize,
) -> Option<f64> {
    let mut per_cat = vec![vec![0u64; class_count]; cardinality];
    for &i in idx {
        let c = ds.value(i, feature).as_cat().expect("categorical") as usize;
        per_cat[c][ds.label(i)] += 1;
    }
    let populated = per_cat
        .iter()
        .filter(|counts| counts.iter().any(|&n| n > 0))
        .count();
    if populated < 2 {
        return None;
    }
    let total = idx.len() as u64;
    let n = total as f64;
    let h_parent = entropy_counts(parent_counts, total);
    let mut gain = h_parent;
    for counts in &per_cat {
        let nc: u64 = counts.iter().sum();
        if nc > 0 {
            gain -= nc as f64 / n * entropy_counts(counts, nc);
        }
    }
    Some(gain.clamp(0.0, h_parent))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Schema;
    use crate::forest::FeatureSubsample;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn numeric_ds(rows: &[(f64, usize)]) -> Dataset {
        let schema = Schema::numeric(&["x"], &["0", "1"]);
        Dataset::new(
            schema,
            rows.iter().map(|&(v, _)| vec![Value::Num(v)]).collect(),
            rows.iter().map(|&(_, y)| y).collect(),
        )
        .unwrap()
    }

    fn config_all_features() -> InductionConfig {
        InductionConfig {
            feature_subsample: FeatureSubsample::All,
            ..InductionConfig::default()
        }
    }

    #[test]
    fn ig_perfect_split_is_one_bit() {
        let ds = numeric_ds(&[(1.0, 1), (2.0, 1), (3.0, 0), (4.0, 0)]);
        let idx = ds.all_indices();
        let ig = information_gain(&ds, &idx, 0, 2.5).unwrap();
        assert!((ig - 1.0).abs() < 1e-12);
    }

    #[test]
    fn ig_one_sided_split_is_zero() {
        let ds = numeric_ds(&[(1.0, 1), (2.0, 1), (3.0, 0), (4.0, 0)]);
        let idx = ds.all_indices();
        let ig = information_gain(&ds, &idx, 0, 10.0).unwrap();
        assert_eq!(ig, 0.0);
    }

    #[test]
    fn ig_isolating_single_minority() {
        // Three positives, one negative; threshold isolates the negative:
        // child entropies vanish so IG equals the parent entropy.
        let ds = numeric_ds(&[(1.0, 0), (2.0, 1), (3.0, 1), (4.0, 1)]);
        let idx = ds.all_indices();
        let ig = information_gain(&ds, &idx, 0, 1.5).unwrap();
        assert!((ig - 0.8112781).abs() < 1e-6);
    }

    #[test]
    fn ig_rejects_categorical_feature() {
        let schema = crate::dataset::Schema::new(
            vec![crate::dataset::FeatureDef {
                name: "c".into(),
                kind: FeatureKind::Categorical {
                    values: vec!["a".into(), "b".into()],
                },
            }],
            vec!["0".into(), "1".into()],
        )
        .unwrap();
        let ds = Dataset::new(schema, vec![vec![Value::Cat(0)]], vec![0]).unwrap();
        assert!(matches!(
            information_gain(&ds, &[0], 0, 0.5),
            Err(Error::NumericFeatureRequired(0))
        ));
    }

    #[test]
    fn ig_empty_slice_errors() {
        let ds = numeric_ds(&[(1.0, 0)]);
        assert!(matches!(
            information_gain(&ds, &[], 0, 0.5),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn build_tree_pure_samples_single_leaf() {
        let ds = numeric_ds(&[(1.0, 1), (2.0, 1), (3.0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = build_tree(&ds, &ds.all_indices(), &config_all_features(), &mut rng).unwrap();
        assert!(tree.is_leaf());
        let dist = tree.leaf_dist().unwrap();
        assert_eq!(dist.argmax(), 1);
        assert_eq!(dist.probs()[1], 1.0);
    }

    #[test]
    fn build_tree_empty_errors() {
        let ds = numeric_ds(&[(1.0, 0)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert!(matches!(
            build_tree(&ds, &[], &config_all_features(), &mut rng),
            Err(Error::EmptySamples)
        ));
    }

    #[test]
    fn build_tree_xor_depth_two_zero_error() {
        // XOR over two features needs depth 2 and fits the four rows
        // exactly with greedy IG splits.
        let schema = Schema::numeric(&["a", "b"], &["0", "1"]);
        let rows = vec![
            vec![Value::Num(0.0), Value::Num(0.0)],
            vec![Value::Num(0.0), Value::Num(1.0)],
            vec![Value::Num(1.0), Value::Num(0.0)],
            vec![Value::Num(1.0), Value::Num(1.0)],
        ];
        let labels = vec![0, 1, 1, 0];
        let ds = Dataset::new(schema, rows, labels).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tree = build_tree(&ds, &ds.all_indices(), &config_all_features(), &mut rng).unwrap();
        assert_eq!(tree.count_errors(&ds, &ds.all_indices()), 0);
        // Root plus two stumps.
        assert_eq!(tree.node_count(), 7);
    }

    #[test]
    fn numeric_nodes_retain_split_distributions() {
        let ds = numeric_ds(&[(1.0, 0), (2.0, 0), (3.0, 1), (4.0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let tree = build_tree(&ds, &ds.all_indices(), &config_all_features(), &mut rng).unwrap();
        match &tree.kind {
            NodeKind::Numeric { threshold, retained_left, retained_right, .. } => {
                assert!((threshold - 2.5).abs() < 1e-12);
                assert_eq!(retained_left.counts(), &[2, 0]);
                assert_eq!(retained_right.counts(), &[0, 2]);
            }
            _ => panic!("expected numeric root"),
        }
    }

    #[test]
    fn ids_unique_in_preorder() {
        let ds = numeric_ds(&[(1.0, 0), (2.0, 1), (3.0, 0), (4.0, 1)]);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let tree = build_tree(&ds, &ds.all_indices(), &config_all_features(), &mut rng).unwrap();
        let mut ids = Vec::new();
        fn walk(n: &Node, ids: &mut Vec<u32>) {
            ids.push(n.id());
            for c in n.children() {
                walk(c, ids);
            }
        }
        walk(&tree, &mut ids);
        let mut sorted = ids.clone();
        sorted.sort_unstable();
        sorted.dedup();
        assert_eq!(sorted.len(), ids.len());
        assert_eq!(ids[0], 0);
    }
}

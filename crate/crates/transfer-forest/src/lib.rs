//! Decision-forest model transfer.
//!
//! A forest trained on a source domain is adapted to a target domain using
//! only a small labeled target sample. Three transfer passes are provided:
//!
//! - **SER** (structure expansion/reduction): grow subtrees under source
//!   leaves from target data, then collapse subtrees whose majority-label
//!   leaf would err less.
//! - **STRUT** (structure transfer): keep the tree topology, refit every
//!   numeric threshold by maximizing divergence gain over local
//!   information-gain maxima, pruning unreachable subtrees.
//! - **MIX**: the uniform-vote union of the SER and STRUT forests.
//!
//! The crate also ships the trivial transfer baselines (leaf relabeling,
//! accuracy-biased voting, reduction-only pruning), PAC-Bayes ensemble
//! diagnostics (Gibbs/Bayes risk, disagreement, joint error, C-bound,
//! margin CDFs), a family of synthetic concept-drift challenges over the
//! unit cube, and a reproducible benchmark harness.

pub mod baselines;
pub mod bench;
pub mod csv_io;
pub mod dataset;
pub mod dist;
pub mod error;
pub mod forest;
pub mod metrics;
pub mod mix;
pub mod model;
pub mod ser;
pub mod strut;
pub mod synth;
pub mod tree;

pub use dataset::{Dataset, FeatureDef, FeatureKind, Schema, Value};
pub use dist::{entropy, LabelDistribution};
pub use error::{Error, Result};
pub use forest::{build_forest, derive_seed, FeatureSubsample, Forest, InductionConfig};
pub use tree::{build_tree, information_gain, Literal, Node, NodeKind};

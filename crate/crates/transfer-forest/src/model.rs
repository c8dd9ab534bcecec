//! Versioned JSON model files.
//!
//! Top level: `{version, schema, provenance, weights, trees}`. Nodes nest
//! as `{kind, feature, threshold, retained_left: {counts}, retained_right:
//! {counts}, children | leaf_counts}`. Distributions are stored as integer
//! counts and probabilities reconstructed on load, so round-trips are
//! bit-exact on structure, thresholds, distributions, and weights.

use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::dataset::Schema;
use crate::dist::LabelDistribution;
use crate::error::{Error, Result};
use crate::forest::{validate_node, Forest};
use crate::tree::{Node, NodeKind};

pub const MODEL_VERSION: u64 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    version: u64,
    schema: Schema,
    provenance: String,
    weights: Vec<f64>,
    trees: Vec<NodeDto>,
}

#[derive(Serialize, Deserialize)]
struct Counts {
    counts: Vec<u64>,
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum NodeDto {
    Leaf {
        leaf_counts: Vec<u64>,
    },
    Numeric {
        feature: usize,
        threshold: f64,
        retained_left: Counts,
        retained_right: Counts,
        children: Vec<NodeDto>,
    },
    Categorical {
        feature: usize,
        children: Vec<NodeDto>,
    },
}

fn to_dto(node: &Node) -> NodeDto {
    match &node.kind {
        NodeKind::Leaf { dist } => NodeDto::Leaf {
            leaf_counts: dist.counts().to_vec(),
        },
        NodeKind::Numeric { feature, threshold, retained_left, retained_right, left, right } => {
            NodeDto::Numeric {
                feature: *feature,
                threshold: *threshold,
                retained_left: Counts { counts: retained_left.counts().to_vec() },
                retained_right: Counts { counts: retained_right.counts().to_vec() },
                children: vec![to_dto(left), to_dto(right)],
            }
        }
        NodeKind::Categorical { feature, children } => NodeDto::Categorical {
            feature: *feature,
            children: children.iter().map(to_dto).collect(),
        },
    }
}

fn from_dto(dto: NodeDto) -> Result<Node> {
    let kind = match dto {
        NodeDto::Leaf { leaf_counts } => NodeKind::Leaf {
            dist: LabelDistribution::from_counts(leaf_counts),
        },
        NodeDto::Numeric { feature, threshold, retained_left, retained_right, children } => {
            let mut children = children.into_iter();
            let (Some(left), Some(right), None) =
                (children.next(), children.next(), children.next())
            else {
                return Err(Error::Model(
                    "numeric node must have exactly two children".into(),
                ));
            };
            NodeKind::Numeric {
                feature,
                threshold,
                retained_left: LabelDistribution::from_counts(retained_left.counts),
                retained_right: LabelDistribution::from_counts(retained_right.counts),
                left: Box::new(from_dto(left)?),
                right: Box::new(from_dto(right)?),
            }
        }
        NodeDto::Categorical { feature, children } => NodeKind::Categorical {
            feature,
            children: children
                .into_iter()
                .map(from_dto)
                .collect::<Result<Vec<_>>>()?,
        },
    };
    Ok(Node { id: 0, kind })
}

/// Serializes a forest to its versioned JSON byte representation.
pub fn serialize(forest: &Forest) -> Vec<u8> {
    let file = ModelFile {
        version: MODEL_VERSION,
        schema: (**forest.schema()).clone(),
        provenance: forest.provenance().to_string(),
        weights: forest.weights().to_vec(),
        trees: forest.trees().iter().map(to_dto).collect(),
    };
    let mut bytes = serde_json::to_vec_pretty(&file).expect("model serialization");
    bytes.push(b'\n');
    bytes
}

/// Parses a forest from bytes. The version field is checked before the
/// rest of the document; malformed input reports the position from the
/// JSON parser rather than yielding a partial forest.
pub fn deserialize(bytes: &[u8]) -> Result<Forest> {
    let value: serde_json::Value = serde_json::from_slice(bytes)?;
    let version = value
        .get("version")
        .and_then(|v| v.as_u64())
        .ok_or_else(|| Error::Model("missing version field".into()))?;
    if version != MODEL_VERSION {
        return Err(Error::UnsupportedVersion {
            found: version,
            supported: MODEL_VERSION,
        });
    }
    let file: ModelFile = serde_json::from_value(value)?;
    let schema = Arc::new(file.schema);
    let mut trees = Vec::with_capacity(file.trees.len());
    for (t, dto) in file.trees.into_iter().enumerate() {
        let mut node = from_dto(dto)?;
        let mut next_id = 0;
        node.assign_ids(&mut next_id);
        validate_node(&node, &schema).map_err(|e| Error::Model(format!("tree {t}: {e}")))?;
        trees.push(node);
    }
    Forest::new(schema, trees, file.weights, file.provenance)
}

pub fn save(forest: &Forest, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, serialize(forest))?;
    Ok(())
}

pub fn load(path: impl AsRef<Path>) -> Result<Forest> {
    let bytes = std::fs::read(path)?;
    deserialize(&bytes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{Dataset, Schema, Value};
    use crate::forest::{build_forest, InductionConfig};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn small_forest(seed: u64) -> Forest {
        let schema = Schema::numeric(&["x", "y"], &["0", "1"]);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for _ in 0..40 {
            let x: f64 = rng.gen();
            let y: f64 = rng.gen();
            rows.push(vec![Value::Num(x), Value::Num(y)]);
            labels.push(usize::from(x + y > 1.0));
        }
        let ds = Dataset::new(schema, rows, labels).unwrap();
        let config = InductionConfig {
            tree_count: 3,
            seed,
            ..Default::default()
        };
        build_forest(&ds, &config).unwrap()
    }

    #[test]
    fn round_trip_is_identity() {
        let forest = small_forest(11);
        let restored = deserialize(&serialize(&forest)).unwrap();
        assert!(forest.structurally_eq(&restored));
    }

    #[test]
    fn truncated_stream_is_an_error() {
        let bytes = serialize(&small_forest(3));
        let cut = &bytes[..bytes.len() / 2];
        assert!(deserialize(cut).is_err());
    }

    #[test]
    fn version_mismatch_is_explicit() {
        let mut value: serde_json::Value =
            serde_json::from_slice(&serialize(&small_forest(5))).unwrap();
        value["version"] = serde_json::json!(99);
        let bytes = serde_json::to_vec(&value).unwrap();
        match deserialize(&bytes) {
            Err(Error::UnsupportedVersion { found: 99, supported: 1 }) => {}
            other => panic!("expected version error, got {other:?}"),
        }
    }
}

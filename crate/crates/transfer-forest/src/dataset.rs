//! Column-typed sample tables and their schemas.
//!
//! A [`Dataset`] owns rows of feature values plus integer class labels, all
//! validated against a shared [`Schema`]. Features are either numeric (f64)
//! or categorical (an index into the feature's enumeration of values).

use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Feature type: numeric with real values, or categorical with an
/// enumeration of admissible values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical { values: Vec<String> },
}

impl FeatureKind {
    pub fn is_numeric(&self) -> bool {
        matches!(self, FeatureKind::Numeric)
    }

    /// Number of categories (0 for numeric features).
    pub fn cardinality(&self) -> usize {
        match self {
            FeatureKind::Numeric => 0,
            FeatureKind::Categorical { values } => values.len(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureDef {
    pub name: String,
    #[serde(flatten)]
    pub kind: FeatureKind,
}

/// Feature types plus the label space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub features: Vec<FeatureDef>,
    /// Class names, indexed by class id.
    pub classes: Vec<String>,
}

impl Schema {
    pub fn new(features: Vec<FeatureDef>, classes: Vec<String>) -> Result<Arc<Self>> {
        if classes.is_empty() {
            return Err(Error::InvalidConfig("schema needs at least one class".into()));
        }
        if features.is_empty() {
            return Err(Error::InvalidConfig("schema needs at least one feature".into()));
        }
        Ok(Arc::new(Schema { features, classes }))
    }

    /// Convenience constructor for all-numeric schemas.
    pub fn numeric(feature_names: &[&str], classes: &[&str]) -> Arc<Self> {
        Arc::new(Schema {
            features: feature_names
                .iter()
                .map(|n| FeatureDef {
                    name: (*n).to_string(),
                    kind: FeatureKind::Numeric,
                })
                .collect(),
            classes: classes.iter().map(|c| (*c).to_string()).collect(),
        })
    }

    pub fn feature_count(&self) -> usize {
        self.features.len()
    }

    pub fn class_count(&self) -> usize {
        self.classes.len()
    }

    pub fn feature_index(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }
}

/// A single feature value.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Num(f64),
    Cat(u32),
}

impl Value {
    pub fn as_num(&self) -> Option<f64> {
        match self {
            Value::Num(v) => Some(*v),
            Value::Cat(_) => None,
        }
    }

    pub fn as_cat(&self) -> Option<u32> {
        match self {
            Value::Num(_) => None,
            Value::Cat(c) => Some(*c),
        }
    }
}

/// Sample table with schema. Immutable after construction.
#[derive(Debug, Clone)]
pub struct Dataset {
    schema: Arc<Schema>,
    rows: Vec<Vec<Value>>,
    labels: Vec<usize>,
}

impl Dataset {
    /// Builds a dataset, validating every row against the schema: value
    /// arity and types, categorical values within their enumeration, and
    /// labels within `[0, class_count)`.
    pub fn new(schema: Arc<Schema>, rows: Vec<Vec<Value>>, labels: Vec<usize>) -> Result<Self> {
        if rows.len() != labels.len() {
            return Err(Error::Dataset(format!(
                "row/label count mismatch: {} rows, {} labels",
                rows.len(),
                labels.len()
            )));
        }
        for (i, row) in rows.iter().enumerate() {
            validate_row(&schema, row).map_err(|e| {
                Error::Dataset(format!("row {i}: {e}"))
            })?;
            if labels[i] >= schema.class_count() {
                return Err(Error::Dataset(format!(
                    "row {i}: label {} out of range (class count {})",
                    labels[i],
                    schema.class_count()
                )));
            }
        }
        Ok(Dataset { schema, rows, labels })
    }

    pub fn schema(&self) -> &Arc<Schema> {
        &self.schema
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn row(&self, i: usize) -> &[Value] {
        &self.rows[i]
    }

    pub fn label(&self, i: usize) -> usize {
        self.labels[i]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn value(&self, row: usize, feature: usize) -> Value {
        self.rows[row][feature]
    }

    /// All row indices, the root sample slice for tree operations.
    pub fn all_indices(&self) -> Vec<usize> {
        (0..self.len()).collect()
    }

    /// Per-class sample counts over a slice of row indices.
    pub fn label_counts(&self, idx: &[usize]) -> Vec<u64> {
        let mut counts = vec![0u64; self.schema.class_count()];
        for &i in idx {
            counts[self.labels[i]] += 1;
        }
        counts
    }

    /// Copy of this dataset with one feature column removed.
    pub fn drop_feature(&self, feature: usize) -> Result<Dataset> {
        if feature >= self.schema.feature_count() {
            return Err(Error::Dataset(format!("no feature index {feature}")));
        }
        let mut features = self.schema.features.clone();
        features.remove(feature);
        let schema = Schema::new(features, self.schema.classes.clone())?;
        let rows = self
            .rows
            .iter()
            .map(|r| {
                let mut r = r.clone();
                r.remove(feature);
                r
            })
            .collect();
        Dataset::new(schema, rows, self.labels.clone())
    }

    /// New dataset containing only the given rows (in the given order).
    pub fn select(&self, idx: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            rows: idx.iter().map(|&i| self.rows[i].clone()).collect(),
            labels: idx.iter().map(|&i| self.labels[i]).collect(),
        }
    }
}

pub(crate) fn validate_row(schema: &Schema, row: &[Value]) -> Result<()> {
    if row.len() != schema.feature_count() {
        return Err(Error::SchemaMismatch(format!(
            "expected {} features, got {}",
            schema.feature_count(),
            row.len()
        )));
    }
    for (f, (value, def)) in row.iter().zip(&schema.features).enumerate() {
        match (&def.kind, value) {
            (FeatureKind::Numeric, Value::Num(v)) => {
                if !v.is_finite() {
                    return Err(Error::SchemaMismatch(format!(
                        "feature {f} ({}) is not finite",
                        def.name
                    )));
                }
            }
            (FeatureKind::Categorical { values }, Value::Cat(c)) => {
                if *c as usize >= values.len() {
                    return Err(Error::SchemaMismatch(format!(
                        "feature {f} ({}): category {c} outside enumeration of size {}",
                        def.name,
                        values.len()
                    )));
                }
            }
            _ => {
                return Err(Error::SchemaMismatch(format!(
                    "feature {f} ({}): value kind does not match schema",
                    def.name
                )));
            }
        }
    }
    Ok(())
}

//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty distribution")]
    EmptyDistribution,

    #[error("distribution length mismatch: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },

    #[error("empty sample set")]
    EmptySamples,

    #[error("IG threshold form requires numeric feature (feature {0})")]
    NumericFeatureRequired(usize),

    #[error("degenerate feature: fewer than two distinct values")]
    DegenerateFeature,

    #[error("model lacks STRUT metadata: numeric node without retained distributions")]
    MissingStrutMetadata,

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown challenge name: {0}")]
    UnknownChallenge(String),

    #[error("degenerate split: one side of the domain partition is empty")]
    DegenerateSplit,

    #[error("unsupported model version: found {found}, supported {supported}")]
    UnsupportedVersion { found: u64, supported: u64 },

    #[error("malformed model: {0}")]
    Model(String),

    #[error("data error at row {row}, column {column}: {message}")]
    Data {
        row: usize,
        column: String,
        message: String,
    },

    #[error("dataset error: {0}")]
    Dataset(String),

    #[error("trial {trial} failed: {source}")]
    Trial {
        trial: usize,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("model parse error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn in_trial(self, trial: usize) -> Error {
        Error::Trial {
            trial,
            source: Box::new(self),
        }
    }
}

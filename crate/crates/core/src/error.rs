use std::path::PathBuf;

use thiserror::Error;

use crate::problems::feature_model::ModelError;

/// Errors raised across the toolkit.
#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible objective spaces: expected {expected} objectives, got {found}")]
    ArityMismatch { expected: usize, found: usize },

    #[error("invalid decision space: {0}")]
    InvalidSpace(String),

    #[error("solution does not fit its decision space: {0}")]
    InvalidSolution(String),

    #[error("objective {index} is not finite ({value})")]
    NonFiniteObjective { index: usize, value: f64 },

    #[error("empty input: {0}")]
    Empty(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("evaluation budget exhausted ({max} evaluations)")]
    BudgetExhausted { max: usize },

    #[error("point {index} lies outside the reference box")]
    OutsideReferenceBox { index: usize },

    #[error("decision tuple not in measured space")]
    NotInMeasuredSpace,

    #[error("problem has no finite candidate pool")]
    NoCandidatePool,

    #[error(transparent)]
    FeatureModel(#[from] ModelError),

    #[error("{path}: row {row}: {message}")]
    Data {
        path: String,
        row: usize,
        message: String,
    },

    #[error("plan error: {0}")]
    Plan(String),

    #[error("unknown {what} `{name}`")]
    Unknown { what: &'static str, name: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PlannerError {
    #[error("cannot access {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: malformed field `{field}`: {message}")]
    Parse { path: PathBuf, field: String, message: String },
    #[error(transparent)]
    Core(#[from] patrol_core::Error),
    #[error("{0}")]
    Invalid(String),
    #[error("unknown algorithm `{0}` (expected tdbs, hw or oracle)")]
    UnknownAlgorithm(String),
    #[error("the hw solver needs uniform effectiveness; use tdbs or oracle for per-target values")]
    UnsupportedAlgorithm,
    #[error("scenario has no baseline profile")]
    MissingBaseline,
    #[error("scenario has no slope classes")]
    MissingSlopeClasses,
    #[error("csv output failed: {0}")]
    Csv(#[from] csv::Error),
}

impl PlannerError {
    pub(crate) fn invalid(message: impl Into<String>) -> Self {
        PlannerError::Invalid(message.into())
    }
}

pub type Result<T> = std::result::Result<T, PlannerError>;

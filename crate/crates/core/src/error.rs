use std::path::PathBuf;

/// Errors raised by point-set construction and every numeric operation in this crate.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("coordinate {coord} of point {point} is not finite")]
    NonFinite { point: usize, coord: usize },

    #[error("point set is empty")]
    Empty,

    #[error("need at least {required} points, got {found}")]
    TooFewPoints { required: usize, found: usize },

    #[error("points {first} and {second} coincide; the energy is infinite")]
    DuplicatePoints { first: usize, second: usize },

    #[error("all points coincide; the set has zero diameter")]
    ZeroDiameter,

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("hypothesis violated: {0}")]
    Hypothesis(String),

    #[error("matrix is not symmetric (|m[{row}][{col}] - m[{col}][{row}]| = {gap:e})")]
    Asymmetric { row: usize, col: usize, gap: f64 },

    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

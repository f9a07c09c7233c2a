use std::path::PathBuf;

use thiserror::Error;

/// Every failure the library can report.
#[derive(Debug, Error)]
pub enum Error {
    #[error("rank deficient input: {0}")]
    RankDeficient(String),

    #[error("subspace dimension k={k} must satisfy 1 <= k < d/2 (d={d})")]
    DimensionViolation { k: usize, d: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: String, found: String },

    #[error("shared-factor construction failed: reconstruction residual {residual:e} exceeds {tolerance:e}")]
    SharedFactorFailure { residual: f64, tolerance: f64 },

    #[error("numerical health check failed: {0}")]
    NumericalHealth(String),

    #[error("parameter t={0} outside [0, 1]")]
    Domain(f64),

    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },

    #[error("insufficient data: {0}")]
    InsufficientData(String),

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse { row: usize, column: usize, message: String },

    #[error("schema mismatch: {0}")]
    SchemaMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn mismatch(expected: impl ToString, found: impl ToString) -> Self {
        Error::DimensionMismatch {
            expected: expected.to_string(),
            found: found.to_string(),
        }
    }

    /// True for errors caused by the run configuration rather than the data.
    pub fn is_config_error(&self) -> bool {
        matches!(self, Error::DimensionViolation { .. } | Error::InvalidConfig(_))
    }
}

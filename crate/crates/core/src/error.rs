use thiserror::Error;

/// Errors raised by the estimators and their plumbing.
#[derive(Debug, Error)]
pub enum Error {
    #[error("need at least 3 observations, got {n}")]
    TooFewObservations { n: usize },

    #[error("non-finite value {value} at row {row}, {column}")]
    NonFinite {
        row: usize,
        column: String,
        value: f64,
    },

    #[error("non-binary response: row {row} has value {value} (binomial family needs 0/1)")]
    NonBinaryResponse { row: usize, value: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("leverage too close to 1 at row {row}, feature {feature} (1 - H = {gap:e})")]
    DegenerateLeverage { row: usize, feature: usize, gap: f64 },

    #[error("coordinate descent did not converge at lambda index {lambda_index} (last change {delta:e} after {sweeps} sweeps)")]
    NonConvergence {
        lambda_index: usize,
        delta: f64,
        sweeps: usize,
    },

    #[error("oracle failed: {0}")]
    Oracle(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },

    #[error("CSV error: {0}")]
    Csv(String),

    #[error("JSON error: {0}")]
    Json(#[from] serde_json::Error),
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorKind {
    Io,
    Validation,
    Numerical,
}

impl Error {
    pub fn kind(&self) -> ErrorKind {
        match self {
            Error::Io { .. } => ErrorKind::Io,
            Error::DegenerateLeverage { .. } | Error::NonConvergence { .. } | Error::Oracle(_) => {
                ErrorKind::Numerical
            }
            _ => ErrorKind::Validation,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

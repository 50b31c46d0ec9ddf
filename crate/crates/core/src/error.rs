use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("unsupported quadrature degree {0} (supported: 2, 4, 6)")]
    UnsupportedDegree(usize),

    #[error("matrix is not positive definite (pivot {pivot} at row {row})")]
    NotPositiveDefinite { row: usize, pivot: f64 },

    #[error(
        "solver did not converge: relative residual {residual:e} after {iterations} iterations"
    )]
    NotConverged { iterations: usize, residual: f64 },

    #[error("singular system is inconsistent: right-hand side has constant component {ratio:e} (relative)")]
    InconsistentSingular { ratio: f64 },

    #[error("time {t} is outside the interval (0, {horizon}]")]
    TimeOutOfRange { t: f64, horizon: f64 },

    #[error("invalid time grid: {0}")]
    InvalidTimeGrid(String),

    #[error("interval {got} supplied out of order (expected {expected})")]
    OutOfOrder { expected: usize, got: usize },

    #[error("step {step} failed: {source}")]
    Step {
        step: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("config: invalid value for `{key}`: {message}")]
    Config { key: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn config(key: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            key: key.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad user input rather than a runtime failure.
    pub fn is_config(&self) -> bool {
        matches!(self, Error::Config { .. })
    }
}

use std::path::PathBuf;

use crate::quantities::RelHumidity;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid {what}: {value} ({reason})")]
    InvalidQuantity {
        what: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} = {value} is outside the valid interval [{lo}, {hi}]")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("singular: {0}")]
    Singular(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error(
        "no convergence after {iterations} iterations (residual norm {residual_norm:.3e}); best parameters {best:?}"
    )]
    NonConvergence {
        best: Vec<f64>,
        residual_norm: f64,
        iterations: usize,
    },

    #[error("reading lies outside the calibrated range; nearest endpoint is RH {:.4}", clamped.fraction())]
    ReadingOutOfRange { clamped: RelHumidity },

    #[error("non-physical fit: {0}")]
    NonPhysicalFit(String),

    #[error("data error: {0}")]
    Data(String),

    #[error("config error: {0}")]
    Config(String),

    #[error("row {row}: {message}")]
    Format { row: usize, message: String },

    #[error("usage error: {0}")]
    Usage(String),

    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// Process exit code: 3 for numerical non-convergence, 2 for everything else.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::NonConvergence { .. } => 3,
            _ => 2,
        }
    }
}

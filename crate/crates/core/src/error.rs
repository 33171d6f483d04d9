use std::path::PathBuf;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("size error: dimension {dim} exceeds the dense threshold {cap}")]
    Size { dim: usize, cap: usize },

    #[error("overflow: {0}")]
    Overflow(String),

    #[error("no convergence after {iterations} iterations (best residual {residual:e})")]
    Convergence { iterations: usize, residual: f64 },

    #[error("bracketing failed: {0}")]
    Bracket(String),

    #[error("not applicable: {0}")]
    Applicability(String),

    #[error("invalid input: {0}")]
    Validation(String),

    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("report serialization failed: {0}")]
    Report(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    /// True for failures of the numerics rather than of the caller's input.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::Overflow(_) | Error::Convergence { .. } | Error::Bracket(_)
        )
    }
}

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// A numeric input outside the domain of the operation (non-positive depth, NaN, ...).
    #[error("domain error: {0}")]
    Domain(String),

    /// A point at or behind the image plane was projected.
    #[error("point is behind the camera (z = {0})")]
    BehindCamera(f64),

    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("format error: {0}")]
    Format(String),

    /// Fewer points than a fit needs.
    #[error("insufficient evidence: {got} points, need at least {need}")]
    InsufficientEvidence { got: usize, need: usize },

    /// The detector backend failed on a slice.
    #[error(
        "detector backend failed on region (row {row}, col {col}, {height}x{width}): {message}"
    )]
    Backend {
        row: usize,
        col: usize,
        height: usize,
        width: usize,
        message: String,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

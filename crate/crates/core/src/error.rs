use thiserror::Error;

/// Errors shared by every sketch variant and the corpus tooling.
#[derive(Debug, Error)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two sketches were compared that do not share a layout and permutation.
    #[error("incompatible sketches: {0}")]
    IncompatibleSketches(String),

    /// An estimator had no usable bins (both inputs effectively empty).
    #[error("undefined estimate: {0}")]
    UndefinedEstimate(String),

    /// A sketch could not be built (e.g. MinHash of an empty set).
    #[error("undefined sketch: {0}")]
    UndefinedSketch(String),

    /// A data file failed to parse; `line` is 1-based.
    #[error("data error at line {line}: {msg}")]
    DataFormat { line: usize, msg: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn incompatible(msg: impl Into<String>) -> Self {
        Error::IncompatibleSketches(msg.into())
    }
}

//! Crate-wide error type.

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// Vector or matrix dimensions do not line up.
    #[error("shape mismatch in {context}: expected {expected}, got {actual}")]
    Shape {
        context: &'static str,
        expected: usize,
        actual: usize,
    },

    /// A NaN or infinity surfaced where finite arithmetic is required.
    #[error("non-finite value in {0}")]
    Numeric(&'static str),

    /// Invalid configuration value.
    #[error("invalid config: {0}")]
    Config(String),

    /// An operation was requested before its inputs exist (e.g. sampling an
    /// empty replay buffer).
    #[error("not ready: {0}")]
    NotReady(&'static str),

    #[error("malformed snapshot: {0}")]
    Snapshot(String),

    /// A training run aborted; the message carries seed and cycle context.
    #[error("run failed: {0}")]
    Run(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub fn shape(context: &'static str, expected: usize, actual: usize) -> Self {
        Error::Shape {
            context,
            expected,
            actual,
        }
    }
}

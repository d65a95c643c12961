use num_bigint::BigUint;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("state/kind mismatch: system is {system}, state is {state}")]
    KindMismatch { system: &'static str, state: &'static str },

    #[error("invalid state: {0}")]
    InvalidState(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("invalid configuration: {0}")]
    Config(String),

    /// Fixed-precision distance lies inside the guard band around the threshold.
    #[error("indeterminate metric comparison at orbit index {index}")]
    Indeterminate { index: BigUint },

    #[error("index {index} out of range for the built program; level {required_level} or higher is required")]
    OutOfRange { index: BigUint, required_level: usize },

    #[error("resource limit exceeded: {0}")]
    Resource(String),

    #[error("branch not invertible over the required range at depth {depth}")]
    NotInvertible { depth: usize },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Process exit code used by the command line runner.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Resource(_) | Error::OutOfRange { .. } => 3,
            Error::Io(_) => 1,
            _ => 2,
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

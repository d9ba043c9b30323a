use thiserror::Error;

/// Errors raised across the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A model, distribution or run parameter violates its precondition.
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("site index {index} out of range for ring of length {len}")]
    Index { index: usize, len: usize },

    /// A caller broke an operation's contract (e.g. evaluating a swap for a
    /// satisfied initiator).
    #[error("contract violation: {0}")]
    Contract(String),

    /// The engine detected a broken internal invariant.
    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// The exact state space does not fit into the configured limit.
    #[error("capacity exceeded: {states} states > limit {limit}")]
    Capacity { states: u128, limit: u128 },

    /// Absorption analysis found closed classes that are not absorbing.
    #[error("{} recurrent non-absorbing class(es) reachable", classes.len())]
    RecurrentClasses { classes: Vec<Vec<usize>> },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

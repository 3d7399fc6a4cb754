use std::io;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// Point does not belong to the space it was used with (wrong kind,
    /// wrong dimension, off-manifold coordinates, offset outside an edge).
    #[error("invalid point: {0}")]
    InvalidPoint(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    /// An objective evaluation produced NaN or an infinity.
    #[error("objective evaluated to a non-finite value ({0})")]
    NonFiniteObjective(String),

    /// Operation is only implemented for a restricted family of spaces.
    #[error("unsupported space: {0}")]
    UnsupportedSpace(String),

    /// A documented mathematical precondition does not hold for the inputs.
    #[error("precondition violated: {0}")]
    PreconditionViolated(String),

    /// Certification needs a minimizer and minimal value, and the objective
    /// carries neither.
    #[error("no ground-truth minimizer available")]
    MissingGroundTruth,

    #[error("parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("unknown descriptor: {0}")]
    UnknownDescriptor(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub fn parse(line: usize, msg: impl Into<String>) -> Self {
        Error::Parse {
            line,
            msg: msg.into(),
        }
    }
}

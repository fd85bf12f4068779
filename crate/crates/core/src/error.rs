use thiserror::Error;

/// Errors raised by code construction, the SC kernel, decoders and the simulator.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for block length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    /// The SC schedule was driven out of order (wrong bit, missing LLR evaluation, ...).
    #[error("schedule violation: {0}")]
    Schedule(String),

    /// A rewind was requested to a bit whose intermediate state has been overwritten.
    #[error("cannot resume at bit {resume}: {reason}")]
    InvalidResume { resume: usize, reason: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    /// Two campaigns that should be seed-for-seed identical disagree.
    #[error("transparency violated at {ebn0_db} dB: {detail}")]
    Transparency { ebn0_db: f64, detail: String },

    #[error("I/O error on {path}: {msg}")]
    Io { path: String, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidArgument(msg.into()))
}

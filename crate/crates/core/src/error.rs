use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Everything that can go wrong between reading a frame and writing a container.
#[derive(Debug, Error)]
pub enum Error {
    /// Input violates a documented precondition (NaN coordinates, mismatched lengths, ...).
    #[error("invalid input: {0}")]
    Validation(String),

    /// A value does not fit the integer range it has to be stored in.
    #[error("out of range: {0}")]
    Range(String),

    /// Bytes are not in the expected file format (bad magic, unknown flags, broken topology).
    #[error("format error: {0}")]
    Format(String),

    /// A payload ended before (or continued after) the length its header announces.
    #[error("length error: {0}")]
    Length(String),

    /// Data that parsed structurally but is internally inconsistent.
    #[error("corrupt data: {0}")]
    Corruption(String),

    /// The requested entropy backend was not compiled into this build.
    #[error("backend `{0}` is not available in this build")]
    Capability(&'static str),

    /// A benchmarked codec failed to reproduce its input.
    #[error("round-trip verification failed: {0}")]
    Verification(String),

    #[error(transparent)]
    Io(#[from] io::Error),
}

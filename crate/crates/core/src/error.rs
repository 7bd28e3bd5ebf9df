use std::io;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("incompatible frames: {0}")]
    IncompatibleFrames(String),
    #[error("insufficient overlap: {0} matched poses, need at least 3")]
    InsufficientOverlap(usize),
    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("empty input: {0}")]
    Empty(String),
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("malformed {format} data: {reason}")]
    Format { format: &'static str, reason: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

impl Error {
    pub(crate) fn format(format: &'static str, reason: impl Into<String>) -> Self {
        Error::Format { format, reason: reason.into() }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

use thiserror::Error;

/// Errors produced by the library.
///
/// Variants are grouped so that front ends can map them onto exit codes:
/// usage/parameter problems, malformed files, and decoding failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("elements belong to different fields")]
    FieldMismatch,

    #[error("zero has no multiplicative inverse")]
    ZeroInverse,

    #[error("invalid field: {0}")]
    InvalidField(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid parameters: {0}")]
    Params(String),

    #[error("error pattern violates the sliding-window bound: window starting at {window} has weight {weight} > {t}")]
    ChannelContract { window: usize, weight: usize, t: usize },

    #[error("block decoding failed at time index {index}")]
    Decode { index: i64 },

    #[error("format error: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

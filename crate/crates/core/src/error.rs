//! Error type shared across the crate.

/// Errors produced by the library.
///
/// Variants are grouped so a caller can map them to coarse failure classes:
/// invalid input values ([`Error::Validation`], [`Error::DimensionMismatch`],
/// [`Error::Parse`], [`Error::Format`]), operating-system I/O
/// ([`Error::Io`]), and computations with no valid answer on the given data
/// ([`Error::Numeric`]).
#[derive(Debug, thiserror::Error)]
pub enum Error {
    /// An input violated a documented invariant; the message names it.
    #[error("validation error: {0}")]
    Validation(String),

    /// Inputs that must agree in shape did not.
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    /// A text input could not be parsed; the message carries the source
    /// location.
    #[error("parse error: {0}")]
    Parse(String),

    /// A binary payload was malformed; the message carries the byte offset
    /// where known.
    #[error("format error: {0}")]
    Format(String),

    /// The computation has no valid result on the given data (empty overlap,
    /// value outside the function domain, and similar).
    #[error("numeric error: {0}")]
    Numeric(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }

    pub(crate) fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }
}

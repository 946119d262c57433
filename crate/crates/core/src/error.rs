use std::io;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    /// Invalid parameters or inputs that violate a precondition.
    #[error("parameter error: {0}")]
    Param(String),

    /// Two peers disagree on session parameters, or the caller combined
    /// objects that do not belong together.
    #[error("usage error: {0}")]
    Usage(String),

    #[error("over-constrained sharing: {fixed} fixed shares with threshold {threshold}")]
    OverConstrained { fixed: usize, threshold: usize },

    /// Two interpolation points share an x-coordinate but disagree on y.
    #[error("undefined interpolation: conflicting values at the same point")]
    UndefinedInterpolation,

    /// A ring element that had to be inverted shares a factor with the modulus.
    #[error("ring element is not invertible")]
    NotInvertible,

    #[error("ciphertext or key belongs to a different key pair")]
    KeyMismatch,

    #[error("decode error: {0}")]
    Decode(String),

    #[error("protocol error: {0}")]
    Protocol(String),

    #[error("transport error: {0}")]
    Transport(#[from] io::Error),

    #[error("peer closed the channel")]
    Closed,

    /// The same blinding factor was drawn twice inside one session.
    #[error("blinding factor reused within a session")]
    BlindingReuse,

    #[error("dataset generator: {0}")]
    Generator(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::Param(msg.into())
    }

    pub(crate) fn decode(msg: impl Into<String>) -> Self {
        Error::Decode(msg.into())
    }

    pub(crate) fn protocol(msg: impl Into<String>) -> Self {
        Error::Protocol(msg.into())
    }

    /// True for failures caused by the transport or by cryptographic
    /// operations rather than by bad parameters.
    pub fn is_runtime(&self) -> bool {
        !matches!(self, Error::Param(_) | Error::Usage(_) | Error::Generator(_))
    }
}

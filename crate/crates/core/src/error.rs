use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A precondition on an argument was violated.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// Two grids that must share a shape do not.
    #[error("dimension mismatch: {left_width}x{left_height} vs {right_width}x{right_height}")]
    DimensionMismatch {
        left_width: usize,
        left_height: usize,
        right_width: usize,
        right_height: usize,
    },

    /// A PGM or displacement-field file could not be decoded.
    #[error("decode error in {field}: {message}")]
    Decode {
        field: &'static str,
        message: String,
    },

    /// The registration iteration produced non-finite values.
    #[error("numerical divergence at iteration {iteration}")]
    Divergence { iteration: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn decode(field: &'static str, message: impl Into<String>) -> Self {
        Error::Decode {
            field,
            message: message.into(),
        }
    }
}

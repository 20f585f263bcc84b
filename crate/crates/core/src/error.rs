use thiserror::Error;

/// Errors produced by the diagnostics toolkit.
#[derive(Debug, Error)]
pub enum Error {
    /// An argument violated an operation's contract (bad index, wrong
    /// dimension, out-of-range value).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The object itself is in a state the operation cannot work with
    /// (for example predicting against an empty training set).
    #[error("invalid state: {0}")]
    InvalidState(String),

    /// A document (circuit JSON, training CSV) could not be decoded.
    /// The message carries position information where available.
    #[error("parse error: {0}")]
    Parse(String),

    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    pub(crate) fn parse(msg: impl Into<String>) -> Self {
        Error::Parse(msg.into())
    }
}

impl From<csv::Error> for Error {
    fn from(err: csv::Error) -> Self {
        if err.is_io_error() {
            match err.into_kind() {
                csv::ErrorKind::Io(io) => Error::Io(io),
                _ => unreachable!("is_io_error guarantees an Io kind"),
            }
        } else {
            Error::Parse(err.to_string())
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

//! Error type shared across the crate.

/// Failure classes surfaced by the library.
///
/// `Io` and `Format` cover reading and decoding inputs, `InvalidInput`
/// covers semantically bad arguments, `NotEnoughData` covers operations
/// whose preconditions on sample size are not met, and `Fit` covers
/// optimizer or model-fit failures.
#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("format error: {0}")]
    Format(String),
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("not enough data: {0}")]
    NotEnoughData(String),
    #[error("fit failed: {0}")]
    Fit(String),
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        match e.into_kind() {
            csv::ErrorKind::Io(io) => Error::Io(io),
            other => Error::Format(format!("csv: {other:?}")),
        }
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Format(format!("json: {e}"))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn format(msg: impl Into<String>) -> Self {
        Error::Format(msg.into())
    }

    pub fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub fn not_enough(msg: impl Into<String>) -> Self {
        Error::NotEnoughData(msg.into())
    }

    pub fn fit(msg: impl Into<String>) -> Self {
        Error::Fit(msg.into())
    }
}

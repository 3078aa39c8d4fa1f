//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated a documented precondition.
    #[error("{op}: {message}")]
    InvalidParameter { op: &'static str, message: String },

    /// A requested net or grid would exceed the memory budget.
    #[error("{op}: requested net has {requested} points, budget is {budget}")]
    NetTooLarge {
        op: &'static str,
        requested: u128,
        budget: u128,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error("csv: {0}")]
    Csv(String),
}

impl Error {
    pub fn invalid(op: &'static str, message: impl Into<String>) -> Self {
        Error::InvalidParameter {
            op,
            message: message.into(),
        }
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Csv(e.to_string())
    }
}

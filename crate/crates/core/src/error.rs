use thiserror::Error;

use crate::model::Item;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid item name {0:?}: expected one or more of A-Z a-z 0-9 _")]
    InvalidItem(String),

    #[error("malformed pattern: {0}")]
    MalformedPattern(String),

    #[error("invalid event: {0}")]
    InvalidEvent(String),

    #[error("invalid sequence {sid}: {reason}")]
    InvalidSequence { sid: u64, reason: String },

    #[error("no weight defined for item {0}")]
    MissingWeight(Item),

    #[error("invalid weight {weight} for item {item}: must be in (0,1]")]
    InvalidWeight { item: Item, weight: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParams(String),

    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("invalid split: {0}")]
    InvalidSplit(String),

    #[error("oracle enumeration exceeded the node cap of {0}")]
    OracleCapExceeded(u64),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn parse(line: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            message: message.into(),
        }
    }

    /// Input errors are problems with supplied data (files, formats); everything
    /// else is a parameter problem. The CLI maps these onto exit codes 1 and 2.
    pub fn is_input_error(&self) -> bool {
        matches!(
            self,
            Error::InvalidItem(_)
                | Error::MalformedPattern(_)
                | Error::InvalidEvent(_)
                | Error::InvalidSequence { .. }
                | Error::MissingWeight(_)
                | Error::InvalidWeight { .. }
                | Error::Parse { .. }
                | Error::Io(_)
                | Error::Json(_)
        )
    }
}

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("parameter error: {0}")]
    Parameter(String),

    /// An oracle was handed a query that does not fit its input.
    #[error("malformed query: {0}")]
    MalformedQuery(String),

    /// A caller broke a documented precondition (for example asking for a
    /// mismatch where none exists).
    #[error("contract violation: {0}")]
    Contract(String),

    /// Two computation routes that must agree did not.
    #[error("internal consistency error: {0}")]
    Consistency(String),

    /// A Las Vegas loop exceeded its configured query cap.
    #[error("query cap of {cap} exceeded")]
    QueryCap { cap: u64 },
}

pub(crate) fn param(msg: impl Into<String>) -> Error {
    Error::Parameter(msg.into())
}

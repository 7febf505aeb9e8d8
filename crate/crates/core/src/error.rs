use thiserror::Error;

/// Errors surfaced by every fallible operation in this crate.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("resource limit: {what} needs {required}, cap is {cap}")]
    ResourceLimit {
        what: &'static str,
        required: String,
        cap: String,
    },
    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidParameter(msg.into())
}

pub(crate) fn check_k(k: usize) -> Result<()> {
    if k < 2 {
        Err(invalid(format!("k must be at least 2, got {k}")))
    } else {
        Ok(())
    }
}

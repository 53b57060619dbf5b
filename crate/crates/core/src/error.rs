use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the library. Validation findings are not errors; they are
/// returned as data by [`crate::profile::CodeProfile::validate`].
#[derive(Debug, Error)]
pub enum Error {
    #[error("structural error: {0}")]
    Structure(String),
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error("profile parse error at line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("cycle counting: {0}")]
    Counting(String),
    #[error("numerical error: {0}")]
    Numeric(String),
    #[error("design failed: {0}")]
    Design(String),
    #[error("decoder: {0}")]
    Decoder(String),
    #[error("internal consistency error: {0}")]
    Internal(String),
}

impl Error {
    pub fn structure(msg: impl Into<String>) -> Self {
        Error::Structure(msg.into())
    }

    pub fn param(msg: impl Into<String>) -> Self {
        Error::Parameter(msg.into())
    }
}

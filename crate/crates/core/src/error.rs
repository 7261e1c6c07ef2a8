use thiserror::Error;

/// Errors raised by the estimators, tests, simulation harness and CLI.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// An argument lies outside the domain where the quantity is defined.
    #[error("domain error: {0}")]
    Domain(String),

    #[error("shape mismatch: expected {expected} categories, got {actual}")]
    Shape { expected: usize, actual: usize },

    /// The non-degenerate CLT does not apply; the message names the test to use instead.
    #[error("degenerate projection: {0}")]
    Degenerate(String),

    #[error("statistic undefined: {0}")]
    Undefined(String),

    #[error("no signal categories shared by both samples")]
    NoSignal,

    #[error("usage error: {0}")]
    Usage(String),

    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("validation error at line {line}: {message}")]
    Validation { line: usize, message: String },

    #[error("i/o error: {0}")]
    Io(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }

    pub(crate) fn usage(msg: impl Into<String>) -> Self {
        Error::Usage(msg.into())
    }

    /// True for errors caused by bad input rather than a failure inside the tool.
    pub fn is_validation(&self) -> bool {
        !matches!(self, Error::Io(_))
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

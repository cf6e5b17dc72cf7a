use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("qudit degree must be at least 2, got {0}")]
    BadDegree(usize),
    #[error("width mismatch: {0}")]
    Width(String),
    #[error("index out of range: {0}")]
    Range(String),
    #[error("malformed diagram: {0}")]
    Malformed(String),
    #[error("odd boundary: {0} points")]
    OddBoundary(usize),
    #[error("unknown box `{0}`")]
    UnknownBox(String),
    #[error("site clash: control and target are both {0}")]
    SiteClash(usize),
    #[error("state too large: d^n = {0} exceeds the entry cap")]
    TooLarge(usize),
    #[error("locality violation: {0}")]
    Locality(String),
    #[error("unknown register `{0}`")]
    UnknownRegister(String),
    #[error("operator is not unitary (residual {0:.3e})")]
    NotUnitary(f64),
    #[error("invalid argument: {0}")]
    Invalid(String),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

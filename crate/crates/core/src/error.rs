use thiserror::Error;

/// Errors raised by the oracle, the bound builders and the certificate checkers.
#[derive(Debug, Error)]
pub enum Error {
    #[error("enumeration cap exceeded: {n} weights, cap is {cap}")]
    EnumerationCap { n: usize, cap: usize },
    #[error("unsupported input: {0}")]
    Unsupported(String),
    #[error("invalid weights: {0}")]
    InvalidWeights(String),
    #[error("{what} out of range: {detail}")]
    OutOfRange { what: &'static str, detail: String },
    #[error("invalid parameter: {0}")]
    InvalidParam(String),
    #[error("parse error at position {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("case file line {line}: {msg}")]
    CaseFile { line: usize, msg: String },
    #[error("resource limit exceeded: {0}")]
    Resource(String),
    #[error("checksum mismatch (file truncated or corrupted)")]
    Checksum,
    #[error("version mismatch: {0}")]
    Version(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

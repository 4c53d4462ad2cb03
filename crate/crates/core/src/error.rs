use thiserror::Error;

/// Errors raised by the numerical routines and the command-line front end.
#[derive(Debug, Error)]
pub enum BunchError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("validation failed: {0}")]
    Validation(String),
    #[error("numerical failure: {0}")]
    Numeric(String),
    #[error("size limit exceeded: {0}")]
    Size(String),
    #[error("index out of range: {0}")]
    Index(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("value out of range: {0}")]
    Range(String),
    #[error("matrix is not a contraction: {0}")]
    NotContraction(String),
    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed input: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, BunchError>;

impl BunchError {
    /// Process exit code used by the `bunchlab` binary for this error.
    pub fn exit_code(&self) -> i32 {
        match self {
            BunchError::Io { .. } => 2,
            BunchError::Size(_) => 4,
            _ => 3,
        }
    }
}

use thiserror::Error;

/// Errors raised by estimators, simulators and the experiment harness.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid specification: {0}")]
    InvalidSpec(String),

    #[error("argument outside its domain: {0}")]
    Domain(String),

    #[error("lag {lag} too large for a sample of length {n}")]
    LagTooLarge { lag: usize, n: usize },

    #[error("rank deficient: {0}")]
    Rank(String),

    #[error("sample too small: {0}")]
    Size(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("unstable autoregression: spectral radius {0:.6} >= 1")]
    Unstable(f64),

    #[error("config error at `{key}`: {msg}")]
    Config { key: String, msg: String },

    #[error("io: {0}")]
    Io(String),

    #[error("parse: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::InvalidSpec(msg.into())
    }

    pub(crate) fn config(key: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Config { key: key.into(), msg: msg.into() }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<csv::Error> for Error {
    fn from(e: csv::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;

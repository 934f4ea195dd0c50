use thiserror::Error;

/// Errors raised by the bound, envelope, quantum and simulation routines.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    /// A functional was paired with a site count it is not defined for.
    #[error("dimension error: {0}")]
    Dimension(String),

    /// The requested size exceeds what an enumeration or statevector mode supports.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// An argument lies outside its mathematical domain.
    #[error("domain error: {0}")]
    Domain(String),

    /// An internal structural invariant does not hold for the given input.
    #[error("invariant violation: {0}")]
    Invariant(String),

    /// A trial set lacks a setting word required by an estimator.
    #[error("incomplete design: {0}")]
    IncompleteDesign(String),

    #[error("i/o error: {0}")]
    Io(String),
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

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

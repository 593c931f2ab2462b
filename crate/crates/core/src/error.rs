//! Crate-wide error type.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

/// Errors surfaced by the simulation and training stack.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Rejected input: non-finite state, shape mismatch, out-of-range argument.
    InvalidInput(String),
    /// Configuration file or key problem.
    Config(String),
    /// Checkpoint missing, corrupt, or architecture mismatch.
    Checkpoint(String),
    /// Simulation fault: diverged state or a singular mass matrix.
    SimFault(String),
    /// Contract violation, e.g. calling a success-gated op in continuous mode.
    Contract(String),
    /// Filesystem or encoding failure while writing artifacts.
    Io(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidInput(m) => write!(f, "invalid input: {m}"),
            Error::Config(m) => write!(f, "config error: {m}"),
            Error::Checkpoint(m) => write!(f, "checkpoint error: {m}"),
            Error::SimFault(m) => write!(f, "simulation fault: {m}"),
            Error::Contract(m) => write!(f, "contract violation: {m}"),
            Error::Io(m) => write!(f, "io error: {m}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

use thiserror::Error;

/// Errors raised by the solvers and oracles.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the set where the operation is defined.
    #[error("domain error: {0}")]
    Domain(String),
    /// A configuration is inconsistent or violates a stability/size precondition.
    #[error("config error: {0}")]
    Config(String),
    /// A caller-supplied object broke its contract (e.g. a strategy that looks ahead).
    #[error("contract error: {0}")]
    Contract(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

pub(crate) fn contract<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Contract(msg.into()))
}

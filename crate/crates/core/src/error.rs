use thiserror::Error;

/// Failure modes shared by every module.
///
/// The CLI maps these onto exit codes: `Config` → 2, `Domain` → 3,
/// `Convergence` → 4.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("convergence failure: {0}")]
    Convergence(String),
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

pub(crate) fn no_convergence<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Convergence(msg.into()))
}

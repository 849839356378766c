use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("invalid path: {0}")]
    Path(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("cost guard exceeded: {0}")]
    Guard(String),

    /// A simulation reached a state the model forbids. Always a bug.
    #[error("internal invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn config<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Config(msg.into()))
}

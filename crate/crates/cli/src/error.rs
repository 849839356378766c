use thiserror::Error;

#[derive(Debug, Error)]
pub enum HarnessError {
    /// Bad configuration or parameters, found before any work started.
    #[error("invalid input: {0}")]
    Validation(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type HarnessResult<T> = Result<T, HarnessError>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> HarnessResult<T> {
    Err(HarnessError::Validation(msg.into()))
}

impl From<convfpp::Error> for HarnessError {
    fn from(e: convfpp::Error) -> Self {
        HarnessError::Validation(e.to_string())
    }
}

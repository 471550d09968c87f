use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] spiked_core::Error),
    #[error("bad scale: G''(x*) = {0} must be negative")]
    BadScale(f64),
    #[error("MCMC did not converge (R-hat {0:.4})")]
    NonConvergence(f64),
    #[error("LAPACK returned info = {0}")]
    Lapack(i32),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("config: {0}")]
    Config(String),
    #[error("sample file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::InvalidArgument(msg.into())
}

use thiserror::Error;

/// Errors produced by the simulators, special functions and estimators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("argument outside the domain of {what}: {detail}")]
    Domain { what: &'static str, detail: String },

    #[error("overflow while evaluating {0}")]
    Overflow(String),

    #[error("integration failed on path {path} at step {step}: {detail}")]
    Integration {
        path: usize,
        step: usize,
        detail: String,
    },

    #[error("accuracy target not met in {what}: {detail}")]
    Accuracy { what: &'static str, detail: String },

    #[error("numerically inconsistent result in {what}: {detail}")]
    Inconsistent { what: &'static str, detail: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn param<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Parameter(msg.into()))
}

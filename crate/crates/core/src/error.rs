use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("empty input: {0}")]
    EmptyInput(&'static str),
    #[error("invalid routing input: {0}")]
    Routing(String),
    #[error("mask is empty")]
    EmptyMask,
    #[error("invalid contour: {0}")]
    Contour(String),
    #[error("step {step} is outside a schedule of {total} steps")]
    ScheduleExhausted { step: usize, total: usize },
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("malformed {what}: {msg}")]
    Format { what: &'static str, msg: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }
}

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid argument: {0}")]
    Argument(String),

    #[error("resource limit exceeded: {what} needs {requested}, cap is {cap}")]
    Resource {
        what: &'static str,
        requested: String,
        cap: u64,
    },

    #[error("unsupported measure: {0}")]
    UnsupportedMeasure(String),

    #[error("certification unavailable: {0}")]
    CertificationUnavailable(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

pub(crate) fn arg<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Argument(msg.into()))
}

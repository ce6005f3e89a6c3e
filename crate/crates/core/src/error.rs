use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    /// A numerical procedure could not reach its target accuracy. `estimate`
    /// carries the best value obtained and `error` its estimated error.
    #[error("accuracy not reached in {context}: estimate {estimate:e}, error {error:e}")]
    Accuracy {
        context: &'static str,
        estimate: f64,
        error: f64,
    },

    #[error("dimension overflow: {0}")]
    Dimension(String),

    #[error("solver failure: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::Domain(msg.into()))
}

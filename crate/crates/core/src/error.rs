use thiserror::Error;

/// Errors raised by divkit operations.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument is outside the domain of the operation.
    #[error("domain error: {0}")]
    Domain(String),

    /// An exhaustive enumeration would exceed the supported size.
    #[error("capacity error: {0}")]
    Capacity(String),

    /// A numerical search failed to converge or bracket its target.
    #[error("numeric error: {0}")]
    Numeric(String),

    /// Random sampling could not produce inputs satisfying a premise.
    #[error("sampling error: {0}")]
    Sampling(String),
}

impl Error {
    /// Short machine-readable kind used in CLI error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Domain(_) => "domain",
            Error::Capacity(_) => "capacity",
            Error::Numeric(_) => "numeric",
            Error::Sampling(_) => "sampling",
        }
    }
}

pub(crate) fn domain(msg: impl Into<String>) -> Error {
    Error::Domain(msg.into())
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    /// A coordinate, configuration or sub-region does not fit the domain it is used with.
    #[error("domain error: {0}")]
    Domain(String),

    /// Exhaustive enumeration would exceed the configured budget.
    #[error("enumeration needs 2^{required} configurations, budget is 2^{budget}")]
    Budget { required: u32, budget: u32 },

    /// A precondition on an event (robustness, monotonicity) does not hold.
    #[error("refused: {0}")]
    Refused(String),

    /// Monte Carlo estimation could not produce a value.
    #[error("estimation failed: {0}")]
    Estimation(String),

    #[error("parse error: {0}")]
    Parse(String),
}

impl Error {
    pub(crate) fn domain(msg: impl Into<String>) -> Self {
        Error::Domain(msg.into())
    }
}

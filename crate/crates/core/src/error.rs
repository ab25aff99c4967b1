use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("local error estimate {estimate:.3e} exceeds tolerance {tolerance:.3e}; increase steps_per_delay")]
    StepSize { estimate: f64, tolerance: f64 },

    #[error("evaluation time {t} lies beyond the stored trajectory horizon {horizon}")]
    BeyondHorizon { t: f64, horizon: f64 },

    #[error("degenerate configuration: {0}")]
    Degenerate(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}

impl Error {
    pub(crate) fn param(name: &'static str, reason: impl Into<String>) -> Self {
        Error::InvalidParameter {
            name,
            reason: reason.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;

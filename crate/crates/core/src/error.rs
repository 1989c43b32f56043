use thiserror::Error;

/// Errors raised by estimators, models and checks.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("parameter out of domain: {0}")]
    ParameterDomain(String),

    #[error("value {value} is outside the support of the {family} distribution")]
    Support { family: &'static str, value: f64 },

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("forward map failed on draw {index}: {message}")]
    ForwardMap { index: usize, message: String },

    #[error("numerical failure: {0}")]
    Numeric(String),

    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

/// Errors raised across the inference pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("argument {arg} = {value} is outside the domain {domain}")]
    Domain {
        arg: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("exp(x^2) overflows for x = {0}")]
    Overflow(f64),

    #[error("invalid measurement: {0}")]
    InvalidMeasurement(String),

    #[error("campaign contains no measurements")]
    EmptyCampaign,

    #[error("{routine} did not converge after {iterations} iterations")]
    NonConvergence {
        routine: &'static str,
        iterations: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("line {line}: {message}")]
    Parse { line: u64, message: String },

    #[error("line {line}: sigma must be positive, got {sigma}")]
    NonPositiveSigma { line: u64, sigma: f64 },

    #[error("{0}")]
    Io(String),
}

pub type Result<T> = std::result::Result<T, Error>;

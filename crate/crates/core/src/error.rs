use std::path::PathBuf;

use thiserror::Error;

/// Invalid parameters or scenario settings.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("horizon must contain at least one period")]
    EmptyHorizon,
    #[error("spot curve has no points")]
    EmptyCurve,
    #[error("field `{field}`: {reason}")]
    InvalidField { field: String, reason: String },
}

impl ConfigError {
    pub fn field(field: impl Into<String>, reason: impl Into<String>) -> Self {
        ConfigError::InvalidField {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

/// Numeric domain violations in derived quantities.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("discount factor at t={period} is not strictly positive ({value})")]
    NonPositiveDiscountFactor { period: usize, value: f64 },
    #[error("discount factor at t=0 must be 1 (got {0})")]
    BadInitialDiscountFactor(f64),
    #[error("need at least 2 values to estimate moments (got {0})")]
    TooFewValues(usize),
}

/// Failures while reading an input data file.
#[derive(Debug, Error)]
pub enum DataError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}:{line}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: maturities must be strictly increasing (maturity {maturity} at line {line})")]
    NonMonotoneMaturity {
        path: PathBuf,
        line: usize,
        maturity: u32,
    },
    #[error("{path}: unknown column `{column}`")]
    UnknownColumn { path: PathBuf, column: String },
    #[error("{path}:{line}: negative payment {value} in column `{column}`")]
    NegativePayment {
        path: PathBuf,
        line: usize,
        column: String,
        value: f64,
    },
    #[error("{path}: {message}")]
    Invalid { path: PathBuf, message: String },
}

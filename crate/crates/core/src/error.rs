use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("base m must be at least 2, got {0}")]
    InvalidBase(u64),

    #[error("argument {value} outside the domain {domain}")]
    Domain { value: String, domain: &'static str },

    #[error("tolerance must be positive, got {0}")]
    InvalidTolerance(String),

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("distribution function decreases between grid points {index} and {}", index + 1)]
    NonMonotone { index: usize },

    #[error("invalid digit sequence: {0}")]
    InvalidDigits(String),

    #[error("degenerate input: {0}")]
    Degenerate(String),

    #[error("need at least {needed} iteration reports, got {got}")]
    NotEnoughReports { needed: usize, got: usize },

    #[error("expected count {expected:.3} in cell {cell} is below 5")]
    InsufficientExpected { cell: String, expected: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain<T: std::fmt::Display>(value: T, domain: &'static str) -> Error {
    Error::Domain {
        value: value.to_string(),
        domain,
    }
}

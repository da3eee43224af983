use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("row {row} has sum {found}, expected {expected}")]
    RowSum { row: usize, found: usize, expected: usize },

    #[error("column {column} has sum {found}, expected {expected}")]
    ColumnSum { column: usize, found: usize, expected: usize },

    #[error("invalid parameters: {0}")]
    InvalidParameters(String),

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("indices must be distinct, got {0} twice")]
    RepeatedIndex(usize),

    #[error("deviation scale is zero; normalized discrepancy is undefined")]
    DegenerateScale,

    #[error("rejection sampler exhausted its budget of {attempts} attempts")]
    RejectionBudgetExhausted { attempts: u64 },

    #[error("search space estimate {estimate:.3e} exceeds cap {cap:.3e}")]
    SearchSpaceTooLarge { estimate: f64, cap: f64 },

    #[error("exact evaluation cost {cost:.3e} exceeds cap {cap:.3e}; use Monte Carlo mode")]
    ExactCapExceeded { cost: f64, cap: f64 },

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

impl Error {
    /// Errors raised by a resource guard rather than by bad input.
    pub fn is_resource_guard(&self) -> bool {
        matches!(
            self,
            Error::RejectionBudgetExhausted { .. }
                | Error::SearchSpaceTooLarge { .. }
                | Error::ExactCapExceeded { .. }
                | Error::NonConvergence { .. }
        )
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidParameters(msg.into())
    }
}

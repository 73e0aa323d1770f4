// SPDX-License-Identifier: Apache-2.0

use thiserror::Error;

/// Errors raised by the library. The CLI maps them onto exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numeric error: {0}")]
    Numeric(String),
    #[error("budget exhausted: cap {cap}, already spent {spent}")]
    BudgetExhausted { cap: f64, spent: f64 },
    #[error("integrity error: {0}")]
    Integrity(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub(crate) fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub(crate) fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    /// Process exit code: 2 for bad input, 3 for an exhausted budget, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            Error::Validation(_) | Error::Json(_) | Error::Csv(_) => 2,
            Error::BudgetExhausted { .. } => 3,
            _ => 1,
        }
    }
}

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Validation { field: &'static str, reason: String },

    #[error("budget too small: b = {b} bits cannot hold one {b0}-bit value")]
    BudgetTooSmall { b: u64, b0: u32 },

    #[error("message from machine {machine} has {bits} bits, budget is {budget}")]
    BudgetExceeded {
        machine: u32,
        bits: u64,
        budget: u64,
    },

    #[error("grid index {index} out of range for {bits}-bit codec")]
    IndexOutOfRange { index: u64, bits: u32 },

    #[error("machine {0} sent no message")]
    MissingMessage(u32),

    #[error("machine {0} sent more than one message")]
    DuplicateMessage(u32),

    #[error("machine {machine}: payload has {got} bits, expected {expected}")]
    PayloadLength {
        machine: u32,
        got: u64,
        expected: u64,
    },

    #[error("observation row too short: need index {need}, row has {len}")]
    RowTooShort { need: usize, len: usize },

    #[error("gaussian prior rejected {attempts} consecutive draws outside the ellipsoid")]
    RejectionExhausted { attempts: u32 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: u32, residual: f64 },

    #[error("malformed message file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn validation(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Validation {
            field,
            reason: reason.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

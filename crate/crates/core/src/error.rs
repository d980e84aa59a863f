use thiserror::Error;

#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid spec: {0}")]
    InvalidSpec(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("token {token} out of range for alphabet of {alphabet}")]
    TokenOutOfRange { token: usize, alphabet: usize },

    #[error("stream step budget of {budget} exceeded with no forgetting (state norm grows without bound)")]
    StreamBudgetExceeded { budget: u64 },

    #[error("lookback {k} too deep: lambda^K = {value:e} below floor {floor:e}, signal numerically extinct")]
    LookbackTooDeep { k: i64, value: f64, floor: f64 },

    #[error("covariance solve failed: {0}")]
    SolveFailed(String),

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, CoreError>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TheoryError {
    #[error("unsupported query: {0}")]
    UnsupportedQuery(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("resolution too coarse: {0}")]
    Resolution(String),

    #[error("solver failed: {0}")]
    Solver(String),
}

pub type Result<T> = std::result::Result<T, TheoryError>;

use thiserror::Error;

/// Failure modes shared by every stage of the computation.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("cannot parse {text:?} as a decimal number")]
    Parse { text: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate saddle: {0}")]
    Degenerate(String),

    #[error("capacity exceeded: {0}")]
    Capacity(String),

    #[error("no convergence: {0}")]
    Convergence(String),

    #[error("ill-conditioned: {0}")]
    Conditioning(String),

    #[error("singular system: {0}")]
    Singular(String),

    #[error("invalid input: {0}")]
    InvalidInput(String),
}

pub type Result<T> = std::result::Result<T, Error>;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("no edges")]
    NoEdges,
    #[error("instance too large for exhaustive oracle: {0}")]
    TooLarge(String),
    #[error("budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid swap: {0}")]
    InvalidSwap(String),
    #[error("incomparable instances")]
    Incomparable,
    #[error("domain mismatch: {0}")]
    DomainMismatch(String),
    #[error("zero distance")]
    ZeroDistance,
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("uncoverable element {0}")]
    UncoverableElement(usize),
    #[error("A not contained")]
    NotContained,
    #[error("unknown suite: {0}")]
    UnknownSuite(String),
    #[error("invalid instance: {0}")]
    Invalid(String),
    #[error("pipeline: {0}")]
    Pipeline(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;

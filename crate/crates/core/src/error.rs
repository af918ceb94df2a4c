use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("resource limit exceeded: {0}")]
    ResourceLimit(String),

    #[error("value is rational, not an irrational: {0}")]
    NotIrrational(String),

    #[error("insufficient precision: {0}")]
    InsufficientPrecision(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("sifting limit too large for an exhaustive table: {0}")]
    SiftingLimitTooLarge(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("infeasible parameters: {}", .0.join(", "))]
    InfeasibleParams(Vec<String>),

    #[error("no feasible point in the grid")]
    EmptyFeasibleRegion,

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("serialization failed: {0}")]
    Serialize(String),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }
}

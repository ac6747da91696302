use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension {0} is outside the supported range 1..={max}", max = crate::geometry::MAX_DIM)]
    DimensionOutOfRange(usize),

    #[error("invalid bounds: {0}")]
    InvalidBounds(String),

    #[error("region capacity exceeded: {requested} regions requested, limit is {limit}")]
    Capacity { requested: usize, limit: usize },

    #[error("length mismatch: {what} has {got} entries, expected {expected}")]
    LengthMismatch { what: &'static str, got: usize, expected: usize },

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("unknown integrand {id:?} at dimension {dim}")]
    UnknownIntegrand { id: String, dim: usize },
}

pub type Result<T> = std::result::Result<T, Error>;

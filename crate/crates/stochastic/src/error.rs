//! Error type for the sampling layer.

use thiserror::Error;

/// Everything that can go wrong while sampling or assembling objects.
#[derive(Debug, Error)]
pub enum StochasticError {
    #[error(transparent)]
    Core(#[from] tff_core::CoreError),
    #[error("renorm table mismatch: {0}")]
    TableMismatch(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("operator needs history: {0}")]
    MissingHistory(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, StochasticError>;

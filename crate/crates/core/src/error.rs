//! Error type shared by the core modules.

use thiserror::Error;

/// Errors produced by lattice construction, field algebra, and I/O.
#[derive(Debug, Error)]
pub enum CoreError {
    #[error("invalid lattice: {0}")]
    InvalidLattice(String),
    #[error("lattice mismatch: {0}")]
    LatticeMismatch(String),
    #[error("color {c} out of range for dimension {d}")]
    InvalidColor { c: usize, d: usize },
    #[error("pairing kind leaves no open slot for the target")]
    NoOpenSlot,
    #[error("hermitian symmetry violated: max defect {defect:.3e} exceeds {tol:.1e}")]
    NotHermitian { defect: f64, tol: f64 },
    #[error("computation budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("malformed field file: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Result alias for core operations.
pub type Result<T> = std::result::Result<T, CoreError>;

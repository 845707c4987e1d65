//! Error type for graph construction, analysis, and amplitude evaluation.

use thiserror::Error;

/// Errors produced by the diagram machinery.
#[derive(Debug, Error)]
pub enum DiagramError {
    /// A tensor-graph type invariant is violated; the message names the constraint.
    #[error("invalid tensor graph: {0}")]
    InvalidGraph(String),
    /// An operation was asked for outside its domain.
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    /// A strand or mode sum would exceed the step budget.
    #[error("budget exceeded: {steps} steps needed, cap is {cap}")]
    BudgetExceeded { steps: u128, cap: u128 },
    /// Structured-text parse failure for graph I/O.
    #[error("graph text format: {0}")]
    Format(String),
}

/// Convenient result alias for diagram operations.
pub type Result<T> = std::result::Result<T, DiagramError>;

//! Stranded-graph diagrammatics for quartic tensor interactions: graph
//! validation, boundary structure, power counting, contraction enumeration,
//! exact Wick covariances, and truncated amplitudes.

pub mod amplitude;
pub mod error;
pub mod graph;
pub mod skeleton;
pub mod sum;
pub mod wick;

pub use amplitude::{truncated_amplitude, AmplitudeOptions};
pub use error::{DiagramError, Result};
pub use graph::{GraphAnalysis, OmegaWeights, TensorGraph};
pub use skeleton::{build_skeleton, enumerate_contractions, ObjectKind, SkeletonSpec};
pub use wick::{wick_covariance, CovKernel, WickCovariance};

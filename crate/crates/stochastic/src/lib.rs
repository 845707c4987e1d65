//! Gaussian free fields on the mode lattice, exact Ornstein-Uhlenbeck
//! evolution, and the renormalized stochastic objects built from them.

pub mod bg;
pub mod error;
pub mod objects;
pub mod ou;
pub mod streams;

pub use bg::{
    bg_variational_value, build_bg_enhanced, centering_sample, decomposition_check,
    free_energy_bound, half_shift_energy, sample_bg_flow, BgDrift, BgEnhanced, BgFlowState,
    BgScaleTables, BoundConfig, BoundEstimate, DecompositionCheck, TestFunctional,
    VariationalValue,
};
pub use error::{Result, StochasticError};
pub use objects::{
    apply_random_operator, build_enhanced_noise, build_wick_cube, EnhancedCursor, EnhancedNoise,
    RandomOp,
};
pub use ou::{evolve_ou, sample_ou_stationary, OuState};
pub use streams::{normal_pair, NoiseStreams, ReplicaStreams, StreamPurpose};

//! Spectral core for the tensor-field simulation suite.
//!
//! Everything lives on the Fourier side of the d-torus: a [`ModeLattice`]
//! enumerates the truncated mode box, a [`FourierField`] stores complex
//! coefficients over it, and the remaining modules implement the color-wise
//! non-local product, the mass-type counterterms with their renormalized
//! amplitudes, the scale-flow cutoff profile, tensor (trace-invariant) norms,
//! and bit-exact field I/O.

pub mod cgemm;
pub mod error;
#[cfg(test)]
pub(crate) mod testutil;
pub mod field;
pub mod grid;
pub mod io;
pub mod lattice;
pub mod nonlocal;
pub mod norms;
pub mod quadrature;
pub mod renorm;
pub mod rho;

pub use error::{CoreError, Result};
pub use field::FourierField;
pub use lattice::{Color, Mode, ModeLattice, MAX_D};
pub use nonlocal::PairingKind;
pub use renorm::RenormTable;

/// Complex scalar used throughout the suite.
pub type Complex64 = num_complex::Complex<f64>;

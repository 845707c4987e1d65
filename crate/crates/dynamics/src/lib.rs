//! Stochastic quantization dynamics: full-equation and remainder-equation
//! integrators, invariant-measure samplers, and energy diagnostics.

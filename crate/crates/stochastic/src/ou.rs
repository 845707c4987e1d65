//! Stationary free field and its exact Ornstein-Uhlenbeck evolution.
//!
//! Every mode relaxes independently at rate `<m>^2` toward the Gaussian
//! with variance `1/<m>^2`. Updates use the exact one-step law, so any
//! step size is admissible and the chain is stationary to machine
//! precision.

use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;

use tff_core::lattice::hat2;
use tff_core::{FourierField, ModeLattice};

use crate::error::{Result, StochasticError};
use crate::streams::{normal_pair, ReplicaStreams, StreamPurpose};

/// A free field together with the per-mode streams that advance it.
#[derive(Debug, Clone)]
pub struct OuState {
    field: FourierField,
    time: f64,
    steps: Vec<(usize, ChaCha8Rng)>,
}

impl OuState {
    /// Wraps an existing field with fresh step streams of the given
    /// purpose; the spin-up machinery uses this to run side paths that
    /// never share draws with the main one.
    pub fn from_field(
        field: FourierField,
        time: f64,
        streams: &ReplicaStreams,
        purpose: StreamPurpose,
    ) -> Self {
        let lat = field.lattice();
        let steps = canonical_indices(&lat)
            .map(|idx| (idx, streams.stream_for_mode(purpose, &lat.mode(idx))))
            .collect();
        OuState { field, time, steps }
    }

    pub fn field(&self) -> &FourierField {
        &self.field
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn lattice(&self) -> ModeLattice {
        self.field.lattice()
    }
}

/// Indices owning their conjugate pair (`idx <= neg_index(idx)`).
fn canonical_indices(lat: &ModeLattice) -> impl Iterator<Item = usize> + '_ {
    (0..lat.len()).filter(move |&idx| idx <= lat.neg_index(idx))
}

/// Draws an exact sample of the stationary free field.
pub fn sample_ou_stationary(lattice: ModeLattice, streams: &ReplicaStreams) -> OuState {
    let mut field = FourierField::zeros(lattice);
    {
        let data = field.as_mut_slice();
        for idx in canonical_indices(&lattice) {
            let m = lattice.mode(idx);
            let mut rng = streams.stream_for_mode(StreamPurpose::OuInit, &m);
            let (g0, g1) = normal_pair(&mut rng);
            let var = 1.0 / hat2(&m);
            let neg = lattice.neg_index(idx);
            if idx == neg {
                data[idx] = Complex64::new(g0 * var.sqrt(), 0.0);
            } else {
                let s = (var / 2.0).sqrt();
                data[idx] = Complex64::new(g0 * s, g1 * s);
                data[neg] = data[idx].conj();
            }
        }
    }
    OuState::from_field(field, 0.0, streams, StreamPurpose::OuStep)
}

/// Advances the state by `h` with the exact one-step transition.
pub fn evolve_ou(state: &mut OuState, h: f64) -> Result<()> {
    if !(h > 0.0) {
        return Err(StochasticError::InvalidArgument(format!(
            "step must be positive, got {h}"
        )));
    }
    let lat = state.field.lattice();
    let data = state.field.as_mut_slice();
    for (idx, rng) in &mut state.steps {
        let m = lat.mode(*idx);
        let l = hat2(&m);
        let decay = (-h * l).exp();
        let eta_var = (1.0 - decay * decay) / l;
        let (g0, g1) = normal_pair(rng);
        let neg = lat.neg_index(*idx);
        if *idx == neg {
            data[*idx] = decay * data[*idx] + Complex64::new(g0 * eta_var.sqrt(), 0.0);
        } else {
            let s = (eta_var / 2.0).sqrt();
            data[*idx] = decay * data[*idx] + Complex64::new(g0 * s, g1 * s);
            data[neg] = data[*idx].conj();
        }
    }
    state.time += h;
    Ok(())
}

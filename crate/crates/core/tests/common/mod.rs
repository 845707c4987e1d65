//! Shared helpers for the integration suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use tff_core::lattice::{self, ModeLattice};
use tff_core::{Complex64, FourierField};

/// Seeded random real-valued field with per-mode scale `<m>^{-decay/2}`.
pub fn random_hermitian(lat: ModeLattice, seed: u64, decay: f64) -> FourierField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut f = FourierField::from_fn(lat, |m| {
        let scale = lattice::hat2(m).powf(-decay / 2.0);
        Complex64::new(
            scale * rng.gen_range(-1.0..1.0),
            scale * rng.gen_range(-1.0..1.0),
        )
    });
    f.hermitize();
    f
}

/// Seeded random complex field with no Hermitian symmetry.
#[allow(dead_code)]
pub fn random_complex(lat: ModeLattice, seed: u64, decay: f64) -> FourierField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    FourierField::from_fn(lat, |m| {
        let scale = lattice::hat2(m).powf(-decay / 2.0);
        Complex64::new(
            scale * rng.gen_range(-1.0..1.0),
            scale * rng.gen_range(-1.0..1.0),
        )
    })
}

/// Maximum pointwise coefficient difference between two fields.
pub fn max_diff(a: &FourierField, b: &FourierField) -> f64 {
    a.as_slice()
        .iter()
        .zip(b.as_slice())
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
}

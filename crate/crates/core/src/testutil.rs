//! Random field construction for the crate's own tests.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::field::FourierField;
use crate::lattice::{self, ModeLattice};
use crate::Complex64;

/// Seeded random real field with per-mode scale `<m>^{-decay}`.
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

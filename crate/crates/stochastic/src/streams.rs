//! Deterministic stream addressing for every random draw in the crate.
//!
//! Each draw comes from a counter-based ChaCha stream keyed by
//! `(seed, replica, purpose, mode)`. Replicas and purposes never share a
//! stream, so estimators stay independent, reruns are bit-identical, and
//! the schedule cannot depend on thread count. Streams are keyed by the
//! physical mode (not its storage index), so a refined lattice reuses the
//! exact draws of the coarse one on the modes they share; shared-noise
//! refinement couplings are exact by construction.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tff_core::{Mode, MAX_D};

/// What a stream feeds; part of the stream key.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StreamPurpose {
    /// Stationary free-field initialization.
    OuInit,
    /// Ornstein-Uhlenbeck increments along the main grid.
    OuStep,
    /// Ancient-past relaxation of the quadratic integral.
    SpinUp,
    /// Gaussian scale-flow increments.
    BgFlow,
    /// Langevin noise for the full SDE.
    Langevin,
    /// Proposal and acceptance draws of Markov chains.
    Mcmc,
    /// Independent helper batches (centering constants and the like).
    Auxiliary,
}

impl StreamPurpose {
    fn tag(self) -> u64 {
        match self {
            StreamPurpose::OuInit => 1,
            StreamPurpose::OuStep => 2,
            StreamPurpose::SpinUp => 3,
            StreamPurpose::BgFlow => 4,
            StreamPurpose::Langevin => 5,
            StreamPurpose::Mcmc => 6,
            StreamPurpose::Auxiliary => 7,
        }
    }
}

/// Avalanche mixer used to derive replica sub-seeds from the run seed.
fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Root of the stream tree for one run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseStreams {
    seed: u64,
}

impl NoiseStreams {
    pub fn new(seed: u64) -> Self {
        NoiseStreams { seed }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Stream family of one Monte Carlo replica.
    pub fn replica(&self, replica: u64) -> ReplicaStreams {
        ReplicaStreams {
            base: self.seed ^ splitmix64(replica),
        }
    }
}

/// All streams of a single replica, addressed by purpose and mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplicaStreams {
    base: u64,
}

/// Modes are packed into 12 bits per component; samplers stay far below
/// this bound.
const MODE_COMPONENT_LIMIT: i64 = 2047;

fn pack_mode(m: &Mode) -> u64 {
    let mut packed = 0u64;
    for k in 0..MAX_D {
        assert!(
            m[k].abs() <= MODE_COMPONENT_LIMIT,
            "mode component {} exceeds the stream packing range",
            m[k]
        );
        packed |= (((m[k] + MODE_COMPONENT_LIMIT + 1) as u64) & 0xfff) << (12 * k);
    }
    packed
}

impl ReplicaStreams {
    /// Stream for a scalar consumer (chains, acceptance draws, ...).
    pub fn stream(&self, purpose: StreamPurpose, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.base);
        rng.set_stream((index << 8) | purpose.tag());
        rng
    }

    /// Stream owned by one physical mode; identical at every truncation
    /// that contains the mode.
    pub fn stream_for_mode(&self, purpose: StreamPurpose, m: &Mode) -> ChaCha8Rng {
        self.stream(purpose, pack_mode(m))
    }
}

/// Converts a raw word into the open-closed unit interval `(0, 1]`.
fn unit_open(x: u64) -> f64 {
    ((x >> 11) + 1) as f64 * 2f64.powi(-53)
}

/// One Box-Muller pair; consumes exactly two words of the stream.
pub fn normal_pair<R: RngCore>(rng: &mut R) -> (f64, f64) {
    let u1 = unit_open(rng.next_u64());
    let u2 = unit_open(rng.next_u64());
    let r = (-2.0 * u1.ln()).sqrt();
    let ang = std::f64::consts::TAU * u2;
    (r * ang.cos(), r * ang.sin())
}

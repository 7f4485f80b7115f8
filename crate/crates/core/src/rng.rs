//! Deterministic uniform stream backing the simulator.
//!
//! All randomness in the crate flows through this one wrapper so that the
//! byte-level reproducibility story has exactly two ingredients: the ChaCha8
//! keystream (an IETF-stable primitive seeded via `seed_from_u64`) and the
//! fixed mapping below from 64 random bits to a double in [0, 1).

use rand_core::{RngCore, SeedableRng};

/// Seeded uniform-random stream.
pub(crate) struct Stream {
    rng: rand_chacha::ChaCha8Rng,
}

impl Stream {
    pub(crate) fn new(seed: u64) -> Self {
        Self {
            rng: rand_chacha::ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// Uniform draw in [0, 1): the top 53 bits of one ChaCha8 word, scaled
    /// by 2^-53. Every representable output is an exact multiple of 2^-53.
    pub(crate) fn u01(&mut self) -> f64 {
        (self.rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform draw in [-1, 1).
    pub(crate) fn symmetric(&mut self) -> f64 {
        2.0 * self.u01() - 1.0
    }
}

//! Seeded, splittable randomness.
//!
//! Every consumer derives its own ChaCha stream from the run seed, so drawing
//! extra numbers in one place never shifts the sequence seen by another.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Stream identifiers. Kept in one place so no two consumers collide.
pub mod streams {
    pub const PROBLEM: u64 = 1;
    pub const SAMPLER: u64 = 2;
    pub const INITIAL_POINT: u64 = 3;
    pub const DIAGNOSTIC_POINTS: u64 = 4;
    pub const MONTE_CARLO: u64 = 5;
    /// Displacement that seeds frozen direction memory in diagnostics.
    pub const FROZEN_MEMORY: u64 = 6;
}

pub fn stream(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

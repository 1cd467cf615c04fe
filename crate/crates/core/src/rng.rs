//! Seeded random generators.
//!
//! Every stochastic operation in the crate draws from ChaCha8 seeded through
//! `SeedableRng::seed_from_u64`. Parallel lanes use the same key with a
//! distinct ChaCha stream per lane, so lane outputs depend only on
//! `(seed, lane)` and never on scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Identifier recorded in run manifests.
pub const GENERATOR_ID: &str = "chacha8/rand_chacha-0.9/seed_from_u64";

pub type Generator = ChaCha8Rng;

pub fn seeded(seed: u64) -> Generator {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Generator for parallel lane `lane` of a run seeded with `seed`.
pub fn lane(seed: u64, lane: u64) -> Generator {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(lane);
    rng
}

//! Seeded randomness. Every random choice in a run flows from one `u64` seed
//! through the generator named here, so identical seeds reproduce identical
//! searches.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Name and version of the generator, recorded in run reports.
pub const GENERATOR_NAME: &str = "ChaCha8Rng (rand_chacha 0.9), seed_from_u64";

pub type RunRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> RunRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent stream for a numbered sub-task (e.g. one selection block).
pub fn substream(seed: u64, stream: u64) -> RunRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

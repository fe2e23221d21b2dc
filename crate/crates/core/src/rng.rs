//! Seeded, splittable randomness. Every stochastic routine takes a `u64`
//! seed and derives independent streams from it, so parallel work is
//! reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type ChainRng = ChaCha8Rng;

/// Stream `stream` of the generator seeded by `seed`.
pub fn stream_rng(seed: u64, stream: u64) -> ChainRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// A fresh seed from the operating system, for runs that were not given one.
pub fn draw_seed() -> u64 {
    rand::random()
}

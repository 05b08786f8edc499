//! Seeded random streams.
//!
//! Every stochastic routine takes an explicit generator. Streams are
//! ChaCha8 keyed by a 64-bit seed, with independent sub-streams selected by
//! ChaCha's 64-bit stream id, so results are identical on every platform.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

/// Generator for `seed`, sub-stream 0.
pub fn seeded(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent sub-stream `stream` of `seed`, e.g. one per trial.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// `len` uniformly random bits.
pub fn random_bits(rng: &mut SimRng, len: usize) -> Vec<bool> {
    use rand::Rng;
    (0..len).map(|_| rng.random::<bool>()).collect()
}

//! Seeded random streams.
//!
//! Stream `i` of master seed `s` is ChaCha20 keyed by `seed_from_u64(s)` with
//! its 64-bit stream id set to `i`. ChaCha20 is counter-based, so streams are
//! independent and each is reproducible on its own regardless of how many
//! other streams were consumed or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Recorded in every report.
pub const RNG_ALGORITHM: &str = "chacha20/seed_from_u64(master)/stream=trial";

pub type StreamRng = ChaCha20Rng;

pub fn stream(master_seed: u64, index: u64) -> StreamRng {
    let mut rng = ChaCha20Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}

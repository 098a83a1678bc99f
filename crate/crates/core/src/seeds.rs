//! Seed derivation for independent random streams.
//!
//! Randomized estimators split their work into restarts or trials that may
//! run on any thread; each unit derives its own stream from the base seed
//! and a few tag words, so the merged result is schedule independent.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// Mixes a base seed with tag words into a child seed (splitmix64 finalizer).
pub fn derive(base: u64, tags: &[u64]) -> u64 {
    let mut state = base ^ 0x9e37_79b9_7f4a_7c15;
    for &t in tags {
        state = state.wrapping_add(t).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        state ^= state >> 27;
    }
    let mut z = state.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// RNG for the stream identified by `tags` under `base`.
pub fn rng(base: u64, tags: &[u64]) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive(base, tags))
}

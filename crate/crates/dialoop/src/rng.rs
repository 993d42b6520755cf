//! Seeded RNG streams.
//!
//! Every stochastic component takes an explicit RNG. Independent streams are
//! derived from a run seed and a textual label so that adding a consumer
//! never shifts the draws of another.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The RNG used throughout the crate. ChaCha8 is portable and its stream is
/// stable across platforms and releases.
pub type Rng = ChaCha8Rng;

/// Derive an independent child stream from `(seed, label)`.
pub fn stream(seed: u64, label: &str) -> Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(label))
}

/// Derive an indexed child stream, e.g. one per episode.
pub fn indexed_stream(seed: u64, label: &str, index: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed ^ fnv1a(label) ^ index.wrapping_mul(0x9e37_79b9_7f4a_7c15))
}

fn fnv1a(s: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in s.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

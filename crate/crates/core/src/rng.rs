//! Seeded, splittable random streams.
//!
//! Every consumer of randomness gets its own ChaCha8 stream addressed by
//! `(seed, purpose, split, index)`, so results do not depend on the order in
//! which parallel workers draw.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type StreamRng = ChaCha8Rng;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(u64)]
pub enum Purpose {
    Parameters = 1,
    Noise = 2,
    Init = 3,
    Shuffle = 4,
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Child seed for a numbered sub-experiment (e.g. one point of a sweep).
pub fn derive_seed(seed: u64, tag: u64) -> u64 {
    mix64(seed ^ mix64(tag))
}

/// Independent stream for `(purpose, split, index)` under `seed`.
///
/// `index` must stay below 2^48.
pub fn stream(seed: u64, purpose: Purpose, split: u8, index: u64) -> StreamRng {
    debug_assert!(index < 1 << 48);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((purpose as u64) << 56) | ((split as u64) << 48) | (index & ((1 << 48) - 1)));
    rng
}

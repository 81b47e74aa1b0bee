//! Seed plumbing: every random draw in the crate goes through a ChaCha8
//! stream keyed by a 64-bit seed, and derived seeds come from SplitMix64.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finaliser.
pub fn mix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Independent child seed for `(parent, stream)`.
pub fn derive_seed(parent: u64, stream: u64) -> u64 {
    mix64(mix64(parent) ^ stream.wrapping_mul(0xD6E8_FEB8_6659_FD93))
}

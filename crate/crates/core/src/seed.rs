//! Seed derivation. Every random stream in the crate is a ChaCha8 generator
//! keyed by a sub-seed derived from one user seed, so parallel work is
//! reproducible regardless of scheduling.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[inline]
fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Derives an independent sub-seed for `stream` from `seed`.
pub fn derive(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream.wrapping_add(0x5151_5151)))
}

/// Derives a sub-seed from a path of stream labels, e.g. `(trial, element)`.
pub fn derive_path(seed: u64, path: &[u64]) -> u64 {
    path.iter().fold(seed, |s, &p| derive(s, p))
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Stream labels used across the crate.
pub mod stream {
    pub const INPUTS: u64 = 1;
    pub const MODEL_INIT: u64 = 2;
    pub const PROJECTIONS: u64 = 3;
    pub const SEARCH: u64 = 4;
    pub const SHIFT: u64 = 5;
}

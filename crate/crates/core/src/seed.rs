//! Seed derivation.
//!
//! Every random draw in the crate comes from a ChaCha stream keyed by a seed
//! derived from the caller's base seed and the coordinates of the work item
//! (dataset index, grid size, repetition, ...). Work items therefore never
//! share RNG state, and any parallel schedule reproduces the sequential one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Mix a base seed with a path of coordinates into a new seed.
pub fn derive(base: u64, path: &[u64]) -> u64 {
    path.iter()
        .fold(splitmix64(base), |acc, &p| splitmix64(acc ^ splitmix64(p)))
}

pub fn rng(seed: u64) -> Rng {
    Rng::seed_from_u64(seed)
}

pub fn rng_at(base: u64, path: &[u64]) -> Rng {
    rng(derive(base, path))
}

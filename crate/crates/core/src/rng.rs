//! Seed derivation.
//!
//! Every random stream is a ChaCha8 generator keyed by
//! `splitmix64(experiment_seed ^ splitmix64(stream))`, so independent
//! consumers (one per generator permutation, one per sampler) never share
//! state and adding a stream never perturbs the others.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn derive_seed(seed: u64, stream: u64) -> u64 {
    splitmix64(seed ^ splitmix64(stream))
}

pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(derive_seed(seed, stream))
}

/// Stream ids used inside the crate. Generator permutations use their
/// generator index directly, so these start well above any rank.
pub mod streams {
    pub const SEPARATION_SAMPLE: u64 = 1 << 32;
    pub const MICROSTATE_SAMPLE: u64 = (1 << 32) + 1;
}

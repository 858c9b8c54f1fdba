//! Seeding for reproducible simulations.
//!
//! All randomness flows through [`SimRng`] (ChaCha with 8 rounds, seeded from
//! a 64-bit value). Independent streams are derived from a master seed with
//! [`derive_seed`], so trial `k` draws the same edges regardless of how many
//! other trials run or in which order.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type SimRng = ChaCha8Rng;

pub fn sim_rng(seed: u64) -> SimRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of stream `index` under `master`.
pub fn derive_seed(master: u64, index: u64) -> u64 {
    mix(mix(master) ^ index.wrapping_mul(0xD1B5_4A32_D192_ED03))
}

/// Stream labels for the different consumers of a master seed.
pub mod stream {
    pub const INSTANCE: u64 = 0x1157_A9CE;
    pub const TRIALS: u64 = 0x7A1A_15;
}

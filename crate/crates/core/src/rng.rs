//! Seeded, platform-independent randomness.
//!
//! Every random draw in the crate goes through [`SeededRng`]:
//! Xoshiro256++ whose state is expanded from a `u64` seed by SplitMix64.

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
pub use rand_xoshiro::Xoshiro256PlusPlus as SeededRng;

pub fn seeded(seed: u64) -> SeededRng {
    SeededRng::seed_from_u64(seed)
}

#[inline]
pub fn standard_normal(rng: &mut SeededRng) -> f64 {
    StandardNormal.sample(rng)
}

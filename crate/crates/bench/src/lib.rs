//! Shared fixtures for the benchmarks.

use mrdm_core::rate_plan::{Composition, RatePlan};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn random_signal(len: usize, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..len).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

/// `2^J` equal-rate channels at 64 kbps with 8-bit words.
pub fn equal_rate_plan(blocklength: u64, scales: u32) -> RatePlan {
    let mut counts = vec![0; scales as usize];
    counts[scales as usize - 1] = 1 << scales;
    RatePlan::from_composition(blocklength, 64_000, 8, &Composition::new(counts))
}

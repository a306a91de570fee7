//! Seeded, portable randomness.
//!
//! Every stochastic step draws from ChaCha8 keyed by a 64-bit seed (expanded
//! with `rand_core`'s PCG32-based `seed_from_u64`) on an explicit stream id.
//! Bounded integers use Lemire's widening-multiply rejection on `next_u64`,
//! so a draw sequence depends only on the ChaCha8 keystream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct SamplerSeed(pub u64);

impl SamplerSeed {
    /// Child seed for a keyed work item (SplitMix64 finalizer over `seed ^ mix(key)`).
    pub fn derive(self, key: u64) -> SamplerSeed {
        SamplerSeed(splitmix64(self.0 ^ splitmix64(key)))
    }

    /// Generator for one independent work item.
    pub fn rng(self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.0);
        rng.set_stream(stream);
        rng
    }
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Uniform integer in `0..bound`. `bound` must be non-zero.
pub fn uniform_below<R: RngCore + ?Sized>(rng: &mut R, bound: u64) -> u64 {
    assert!(bound > 0, "empty range");
    let threshold = bound.wrapping_neg() % bound;
    loop {
        let m = (rng.next_u64() as u128) * (bound as u128);
        if (m as u64) >= threshold {
            return (m >> 64) as u64;
        }
    }
}

/// Uniform float in `[0, 1)` with 53 random bits.
pub fn unit_f64<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

/// First `k` entries of a partial Fisher–Yates shuffle of `items`.
pub fn sample_without_replacement<T: Copy, R: RngCore + ?Sized>(rng: &mut R, items: &[T], k: usize) -> Vec<T> {
    let mut pool = items.to_vec();
    let k = k.min(pool.len());
    for i in 0..k {
        let j = i + uniform_below(rng, (pool.len() - i) as u64) as usize;
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

//! Seedable, splittable random source shared by every stochastic operation.
//!
//! `SimRng` wraps ChaCha8. Child streams are derived with SplitMix64 so that a
//! replicate, a channel batch and a GA run can each own an independent stream
//! that depends only on `(seed, label)`, never on how much randomness a sibling
//! consumed. Gaussian variates come from `rand_distr::StandardNormal`
//! (ziggurat); reimplementations can match the statistics, not the bit stream.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Stream labels used across the crate.
pub mod streams {
    pub const CHANNEL: u64 = 0x6368_616e;
    pub const GA: u64 = 0x6761;
}

#[derive(Debug, Clone)]
pub struct SimRng {
    seed: u64,
    inner: ChaCha8Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

impl SimRng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream. Depends only on this source's seed and
    /// `label`, not on its current position.
    pub fn split(&self, label: u64) -> SimRng {
        SimRng::new(splitmix64(self.seed ^ splitmix64(label)))
    }
}

impl RngCore for SimRng {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}

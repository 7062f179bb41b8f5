//! Seeded, splittable random streams.
//!
//! Every Monte-Carlo trial derives its own stream from the master seed and a
//! path of indices (SNR index, trial index, ...), so results do not depend on
//! how trials are scheduled across workers.

use rand::{Rng as _, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// SplitMix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Independent child stream identified by `path`. Does not advance `self`.
    pub fn derive(&self, path: &[u64]) -> Rng {
        let mut s = mix(self.seed);
        for &p in path {
            s = mix(s ^ mix(p.wrapping_add(0x632B_E59B_D9B4_E019)));
        }
        Rng::new(s)
    }

    pub fn standard_normal(&mut self) -> f64 {
        self.inner.sample(StandardNormal)
    }

    pub fn sample_standard_normal(&mut self, n: usize) -> Vec<f64> {
        (0..n).map(|_| self.standard_normal()).collect()
    }

    /// Uniform index in `0..n`.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.gen_range(0..n)
    }

    pub fn uniform(&mut self) -> f64 {
        self.inner.gen()
    }
}

/// Convenience wrapper matching the free-function form used in tests.
pub fn sample_standard_normal(rng: &mut Rng, n: usize) -> Vec<f64> {
    rng.sample_standard_normal(n)
}

//! Per-trial random streams derived from one master seed.
//!
//! Trial `i`, attempt `a` draws from a ChaCha8 generator keyed by
//! `split(split(master, i), a)` (attempt 0 uses `split(master, i)` itself).
//! The 256-bit key is four SplitMix64 outputs of that 64-bit seed, so every
//! substream is fixed by `(master, i, a)` alone and does not depend on the
//! order in which trials are scheduled.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

const GOLDEN: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `mix64(mix64(master) ^ (index + 1) * GOLDEN)`, wrapping arithmetic.
pub fn split(master: u64, index: u64) -> u64 {
    mix64(mix64(master) ^ index.wrapping_add(1).wrapping_mul(GOLDEN))
}

/// Generator for a 64-bit substream seed.
pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    let mut key = [0u8; 32];
    for (k, chunk) in key.chunks_exact_mut(8).enumerate() {
        let word = mix64(seed.wrapping_add((k as u64 + 1).wrapping_mul(GOLDEN)));
        chunk.copy_from_slice(&word.to_le_bytes());
    }
    ChaCha8Rng::from_seed(key)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RngStream {
    master: u64,
}

impl RngStream {
    pub fn new(master: u64) -> Self {
        RngStream { master }
    }

    pub fn master(&self) -> u64 {
        self.master
    }

    pub fn seed(&self, index: u64, attempt: u32) -> u64 {
        let s = split(self.master, index);
        if attempt == 0 {
            s
        } else {
            split(s, attempt as u64)
        }
    }

    pub fn rng(&self, index: u64, attempt: u32) -> ChaCha8Rng {
        rng_from_seed(self.seed(index, attempt))
    }
}

pub fn gaussian_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.sample::<f64, _>(StandardNormal)).collect()
}

/// Uniform direction on the unit sphere in `R^d`.
pub fn unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<f64> {
    loop {
        let g = gaussian_vector(d, rng);
        let n = crate::linalg::norm(&g);
        if n > 1e-300 {
            return g.into_iter().map(|v| v / n).collect();
        }
    }
}

//! Deterministic random streams.
//!
//! Every stochastic step in the crate draws from [`Rng`], which is a
//! xoshiro256++ generator seeded through SplitMix64 (`seed_from_u64`). The
//! algorithm is fixed: changing it changes every seeded output the crate
//! produces.
//!
//! Independent streams are derived with [`StreamKey`], which folds a base
//! seed and a sequence of labels (strings or integers) into a child seed.
//! Strings are hashed with 64-bit FNV-1a and every fold step goes through the
//! SplitMix64 finalizer, so a child stream depends only on its key and never
//! on how many values other streams consumed.

use rand::seq::SliceRandom;
use rand::{Rng as _, RngCore, SeedableRng};
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;

#[derive(Debug, Clone)]
pub struct Rng {
    inner: Xoshiro256PlusPlus,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            inner: Xoshiro256PlusPlus::seed_from_u64(seed),
        }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform in `[lo, hi)`.
    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    /// Uniform integer in `lo..=hi`.
    pub fn int_inclusive(&mut self, lo: usize, hi: usize) -> usize {
        self.inner.random_range(lo..=hi)
    }

    /// Uniform index in `0..n`. `n` must be positive.
    pub fn index(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn gaussian(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn shuffle<T>(&mut self, items: &mut [T]) {
        items.shuffle(&mut self.inner);
    }
}

/// Builder for a labelled child stream: `StreamKey::new(seed).str("aug").u64(epoch).rng()`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StreamKey(u64);

impl StreamKey {
    pub fn new(seed: u64) -> Self {
        Self(splitmix64(seed))
    }

    pub fn u64(self, part: u64) -> Self {
        Self(splitmix64(self.0 ^ splitmix64(part)))
    }

    pub fn str(self, part: &str) -> Self {
        self.u64(fnv1a64(part.as_bytes()))
    }

    pub fn seed(self) -> u64 {
        self.0
    }

    pub fn rng(self) -> Rng {
        Rng::new(self.0)
    }
}

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    bytes.iter().fold(0xcbf2_9ce4_8422_2325, |h, &b| {
        (h ^ b as u64).wrapping_mul(0x0000_0100_0000_01B3)
    })
}

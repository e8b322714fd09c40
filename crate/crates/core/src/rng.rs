//! Seeded random streams.
//!
//! Every stochastic operation takes an explicit [`RngStream`]; there is no global generator.
//! Child streams are derived from the parent's *seed* and a label, never from its current
//! state, so drawing from a parent does not perturb its children and vice versa.

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::StandardNormal;

use crate::Scalar;

pub const ALGORITHM: &str = "chacha12";

#[derive(Debug, Clone)]
pub struct RngStream {
    seed: u64,
    inner: ChaCha12Rng,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn fnv1a(label: &str) -> u64 {
    label.bytes().fold(0xcbf2_9ce4_8422_2325_u64, |h, b| {
        (h ^ u64::from(b)).wrapping_mul(0x0000_0100_0000_01b3)
    })
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn algorithm(&self) -> &'static str {
        ALGORITHM
    }

    /// Independent stream keyed by `(seed, label)`.
    pub fn child(&self, label: &str) -> Self {
        Self::new(splitmix64(self.seed ^ splitmix64(fnv1a(label))))
    }

    /// Independent stream keyed by `(seed, label, index)`.
    pub fn child_indexed(&self, label: &str, index: u64) -> Self {
        let base = splitmix64(self.seed ^ splitmix64(fnv1a(label)));
        Self::new(splitmix64(base ^ splitmix64(index.wrapping_add(1))))
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.random()
    }

    /// Uniform draw in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random()
    }

    pub fn uniform_range(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.uniform()
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.uniform() < p
    }

    pub fn standard_normal<T: Scalar>(&mut self) -> T {
        let z: f64 = self.inner.sample(StandardNormal);
        T::lit(z)
    }

    pub fn shuffle<U>(&mut self, items: &mut [U]) {
        items.shuffle(&mut self.inner);
    }

    pub fn permutation(&mut self, n: usize) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..n).collect();
        self.shuffle(&mut idx);
        idx
    }

    /// `amount` distinct indices from `0..n`, uniformly without replacement.
    pub fn sample_indices(&mut self, n: usize, amount: usize) -> Vec<usize> {
        index::sample(&mut self.inner, n, amount).into_vec()
    }
}

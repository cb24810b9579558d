//! Seeded, splittable random source.
//!
//! Backed by ChaCha12, a counter-based stream cipher, so the output sequence
//! for a given seed is identical on every platform. Child generators are
//! derived by keying a separate ChaCha stream with the parent seed, which
//! lets independent trials and protocol roles draw from non-overlapping
//! sequences that all trace back to one master seed.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha12Rng;

#[derive(Debug, Clone)]
pub struct Rng {
    seed: u64,
    inner: ChaCha12Rng,
}

impl Rng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha12Rng::seed_from_u64(seed),
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Seed of the `index`-th child. Depends only on this generator's seed,
    /// never on how many values have already been drawn.
    pub fn child_seed(&self, index: u64) -> u64 {
        let mut keyed = ChaCha12Rng::seed_from_u64(self.seed);
        // stream 0 is the parent's own output
        keyed.set_stream(index.wrapping_add(1));
        keyed.next_u64()
    }

    pub fn derive(&self, index: u64) -> Rng {
        Rng::new(self.child_seed(index))
    }

    /// Uniform in `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        rand::Rng::random::<f64>(&mut self.inner)
    }

    /// Uniform integer in `0..n`.
    pub fn below(&mut self, n: usize) -> usize {
        rand::Rng::random_range(&mut self.inner, 0..n)
    }

    /// Bernoulli trial with success probability `p`.
    pub fn chance(&mut self, p: f64) -> bool {
        p > 0.0 && self.uniform() < p
    }

    /// `amount` distinct indices from `0..len`, sorted ascending.
    pub fn subset(&mut self, len: usize, amount: usize) -> Vec<usize> {
        let mut picked = rand::seq::index::sample(&mut self.inner, len, amount).into_vec();
        picked.sort_unstable();
        picked
    }
}

impl RngCore for Rng {
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

//! Seeded, splittable randomness.
//!
//! [`Prng`] wraps a ChaCha8 stream cipher generator. A seed selects the key
//! and [`Prng::stream`] selects an independent stream under that key, so the
//! gradient minibatches, Hessian minibatches and iterate choice of a run can
//! each draw from their own sequence without perturbing the others.

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};

/// Stream ids used by the optimizers.
pub mod streams {
    pub const GRADIENT: u64 = 0;
    pub const HESSIAN: u64 = 1;
    pub const ITERATE: u64 = 2;
    pub const INIT: u64 = 3;
    pub const DATA: u64 = 4;
}

#[derive(Debug, Clone)]
pub struct Prng {
    seed: u64,
    inner: ChaCha8Rng,
}

impl Prng {
    pub fn new(seed: u64) -> Self {
        Self {
            seed,
            inner: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    /// An independent generator keyed by the same seed.
    pub fn stream(seed: u64, stream: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(stream);
        Self { seed, inner }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.inner.random::<f64>()
    }

    /// Uniform on `[0, n)`. `n` must be positive.
    pub fn below(&mut self, n: usize) -> usize {
        self.inner.random_range(0..n)
    }

    pub fn normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.inner)
    }

    pub fn normal_vec(&mut self, len: usize) -> Vec<f64> {
        (0..len).map(|_| self.normal()).collect()
    }
}

/// Draws `b` distinct indices from `0..n`, uniformly over all size-`b`
/// subsets, returned in ascending order.
pub fn sample_minibatch(prng: &mut Prng, n: usize, b: usize) -> Result<Vec<usize>> {
    if b == 0 || b > n {
        return Err(Error::invalid(format!(
            "minibatch size {b} must be in 1..={n}"
        )));
    }
    if b == n {
        return Ok((0..n).collect());
    }
    let mut picked = index::sample(&mut prng.inner, n, b).into_vec();
    picked.sort_unstable();
    Ok(picked)
}

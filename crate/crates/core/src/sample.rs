//! Seeded random distributions and pairs.
//!
//! Every draw gets its own ChaCha8 stream, selected by a counter, so the
//! `i`-th draw for a seed is the same whatever happened before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

use crate::dist::{Channel, Dist};
use crate::error::{domain, Result};

/// Reproducible source of random distributions, pairs and channels.
#[derive(Debug, Clone)]
pub struct Sampler {
    seed: u64,
    min_len: usize,
    max_len: usize,
}

impl Sampler {
    /// Sampler over spaces of size `2..=8`.
    pub fn new(seed: u64) -> Self {
        Sampler {
            seed,
            min_len: 2,
            max_len: 8,
        }
    }

    /// Restricts the space size to `min..=max`.
    pub fn with_len(mut self, min: usize, max: usize) -> Result<Self> {
        if min == 0 || min > max {
            return Err(domain(format!("invalid space size range {min}..={max}")));
        }
        self.min_len = min;
        self.max_len = max;
        Ok(self)
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// The generator for draw number `index`.
    pub fn rng(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        rng
    }

    /// Pair of distributions on a common space of random size.
    ///
    /// Half the draws are independent Dirichlet vectors; the other half
    /// tilt the second distribution exponentially to produce pairs at every
    /// scale of closeness, including near-identical ones.
    pub fn pair(&self, index: u64) -> (Dist, Dist) {
        let mut rng = self.rng(index);
        let n = rng.random_range(self.min_len..=self.max_len);
        random_pair(&mut rng, n)
    }

    /// Pair on a space of exactly `n` points.
    pub fn pair_of_len(&self, index: u64, n: usize) -> (Dist, Dist) {
        let mut rng = self.rng(index);
        random_pair(&mut rng, n)
    }

    /// Row-stochastic channel with `rows × cols` entries.
    pub fn channel(&self, index: u64, rows: usize, cols: usize) -> Channel {
        let mut rng = self.rng(index);
        random_channel(&mut rng, rows, cols)
    }
}

/// Dirichlet draw with a random symmetric concentration in `[0.1, 3]`.
pub fn random_probs<R: Rng + ?Sized>(rng: &mut R, n: usize) -> Vec<f64> {
    let concentration = rng.random_range(0.1..3.0);
    dirichlet(rng, n, concentration)
}

fn dirichlet<R: Rng + ?Sized>(rng: &mut R, n: usize, concentration: f64) -> Vec<f64> {
    let gamma = Gamma::new(concentration, 1.0).expect("positive shape");
    loop {
        let draws: Vec<f64> = (0..n).map(|_| gamma.sample(rng)).collect();
        let total: f64 = draws.iter().sum();
        if total > 0.0 && total.is_finite() {
            return draws.iter().map(|d| d / total).collect();
        }
    }
}

pub fn random_pair<R: Rng + ?Sized>(rng: &mut R, n: usize) -> (Dist, Dist) {
    let q = random_probs(rng, n);
    let p = if rng.random_bool(0.5) {
        random_probs(rng, n)
    } else {
        let scale = 10f64.powf(rng.random_range(-3.0..1.0));
        let weights: Vec<f64> = q
            .iter()
            .map(|&qi| qi * (scale * rng.random_range(-1.0..1.0f64)).exp())
            .collect();
        let total: f64 = weights.iter().sum();
        weights.iter().map(|w| w / total).collect()
    };
    (
        Dist::from_probs(&p).expect("normalized draw"),
        Dist::from_probs(&q).expect("normalized draw"),
    )
}

pub fn random_channel<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> Channel {
    let matrix: Vec<Vec<f64>> = (0..rows).map(|_| random_probs(rng, cols)).collect();
    let in_labels: Vec<String> = (0..rows).map(|i| i.to_string()).collect();
    let out_labels: Vec<String> = (0..cols).map(|j| format!("y{j}")).collect();
    Channel::new(in_labels, out_labels, matrix).expect("row-stochastic draw")
}

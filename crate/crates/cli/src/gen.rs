//! Deterministic instance generation for benchmarks and verification.
//!
//! All randomness flows through splitmix64 with the standard constants, so
//! the same (n, distribution, seed) triple produces the same instance on
//! every platform. Weights are integers, which keeps exact oracles exact
//! (integer sums are exact in f64) and matches the classic benchmark
//! families.

use clap::ValueEnum;
use knapsack_fptas::{Instance, Item};

/// splitmix64: the reference 64-bit mixing generator.
#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E3779B97F4A7C15);
        mix(self.state)
    }

    /// Uniform draw from [1, bound] (modulo bias is irrelevant at these
    /// bound sizes and keeps the stream layout trivial to document).
    pub fn uniform(&mut self, bound: u64) -> u64 {
        1 + self.next_u64() % bound
    }
}

/// The splitmix64 finalizer, also used to fold cell coordinates into seeds.
pub fn mix(x: u64) -> u64 {
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D049BB133111EB);
    z ^ (z >> 31)
}

/// Benchmark instance families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Dist {
    /// w and p independent uniform integers in [1, 10^4].
    Uniform,
    /// w uniform in [1, 10^4], p = w + uniform noise in [1, 10^3].
    Correlated,
}

impl Dist {
    pub fn name(self) -> &'static str {
        match self {
            Dist::Uniform => "uniform",
            Dist::Correlated => "correlated",
        }
    }
}

/// One seeded instance: n items from the family, capacity = half the total
/// weight (at least 1), the classic hard regime.
pub fn generate(n: usize, dist: Dist, seed: u64) -> Instance {
    let mut rng = SplitMix64::new(seed);
    let mut items = Vec::with_capacity(n);
    let mut wsum = 0.0;
    for _ in 0..n {
        let w = rng.uniform(10_000) as f64;
        let p = match dist {
            Dist::Uniform => rng.uniform(10_000) as f64,
            Dist::Correlated => w + rng.uniform(1_000) as f64,
        };
        wsum += w;
        items.push(Item { weight: w, profit: p });
    }
    let capacity = (wsum / 2.0).round().max(1.0);
    Instance { items, capacity }
}

/// Per-cell seed: mixes the user seed with the cell coordinates so cells
/// are independent of iteration order.
pub fn cell_seed(seed: u64, n: usize, eps: f64) -> u64 {
    mix(seed) ^ mix(n as u64) ^ mix(eps.to_bits())
}

//! Deterministic replicate machinery shared by every Monte Carlo driver.
//!
//! Replicate `i` of a run with base seed `s` draws from a ChaCha8 stream
//! seeded with `mix_seed(s, i)`. Replicate outputs are collected in index
//! order and reduced with a fixed pairwise tree, so serial and parallel runs
//! give bit-identical results.

use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

/// SplitMix64 finalizer applied to `(base, index)`.
pub fn mix_seed(base: u64, index: u64) -> u64 {
    let mut z = base.wrapping_add(index.wrapping_add(1).wrapping_mul(GOLDEN_GAMMA));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Thread count for replicate loops. `None` uses the global rayon pool.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Parallelism(pub Option<usize>);

impl Parallelism {
    pub const SERIAL: Parallelism = Parallelism(Some(1));

    pub fn threads(n: usize) -> Self {
        Parallelism(Some(n.max(1)))
    }
}

/// Evaluate `f(i)` for `i in 0..replicates`, returning results in index order.
pub fn map_replicates<T, F>(replicates: usize, par: Parallelism, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    match par.0 {
        Some(1) => (0..replicates as u64).map(f).collect(),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .expect("failed to build replicate thread pool");
            pool.install(|| (0..replicates as u64).into_par_iter().map(f).collect())
        }
        None => (0..replicates as u64).into_par_iter().map(f).collect(),
    }
}

/// Pairwise sum with a split point fixed by the slice length alone.
pub fn tree_sum(xs: &[f64]) -> f64 {
    match xs.len() {
        0 => 0.0,
        1 => xs[0],
        2 => xs[0] + xs[1],
        n => {
            let (l, r) = xs.split_at(n / 2);
            tree_sum(l) + tree_sum(r)
        }
    }
}

/// Sample moments of a replicate vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub count: usize,
    pub mean: f64,
    /// Unbiased sample variance (0 for a single sample).
    pub variance: f64,
    /// Standard error of the mean.
    pub se_mean: f64,
    /// Standard error of the sample variance, from the fourth central moment.
    pub se_variance: f64,
}

impl Moments {
    pub fn of(xs: &[f64]) -> Self {
        let count = xs.len();
        if count == 0 {
            return Self {
                count,
                mean: f64::NAN,
                variance: f64::NAN,
                se_mean: f64::NAN,
                se_variance: f64::NAN,
            };
        }
        let nf = count as f64;
        let mean = tree_sum(xs) / nf;
        let dev2: Vec<f64> = xs.iter().map(|x| (x - mean) * (x - mean)).collect();
        let m2 = tree_sum(&dev2) / nf;
        let dev4: Vec<f64> = dev2.iter().map(|d| d * d).collect();
        let m4 = tree_sum(&dev4) / nf;
        let variance = if count > 1 { m2 * nf / (nf - 1.0) } else { 0.0 };
        Self {
            count,
            mean,
            variance,
            se_mean: (variance / nf).sqrt(),
            se_variance: ((m4 - m2 * m2).max(0.0) / nf).sqrt(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn seeds_differ_per_replicate() {
        let a = mix_seed(7, 0);
        let b = mix_seed(7, 1);
        let c = mix_seed(8, 0);
        assert_ne!(a, b);
        assert_ne!(a, c);
        assert_eq!(a, mix_seed(7, 0));
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let draw = |i: u64| rng_for(mix_seed(42, i)).random::<f64>();
        let serial = map_replicates(257, Parallelism::SERIAL, draw);
        let par = map_replicates(257, Parallelism::threads(4), draw);
        assert_eq!(serial, par);
        assert_eq!(tree_sum(&serial).to_bits(), tree_sum(&par).to_bits());
    }

    #[test]
    fn moments_of_small_sample() {
        let m = Moments::of(&[1.0, 2.0, 3.0, 4.0]);
        assert_eq!(m.mean, 2.5);
        assert!((m.variance - 5.0 / 3.0).abs() < 1e-15);
        let single = Moments::of(&[3.0]);
        assert_eq!(single.variance, 0.0);
    }
}

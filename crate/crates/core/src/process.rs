//! Poisson process samples, simulation, empirical integrals and the
//! Monte Carlo diagnostics built on them.

use rand::Rng;
use rand_distr::{Distribution, Poisson};

use crate::basis::{LambdaIndex, WaveletBasis};
use crate::error::{Error, Result};
use crate::intensity::Intensity;
use crate::montecarlo::{map_replicates, mix_seed, rng_for, Moments, Parallelism};
use crate::step::StepFunction;

/// One realization: sorted event times with the normalization `n`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSample {
    times: Vec<f64>,
    n: u64,
    seed: Option<u64>,
}

impl PointSample {
    /// Sorts `times`; rejects `n = 0` and non-finite times.
    pub fn new(mut times: Vec<f64>, n: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("n must be >= 1".into()));
        }
        if let Some(t) = times.iter().find(|t| !t.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "event time {t} is not finite"
            )));
        }
        times.sort_by(f64::total_cmp);
        Ok(Self {
            times,
            n,
            seed: None,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Number of events in `[a, b)`.
    pub fn count_in(&self, a: f64, b: f64) -> usize {
        let lo = self.times.partition_point(|&t| t < a);
        let hi = self.times.partition_point(|&t| t < b);
        hi.saturating_sub(lo)
    }
}

/// Draw `K ~ Poisson(n‖f‖₁)` and then `K` points from `f/‖f‖₁` by inversion.
pub fn simulate(f: &Intensity, n: u64, seed: u64) -> Result<PointSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("n must be >= 1".into()));
    }
    let mut rng = rng_for(seed);
    let mean = n as f64 * f.total_mass();
    let count = Poisson::new(mean)
        .map_err(|e| Error::InvalidArgument(format!("Poisson mean {mean}: {e}")))?
        .sample(&mut rng) as usize;
    let mut times: Vec<f64> = (0..count)
        .map(|_| f.inverse_cdf(rng.random::<f64>()))
        .collect();
    times.sort_by(f64::total_cmp);
    Ok(PointSample {
        times,
        n,
        seed: Some(seed),
    })
}

/// `Σ_T g(T)`.
pub fn empirical_integral(sample: &PointSample, g: &StepFunction) -> f64 {
    g.pieces()
        .filter(|&(_, _, v)| v != 0.0)
        .map(|(a, b, v)| v * sample.count_in(a, b) as f64)
        .sum()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CampbellReport {
    pub mean: f64,
    pub variance: f64,
    pub se_mean: f64,
    pub se_variance: f64,
    pub target_mean: f64,
    pub target_var: f64,
}

impl CampbellReport {
    /// Both moments within `z` standard errors of their targets.
    pub fn within(&self, z: f64) -> bool {
        (self.mean - self.target_mean).abs() <= z * self.se_mean
            && (self.variance - self.target_var).abs() <= z * self.se_variance
    }
}

/// Monte Carlo mean and variance of `∫g dN` against `n∫gf` and `n∫g²f`.
pub fn campbell_check(
    f: &Intensity,
    n: u64,
    g: &StepFunction,
    replicates: usize,
    seed: u64,
    par: Parallelism,
) -> Result<CampbellReport> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least 2 replicates".into()));
    }
    let vals: Vec<f64> = map_replicates(replicates, par, |i| {
        simulate(f, n, mix_seed(seed, i)).map(|s| empirical_integral(&s, g))
    })
    .into_iter()
    .collect::<Result<_>>()?;
    let m = Moments::of(&vals);
    let nf = n as f64;
    Ok(CampbellReport {
        mean: m.mean,
        variance: m.variance,
        se_mean: m.se_mean,
        se_variance: m.se_variance,
        target_mean: nf * f.integrate(f64::NEG_INFINITY, f64::INFINITY, g),
        target_var: nf * f.integrate(f64::NEG_INFINITY, f64::INFINITY, &g.squared()),
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExceedanceReport {
    pub exceedances: usize,
    pub replicates: usize,
    pub frequency: f64,
    pub bound: f64,
    /// Binomial standard error at `p = min(bound, 1)`.
    pub se: f64,
}

impl ExceedanceReport {
    fn new(exceedances: usize, replicates: usize, bound: f64) -> Self {
        let p = bound.min(1.0);
        Self {
            exceedances,
            replicates,
            frequency: exceedances as f64 / replicates as f64,
            bound,
            se: (p * (1.0 - p) / replicates as f64).sqrt(),
        }
    }

    /// `frequency <= bound + z·se`.
    pub fn within(&self, z: f64) -> bool {
        self.frequency <= self.bound + z * self.se
    }
}

fn count_exceedances(
    f: &Intensity,
    n: u64,
    replicates: usize,
    seed: u64,
    par: Parallelism,
    exceeds: impl Fn(&PointSample) -> bool + Sync + Send,
) -> Result<usize> {
    let hits: Vec<Result<bool>> = map_replicates(replicates, par, |i| {
        simulate(f, n, mix_seed(seed, i)).map(|s| exceeds(&s))
    });
    let mut count = 0;
    for h in hits {
        count += h? as usize;
    }
    Ok(count)
}

/// Frequency of `|β̂_λ - β_λ| >= √(2u V_{λ,n}) + ‖φ_λ‖_∞ u/(3n)`, bound `2e^{-u}`.
#[allow(clippy::too_many_arguments)]
pub fn tail_check(
    f: &Intensity,
    n: u64,
    basis: &WaveletBasis,
    lambda: LambdaIndex,
    u: f64,
    replicates: usize,
    seed: u64,
    par: Parallelism,
) -> Result<ExceedanceReport> {
    if !(u > 0.0) || replicates == 0 {
        return Err(Error::InvalidArgument(
            "tail check needs u > 0 and at least one replicate".into(),
        ));
    }
    let phi = basis.analysis_fn(lambda);
    let nf = n as f64;
    let beta = f.integrate(f64::NEG_INFINITY, f64::INFINITY, &phi);
    let v = f.integrate(f64::NEG_INFINITY, f64::INFINITY, &phi.squared()) / nf;
    let level = (2.0 * u * v).sqrt() + basis.sup_norm(lambda) * u / (3.0 * nf);
    let count = count_exceedances(f, n, replicates, seed, par, |s| {
        (empirical_integral(s, &phi) / nf - beta).abs() >= level
    })?;
    Ok(ExceedanceReport::new(count, replicates, 2.0 * (-u).exp()))
}

/// Frequency of `∫g(dN - dμ) >= √(2u∫g²dμ) + ‖g‖_∞ u/3`, bound `e^{-u}`.
pub fn exponential_inequality_check(
    f: &Intensity,
    n: u64,
    g: &StepFunction,
    u: f64,
    replicates: usize,
    seed: u64,
    par: Parallelism,
) -> Result<ExceedanceReport> {
    if !(u > 0.0) || replicates == 0 {
        return Err(Error::InvalidArgument(
            "exponential inequality check needs u > 0 and at least one replicate".into(),
        ));
    }
    let nf = n as f64;
    let mean = nf * f.integrate(f64::NEG_INFINITY, f64::INFINITY, g);
    let var = nf * f.integrate(f64::NEG_INFINITY, f64::INFINITY, &g.squared());
    let level = (2.0 * u * var).sqrt() + g.sup_abs() * u / 3.0;
    let count = count_exceedances(f, n, replicates, seed, par, |s| {
        empirical_integral(s, g) - mean >= level
    })?;
    Ok(ExceedanceReport::new(count, replicates, (-u).exp()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn haar_psi00() -> StepFunction {
        StepFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, -1.0]).unwrap()
    }

    #[test]
    fn empirical_integral_examples() {
        let s = PointSample::new(vec![0.75, 0.25], 4).unwrap();
        assert_eq!(s.times(), &[0.25, 0.75]);
        let ind = StepFunction::indicator(0.0, 1.0).unwrap();
        assert_eq!(empirical_integral(&s, &ind), 2.0);
        assert_eq!(empirical_integral(&s, &haar_psi00()), 0.0);
        let empty = PointSample::new(vec![], 4).unwrap();
        assert_eq!(empirical_integral(&empty, &ind), 0.0);
    }

    #[test]
    fn simulate_is_deterministic_and_in_support() {
        let f = Intensity::power_spike(0.25).unwrap();
        let a = simulate(&f, 100, 9).unwrap();
        let b = simulate(&f, 100, 9).unwrap();
        assert_eq!(a, b);
        assert!(a.times().iter().all(|&t| (0.0..=1.0).contains(&t)));
        assert!(a.times().windows(2).all(|w| w[0] <= w[1]));
        assert_ne!(a, simulate(&f, 100, 10).unwrap());
    }

    #[test]
    fn campbell_targets() {
        let f = Intensity::indicator(0.0, 1.0).unwrap();
        let ind = StepFunction::indicator(0.0, 1.0).unwrap();
        let r = campbell_check(&f, 10, &ind, 100, 1, Parallelism::SERIAL).unwrap();
        assert_eq!((r.target_mean, r.target_var), (10.0, 10.0));
        let r = campbell_check(&f, 16, &haar_psi00(), 100, 1, Parallelism::SERIAL).unwrap();
        assert_eq!((r.target_mean, r.target_var), (0.0, 16.0));
        let spike = Intensity::power_spike(0.25).unwrap();
        let r = campbell_check(&spike, 8, &ind, 100, 1, Parallelism::SERIAL).unwrap();
        assert!((r.target_mean - 32.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn tail_check_outside_support_never_exceeds() {
        let f = Intensity::indicator(0.0, 1.0).unwrap();
        let basis = WaveletBasis::haar();
        let r = tail_check(
            &f,
            64,
            &basis,
            LambdaIndex::new(0, 5),
            2.0,
            500,
            3,
            Parallelism::SERIAL,
        )
        .unwrap();
        assert_eq!(r.exceedances, 0);
        assert!((r.bound - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
        assert!((2.0 * (-5.0f64).exp() - 0.013475894).abs() < 1e-9);
    }

    #[test]
    fn rejects_zero_n() {
        let f = Intensity::indicator(0.0, 1.0).unwrap();
        assert!(simulate(&f, 0, 1).is_err());
        assert!(PointSample::new(vec![0.5], 0).is_err());
    }
}

//! Empirical coefficients, data-driven thresholds and the thresholded estimate.

use serde::{Deserialize, Serialize};

use crate::basis::{BasisSpec, LambdaIndex, Side, WaveletBasis, DEFAULT_J_GRID};
use crate::error::{Error, Result};
use crate::process::{empirical_integral, PointSample};

/// Upper limit for the exhaustive subset search.
pub const MAX_BRUTEFORCE_RECORDS: usize = 20;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub gamma: f64,
    pub c: f64,
    pub c_prime: f64,
    pub basis: BasisSpec,
    pub j_grid: u32,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            gamma: 1.5,
            c: 1.0,
            c_prime: -1.0,
            basis: BasisSpec::Haar,
            j_grid: DEFAULT_J_GRID,
        }
    }
}

impl EstimatorConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "gamma must be > 0, got {}",
                self.gamma
            )));
        }
        if !(self.c >= 1.0 && self.c.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "c must be >= 1, got {}",
                self.c
            )));
        }
        if !self.c_prime.is_finite() {
            return Err(Error::InvalidArgument("c' must be finite".into()));
        }
        Ok(())
    }

    /// `γ > c`, the regime covered by the oracle inequality.
    pub fn in_oracle_regime(&self) -> bool {
        self.gamma > self.c
    }

    pub fn build_basis(&self) -> Result<WaveletBasis> {
        WaveletBasis::from_spec(&self.basis, self.j_grid)
    }
}

/// The unique `j₀` with `2^{j₀} <= n^c (ln n)^{c'} < 2^{j₀+1}`.
pub fn level_cutoff(n: u64, c: f64, c_prime: f64) -> Result<i32> {
    let nf = n as f64;
    let target = nf.powf(c) * nf.ln().powf(c_prime);
    if n < 2 || !(target >= 1.0) || !target.is_finite() {
        return Err(Error::InvalidCutoff {
            n,
            c,
            c_prime,
            target,
        });
    }
    let mut j0 = target.log2().floor() as i32;
    while 2f64.powi(j0 + 1) <= target {
        j0 += 1;
    }
    while 2f64.powi(j0) > target {
        j0 -= 1;
    }
    Ok(j0)
}

/// `β̂_λ = (1/n) Σ_T φ_λ(T)`.
pub fn empirical_coefficient(
    sample: &PointSample,
    lambda: LambdaIndex,
    basis: &WaveletBasis,
) -> f64 {
    empirical_integral(sample, &basis.analysis_fn(lambda)) / sample.n() as f64
}

/// `V̂_{λ,n} = (1/n²) Σ_T φ_λ(T)²`.
pub fn empirical_variance(sample: &PointSample, lambda: LambdaIndex, basis: &WaveletBasis) -> f64 {
    let nf = sample.n() as f64;
    empirical_integral(sample, &basis.analysis_fn(lambda).squared()) / (nf * nf)
}

fn inflate_variance(v_hat: f64, sup: f64, gamma: f64, n: u64) -> f64 {
    let nf = n as f64;
    let gl = gamma * nf.ln();
    let s2 = sup * sup / (nf * nf);
    v_hat + (2.0 * gl * v_hat * s2).sqrt() + 3.0 * gl * s2
}

fn threshold_from_sup(v_tilde: f64, sup: f64, gamma: f64, n: u64) -> f64 {
    let nf = n as f64;
    let gl = gamma * nf.ln();
    (2.0 * gl * v_tilde).sqrt() + gl / (3.0 * nf) * sup
}

/// `Ṽ = V̂ + √(2γ ln n · V̂ ‖φ_λ‖²_∞ / n²) + 3γ ln n ‖φ_λ‖²_∞ / n²`.
pub fn adjusted_variance(
    v_hat: f64,
    lambda: LambdaIndex,
    gamma: f64,
    n: u64,
    basis: &WaveletBasis,
) -> f64 {
    inflate_variance(v_hat, basis.sup_norm(lambda), gamma, n)
}

/// `η = √(2γ Ṽ ln n) + γ ln n ‖φ_λ‖_∞ / (3n)`.
pub fn threshold(
    v_tilde: f64,
    lambda: LambdaIndex,
    gamma: f64,
    n: u64,
    basis: &WaveletBasis,
) -> f64 {
    threshold_from_sup(v_tilde, basis.sup_norm(lambda), gamma, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoefficientRecord {
    pub lambda: LambdaIndex,
    pub beta_hat: f64,
    pub v_hat: f64,
    pub v_tilde: f64,
    pub eta: f64,
    pub kept: bool,
}

impl CoefficientRecord {
    /// `β̃_λ`: the empirical coefficient if kept, else 0.
    pub fn thresholded(&self) -> f64 {
        if self.kept {
            self.beta_hat
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ThresholdedEstimate {
    records: Vec<CoefficientRecord>,
    config: EstimatorConfig,
    n: u64,
    j0: i32,
}

impl ThresholdedEstimate {
    /// All nonzero empirical coefficients in `Γ_n`, ordered by `(j, k)`.
    pub fn records(&self) -> &[CoefficientRecord] {
        &self.records
    }

    pub fn kept(&self) -> impl Iterator<Item = &CoefficientRecord> {
        self.records.iter().filter(|r| r.kept)
    }

    pub fn get(&self, lambda: LambdaIndex) -> Option<&CoefficientRecord> {
        self.records
            .binary_search_by(|r| r.lambda.cmp(&lambda))
            .ok()
            .map(|i| &self.records[i])
    }

    pub fn config(&self) -> &EstimatorConfig {
        &self.config
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    pub fn j0(&self) -> i32 {
        self.j0
    }
}

/// Threshold every nonzero empirical coefficient with `-1 <= j <= j₀`.
///
/// Each level is one pass over the events: every event contributes to the
/// few translates whose support holds it, hits are sorted by `(k, piece)`
/// and counted, so coefficients without events are never touched.
pub fn estimate(
    sample: &PointSample,
    cfg: &EstimatorConfig,
    basis: &WaveletBasis,
) -> Result<ThresholdedEstimate> {
    cfg.validate()?;
    let n = sample.n();
    let j0 = level_cutoff(n, cfg.c, cfg.c_prime)?;
    let nf = n as f64;
    let mut records = Vec::new();
    let mut hits: Vec<(i64, usize)> = Vec::new();
    for j in -1..=j0 {
        let values = basis.level_values(j);
        hits.clear();
        for &t in sample.times() {
            hits.extend(basis.hits(j, t));
        }
        hits.sort_unstable();
        let mut i = 0;
        while i < hits.len() {
            let k = hits[i].0;
            let (mut sum, mut sum_sq) = (0.0, 0.0);
            while i < hits.len() && hits[i].0 == k {
                let cell = hits[i].1;
                let mut count = 0usize;
                while i < hits.len() && hits[i] == (k, cell) {
                    count += 1;
                    i += 1;
                }
                let v = values[cell];
                sum += count as f64 * v;
                sum_sq += count as f64 * v * v;
            }
            let beta_hat = sum / nf;
            if beta_hat == 0.0 {
                continue;
            }
            let lambda = LambdaIndex::new(j, k);
            let sup = basis.sup_norm(lambda);
            let v_hat = sum_sq / (nf * nf);
            let v_tilde = inflate_variance(v_hat, sup, cfg.gamma, n);
            let eta = threshold_from_sup(v_tilde, sup, cfg.gamma, n);
            records.push(CoefficientRecord {
                lambda,
                beta_hat,
                v_hat,
                v_tilde,
                eta,
                kept: beta_hat.abs() >= eta,
            });
        }
    }
    Ok(ThresholdedEstimate {
        records,
        config: cfg.clone(),
        n,
        j0,
    })
}

/// Points `start + i·2^{-level}` for `i = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DyadicGrid {
    pub start: f64,
    pub level: u32,
    pub count: usize,
}

impl DyadicGrid {
    /// Grid covering `[a, b)` with `a` rounded down to the grid.
    pub fn covering(a: f64, b: f64, level: u32) -> Self {
        let scale = 2f64.powi(level as i32);
        let lo = (a * scale).floor();
        let hi = (b * scale).ceil();
        Self {
            start: lo / scale,
            level,
            count: (hi - lo).max(0.0) as usize,
        }
    }

    pub fn point(&self, i: usize) -> f64 {
        self.start + i as f64 * 2f64.powi(-(self.level as i32))
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.count).map(|i| self.point(i))
    }
}

/// `f̃(x) = Σ_{kept} β̂_λ φ̃_λ(x)` on the grid.
pub fn reconstruct(
    est: &ThresholdedEstimate,
    basis: &WaveletBasis,
    grid: &DyadicGrid,
) -> Result<Vec<(f64, f64)>> {
    if let Some(jg) = basis.j_grid() {
        if grid.level > jg {
            return Err(Error::GridResolution {
                x: grid.start,
                level: jg,
            });
        }
    }
    let mut out: Vec<(f64, f64)> = grid.points().map(|x| (x, 0.0)).collect();
    let h = 2f64.powi(-(grid.level as i32));
    for r in est.kept() {
        let (a, b) = basis.recon_support(r.lambda);
        let lo = ((a - grid.start) / h).floor().max(0.0) as usize;
        let hi = (((b - grid.start) / h).ceil().max(0.0) as usize).min(grid.count);
        for (x, y) in &mut out[lo.min(hi)..hi] {
            *y += r.beta_hat * basis.eval(r.lambda, *x, Side::Reconstruction)?;
        }
    }
    Ok(out)
}

/// `Crit(m) = Σ_{λ∈m} (η_λ² - β̂_λ²)`, summed in record order.
pub fn criterion(records: &[CoefficientRecord], mask: u32) -> f64 {
    records
        .iter()
        .enumerate()
        .filter(|(i, _)| mask >> i & 1 == 1)
        .map(|(_, r)| r.eta * r.eta - r.beta_hat * r.beta_hat)
        .sum()
}

/// Exhaustive minimizer of `Crit` over all subsets, ties going to the larger
/// subset. Returns the selected positions in increasing order.
pub fn bruteforce_select(records: &[CoefficientRecord]) -> Result<Vec<usize>> {
    if records.len() > MAX_BRUTEFORCE_RECORDS {
        return Err(Error::TooManyRecords {
            got: records.len(),
            max: MAX_BRUTEFORCE_RECORDS,
        });
    }
    let mut best = (0u32, 0.0f64);
    for mask in 1u32..(1u32 << records.len()) {
        let crit = criterion(records, mask);
        if crit < best.1 || (crit == best.1 && mask.count_ones() > best.0.count_ones()) {
            best = (mask, crit);
        }
    }
    Ok((0..records.len())
        .filter(|i| best.0 >> i & 1 == 1)
        .collect())
}

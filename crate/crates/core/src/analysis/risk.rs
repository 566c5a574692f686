//! Monte Carlo risk of the thresholded estimator and rate regressions.

use std::collections::HashMap;

use crate::basis::{LambdaIndex, WaveletBasis};
use crate::error::{Error, Result};
use crate::estimator::{estimate, level_cutoff, EstimatorConfig};
use crate::intensity::Intensity;
use crate::montecarlo::{map_replicates, mix_seed, tree_sum, Moments, Parallelism};
use crate::process::simulate;

use super::{coefficient_pair, indices_meeting, oracle_risk};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskSettings {
    pub replicates: usize,
    pub seed: u64,
    /// Truncation level of the true coefficients; `None` means `j₀ + 6`.
    pub tail_j: Option<i32>,
    pub parallelism: Parallelism,
    /// Highest level used when estimating frame constants.
    pub frame_level: u32,
}

impl Default for RiskSettings {
    fn default() -> Self {
        Self {
            replicates: 500,
            seed: 0,
            tail_j: None,
            parallelism: Parallelism::default(),
            frame_level: 8,
        }
    }
}

/// One line of the risk CSV.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskRow {
    pub n: u64,
    pub replicates: usize,
    pub mc_risk: f64,
    pub mc_se: f64,
    pub oracle_sum: f64,
    pub bound_main: f64,
    pub ratio: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiskReport {
    pub n: u64,
    pub replicates: usize,
    /// Mean of `‖β̃ - β‖²` in coefficient space.
    pub mc_risk: f64,
    pub mc_se: f64,
    pub oracle_sum: f64,
    pub bound_main: f64,
    pub ratio: f64,
    pub j0: i32,
    pub tail_j: i32,
    /// Frame constants `(c₁, c₂)`; the functional L2 risk lies in
    /// `[c₁ mc_risk, c₂ mc_risk]`.
    pub frame: (f64, f64),
}

impl RiskReport {
    pub fn row(&self) -> RiskRow {
        RiskRow {
            n: self.n,
            replicates: self.replicates,
            mc_risk: self.mc_risk,
            mc_se: self.mc_se,
            oracle_sum: self.oracle_sum,
            bound_main: self.bound_main,
            ratio: self.ratio,
        }
    }

    pub fn functional_risk_bracket(&self) -> (f64, f64) {
        (self.frame.0 * self.mc_risk, self.frame.1 * self.mc_risk)
    }
}

/// Replicate `i` at sample size `n` draws from `mix_seed(mix_seed(seed, n), i)`,
/// so risk and rate runs with the same seed agree at shared `n`.
pub fn mc_risk(
    f: &Intensity,
    n: u64,
    cfg: &EstimatorConfig,
    basis: &WaveletBasis,
    settings: &RiskSettings,
) -> Result<RiskReport> {
    let frame = basis.frame_constants(settings.frame_level);
    risk_with_frame(f, n, cfg, basis, settings, frame)
}

fn risk_with_frame(
    f: &Intensity,
    n: u64,
    cfg: &EstimatorConfig,
    basis: &WaveletBasis,
    settings: &RiskSettings,
    frame: (f64, f64),
) -> Result<RiskReport> {
    if settings.replicates < 2 {
        return Err(Error::InvalidArgument(
            "risk estimation needs at least 2 replicates".into(),
        ));
    }
    cfg.validate()?;
    let j0 = level_cutoff(n, cfg.c, cfg.c_prime)?;
    let tail_j = settings.tail_j.unwrap_or(j0 + 6);
    let terms = oracle_risk(f, n, j0, basis, tail_j)?;
    let truth: HashMap<LambdaIndex, f64> = indices_meeting(f, basis, -1, j0)
        .map(|l| (l, coefficient_pair(f, l, basis).0))
        .collect();
    let energy = terms.total_energy();
    let base = mix_seed(settings.seed, n);

    let losses: Vec<Result<f64>> = map_replicates(settings.replicates, settings.parallelism, |i| {
        let sample = simulate(f, n, mix_seed(base, i))?;
        let est = estimate(&sample, cfg, basis)?;
        // ‖β̃ - β‖² = Σβ² + Σ_kept [(β̂ - β)² - β²]
        let mut acc = energy;
        for r in est.kept() {
            let b = truth
                .get(&r.lambda)
                .copied()
                .unwrap_or_else(|| coefficient_pair(f, r.lambda, basis).0);
            acc += (r.beta_hat - b).powi(2) - b * b;
        }
        Ok(acc.max(0.0))
    });
    let losses: Vec<f64> = losses.into_iter().collect::<Result<_>>()?;
    let m = Moments::of(&losses);
    let bound_main = terms.bound_main();
    Ok(RiskReport {
        n,
        replicates: settings.replicates,
        mc_risk: m.mean,
        mc_se: m.se_mean,
        oracle_sum: terms.oracle_sum,
        bound_main,
        ratio: m.mean / bound_main,
        j0,
        tail_j,
        frame,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatePoint {
    pub n: u64,
    pub mc_risk: f64,
    pub mc_se: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateStudy {
    pub points: Vec<RatePoint>,
    /// Least-squares slope of `ln mc_risk` against `ln(n / ln n)`.
    pub slope: f64,
    pub stderr: f64,
}

pub fn rate_study(
    f: &Intensity,
    n_list: &[u64],
    cfg: &EstimatorConfig,
    basis: &WaveletBasis,
    settings: &RiskSettings,
) -> Result<RateStudy> {
    if n_list.len() < 4 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "rate study needs at least 4 strictly increasing sample sizes".into(),
        ));
    }
    let frame = basis.frame_constants(settings.frame_level);
    let points = n_list
        .iter()
        .map(|&n| {
            risk_with_frame(f, n, cfg, basis, settings, frame).map(|r| RatePoint {
                n,
                mc_risk: r.mc_risk,
                mc_se: r.mc_se,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let (slope, stderr) = fit_slope(&points);
    Ok(RateStudy {
        points,
        slope,
        stderr,
    })
}

/// Ordinary least squares of `ln mc_risk` on `ln(n / ln n)`, with the
/// residual-based standard error of the slope.
pub fn fit_slope(points: &[RatePoint]) -> (f64, f64) {
    let xs: Vec<f64> = points
        .iter()
        .map(|p| {
            let n = p.n as f64;
            (n / n.ln()).ln()
        })
        .collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mc_risk.ln()).collect();
    let m = xs.len() as f64;
    let mx = tree_sum(&xs) / m;
    let my = tree_sum(&ys) / m;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let ssr: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let stderr = if xs.len() > 2 {
        (ssr / (m - 2.0) / sxx).sqrt()
    } else {
        f64::NAN
    };
    (slope, stderr)
}

//! Exact quantities for known intensities and the Monte Carlo studies that
//! compare the estimator against them.

mod besov;
mod kl;
mod risk;
mod spike;

use std::collections::BTreeMap;

use crate::basis::{LambdaIndex, WaveletBasis};
use crate::error::{Error, Result};
use crate::estimator::{level_cutoff, EstimatorConfig};
use crate::intensity::Intensity;

pub use besov::{
    besov_norm, log_grid, spike_weak_besov_radius, weak_besov_radius, WeakBesovRadius,
};
pub use kl::kl_divergence;
pub use risk::{
    fit_slope, mc_risk, rate_study, RatePoint, RateStudy, RiskReport, RiskRow, RiskSettings,
};
pub use spike::{spike_coefficient, spike_sigma_sq, spike_tail_bound};

/// Sparse map `λ → value`, iterated in `(j, k)` order.
pub type CoefficientMap = BTreeMap<LambdaIndex, f64>;

/// `β_λ = ∫ φ_λ f`, by exact piecewise integration.
pub fn true_coefficient(f: &Intensity, lambda: LambdaIndex, basis: &WaveletBasis) -> f64 {
    f.integrate(f64::NEG_INFINITY, f64::INFINITY, &basis.analysis_fn(lambda))
}

/// `σ_λ² = ∫ φ_λ² f`.
pub fn sigma_sq(f: &Intensity, lambda: LambdaIndex, basis: &WaveletBasis) -> f64 {
    f.integrate(
        f64::NEG_INFINITY,
        f64::INFINITY,
        &basis.analysis_fn(lambda).squared(),
    )
}

/// `(β_λ, σ_λ²)`, through the closed forms when `f` is a power spike and the
/// basis is Haar.
pub(crate) fn coefficient_pair(
    f: &Intensity,
    lambda: LambdaIndex,
    basis: &WaveletBasis,
) -> (f64, f64) {
    match f.spike_beta() {
        Some(b) if basis.is_haar() => (spike_coefficient(b, lambda), spike_sigma_sq(b, lambda)),
        _ => (
            true_coefficient(f, lambda, basis),
            sigma_sq(f, lambda, basis),
        ),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalysisRecord {
    pub lambda: LambdaIndex,
    pub beta: f64,
    pub sigma_sq: f64,
    /// `V_{λ,n} = σ_λ² / n`.
    pub v_n: f64,
    /// `F_λ = ∫_{supp φ_λ} f`.
    pub f_mass: f64,
}

pub fn analysis_record(
    f: &Intensity,
    lambda: LambdaIndex,
    basis: &WaveletBasis,
    n: u64,
) -> AnalysisRecord {
    let (beta, sigma_sq) = coefficient_pair(f, lambda, basis);
    let (a, b) = basis.support(lambda);
    AnalysisRecord {
        lambda,
        beta,
        sigma_sq,
        v_n: sigma_sq / n as f64,
        f_mass: f.integrate_interval(a, b),
    }
}

/// Indices at levels `first..=last` whose analysis support meets `supp f`.
pub fn indices_meeting<'a>(
    f: &Intensity,
    basis: &'a WaveletBasis,
    first: i32,
    last: i32,
) -> impl Iterator<Item = LambdaIndex> + 'a {
    let (a, b) = f.support();
    (first..=last).flat_map(move |j| {
        basis
            .translates_meeting(j, a, b)
            .map(move |k| LambdaIndex::new(j, k))
    })
}

/// Oracle and truncation terms of the risk bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleTerms {
    pub j0: i32,
    pub tail_j: i32,
    /// `Σ_{Γ_n} min(β², V_{λ,n})`.
    pub oracle_sum: f64,
    /// `Σ_{Γ_n} min(β², V_{λ,n} ln n)`.
    pub log_oracle_sum: f64,
    /// `Σ_{Γ_n} β²`.
    pub gamma_energy: f64,
    /// `Σ_{j₀ < j <= tail_J} Σ_k β²`, summed explicitly.
    pub tail_sum: f64,
    /// Energy beyond `tail_J`: exact via Parseval for Haar, otherwise 0.
    pub beyond: f64,
    /// Analytic upper bound on the energy beyond `tail_J` for a power spike
    /// on the Haar basis.
    pub beyond_bound: Option<f64>,
}

impl OracleTerms {
    /// `Σ_{Γ_n} min(β², V ln n) + Σ_{λ ∉ Γ_n} β²`.
    pub fn bound_main(&self) -> f64 {
        self.log_oracle_sum + self.tail_sum + self.beyond
    }

    /// `Σ_λ β²` as seen by the truncation.
    pub fn total_energy(&self) -> f64 {
        self.gamma_energy + self.tail_sum + self.beyond
    }
}

pub fn oracle_risk(
    f: &Intensity,
    n: u64,
    j0: i32,
    basis: &WaveletBasis,
    tail_j: i32,
) -> Result<OracleTerms> {
    if tail_j <= j0 {
        return Err(Error::InvalidArgument(format!(
            "tail level {tail_j} must exceed the cutoff {j0}"
        )));
    }
    let nf = n as f64;
    let log_n = nf.ln();
    let (mut oracle_sum, mut log_oracle_sum, mut gamma_energy) = (0.0, 0.0, 0.0);
    for l in indices_meeting(f, basis, -1, j0) {
        let (b, s2) = coefficient_pair(f, l, basis);
        let b2 = b * b;
        let v = s2 / nf;
        oracle_sum += b2.min(v);
        log_oracle_sum += b2.min(v * log_n);
        gamma_energy += b2;
    }
    let tail_sum: f64 = indices_meeting(f, basis, j0 + 1, tail_j)
        .map(|l| coefficient_pair(f, l, basis).0.powi(2))
        .sum();
    let beyond = if basis.is_haar() {
        (f.l2_norm_sq() - gamma_energy - tail_sum).max(0.0)
    } else {
        0.0
    };
    let beyond_bound = match f.spike_beta() {
        Some(b) if basis.is_haar() => Some(spike_tail_bound(b, tail_j)),
        _ => None,
    };
    Ok(OracleTerms {
        j0,
        tail_j,
        oracle_sum,
        log_oracle_sum,
        gamma_energy,
        tail_sum,
        beyond,
        beyond_bound,
    })
}

/// The bracketed right-hand side of the oracle inequality, without constants.
pub fn oracle_bound(
    f: &Intensity,
    n: u64,
    cfg: &EstimatorConfig,
    basis: &WaveletBasis,
    tail_j: i32,
) -> Result<f64> {
    let j0 = level_cutoff(n, cfg.c, cfg.c_prime)?;
    Ok(oracle_risk(f, n, j0, basis, tail_j)?.bound_main())
}

#[derive(Debug, Clone, PartialEq)]
pub struct MassDichotomyReport {
    pub checked: usize,
    /// Indices with `F_λ <= Θ ln n / n`.
    pub low_mass: usize,
    pub violations: Vec<LambdaIndex>,
}

/// For `F_λ <= Θ ln n/n`: `β² <= Θ² σ² ln n/n`; otherwise
/// `‖φ_λ‖_∞ ln n/n <= σ √(ln n/n)`. Checked over `Γ_n` restricted to indices
/// meeting `supp f`.
pub fn mass_dichotomy_check(
    f: &Intensity,
    n: u64,
    j0: i32,
    basis: &WaveletBasis,
) -> MassDichotomyReport {
    let nf = n as f64;
    let ln_n = nf.ln();
    let theta = basis.theta();
    let cut = theta * ln_n / nf;
    let mut report = MassDichotomyReport {
        checked: 0,
        low_mass: 0,
        violations: Vec::new(),
    };
    for l in indices_meeting(f, basis, -1, j0) {
        let r = analysis_record(f, l, basis, n);
        report.checked += 1;
        let ok = if r.f_mass <= cut {
            report.low_mass += 1;
            r.beta * r.beta <= theta * theta * r.sigma_sq * ln_n / nf
        } else {
            basis.sup_norm(l) * ln_n / nf <= r.sigma_sq.sqrt() * (ln_n / nf).sqrt()
        };
        if !ok {
            report.violations.push(l);
        }
    }
    report
}

/// `β_λ` for every index in `levels` meeting `supp f`.
pub fn true_coefficients(
    f: &Intensity,
    basis: &WaveletBasis,
    first: i32,
    last: i32,
) -> CoefficientMap {
    indices_meeting(f, basis, first, last)
        .map(|l| (l, coefficient_pair(f, l, basis).0))
        .filter(|(_, b)| *b != 0.0)
        .collect()
}

/// `(β_λ, σ_λ)` pairs for the weak-Besov functional.
pub fn coefficient_sigma_pairs(f: &Intensity, basis: &WaveletBasis, last: i32) -> Vec<(f64, f64)> {
    indices_meeting(f, basis, -1, last)
        .map(|l| {
            let (b, s2) = coefficient_pair(f, l, basis);
            (b, s2.sqrt())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn indicator_coefficients() {
        let f = Intensity::indicator(0.0, 1.0).unwrap();
        let h = WaveletBasis::haar();
        for j in 0..6 {
            for k in -2..(1 << j) + 2 {
                assert_eq!(true_coefficient(&f, LambdaIndex::new(j, k), &h), 0.0);
            }
        }
        assert_eq!(sigma_sq(&f, LambdaIndex::new(0, 0), &h), 1.0);
        assert_eq!(sigma_sq(&f, LambdaIndex::new(0, 3), &h), 0.0);
    }

    #[test]
    fn spike_coefficients_by_integration() {
        let f = Intensity::power_spike(0.25).unwrap();
        let h = WaveletBasis::haar();
        let b = true_coefficient(&f, LambdaIndex::new(0, 0), &h);
        assert!((b - 0.252_276_153_337).abs() < 1e-11);
        let b = true_coefficient(&f, LambdaIndex::scaling(0), &h);
        assert!((b - 4.0 / 3.0).abs() < 1e-14);
        let s = sigma_sq(&f, LambdaIndex::new(0, 0), &h);
        assert!((s - 4.0 / 3.0).abs() < 1e-14);
    }

    #[test]
    fn oracle_for_indicator() {
        let f = Intensity::indicator(0.0, 1.0).unwrap();
        let h = WaveletBasis::haar();
        let t = oracle_risk(&f, 100, 4, &h, 10).unwrap();
        assert!((t.oracle_sum - 0.01).abs() < 1e-15);
        assert_eq!(t.tail_sum, 0.0);
        assert!((t.bound_main() - 0.01 * 100f64.ln()).abs() < 1e-15);
        assert!((t.bound_main() - 0.046_051_701_86).abs() < 1e-10);
        assert!(oracle_risk(&f, 100, 4, &h, 4).is_err());
    }

    #[test]
    fn tail_refinement_is_consistent() {
        let f = Intensity::power_spike(0.25).unwrap();
        let h = WaveletBasis::haar();
        let j0 = level_cutoff(1 << 10, 1.0, -1.0).unwrap();
        let a = oracle_risk(&f, 1 << 10, j0, &h, 16).unwrap();
        let b = oracle_risk(&f, 1 << 10, j0, &h, 20).unwrap();
        assert_eq!(a.oracle_sum, b.oracle_sum);
        assert!((a.bound_main() - b.bound_main()).abs() < 1e-8);
        assert!(b.tail_sum - a.tail_sum <= a.beyond_bound.unwrap());
        assert!(a.oracle_sum <= a.bound_main());
    }

    #[test]
    fn mass_dichotomy_on_indicator() {
        let f = Intensity::indicator(0.0, 1.0).unwrap();
        let h = WaveletBasis::haar();
        let r = mass_dichotomy_check(&f, 256, 5, &h);
        assert!(r.violations.is_empty());
        assert!(r.checked > 0);
    }
}

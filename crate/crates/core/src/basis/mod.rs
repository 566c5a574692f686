//! Wavelet bases with a piecewise-constant analysis side.
//!
//! Indices follow `λ = (j, k)` with `j = -1` standing for the scaling row
//! `φ_k = φ(· - k)`, and `ψ_{j,k} = 2^{j/2} ψ(2^j · - k)` for `j >= 0`. The
//! analysis scaling function is always the box `1_{[0,1)}`.
//!
//! Two families are provided. Haar is orthonormal, so reconstruction uses the
//! analysis functions themselves. The filter family pairs a piecewise-constant
//! analysis wavelet with reconstruction functions generated from finite
//! two-scale filters and tabulated by the cascade algorithm on a dyadic grid.

mod filter;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::process::PointSample;
use crate::step::StepFunction;

pub use filter::FilterSpec;
use filter::Reconstruction;

/// Default resolution exponent of the reconstruction grid.
pub const DEFAULT_J_GRID: u32 = 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LambdaIndex {
    pub j: i32,
    pub k: i64,
}

impl LambdaIndex {
    pub const fn new(j: i32, k: i64) -> Self {
        Self { j, k }
    }

    pub const fn scaling(k: i64) -> Self {
        Self { j: -1, k }
    }

    pub fn is_scaling(&self) -> bool {
        self.j < 0
    }
}

impl fmt::Display for LambdaIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({},{})", self.j, self.k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Analysis,
    Reconstruction,
}

/// Basis selector as it appears in configs and on the command line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum BasisSpec {
    #[default]
    Haar,
    /// Box analysis scaling with the 3-vanishing-moment dual (r = 2).
    Cdf13,
    /// Box analysis scaling with the 5-vanishing-moment dual (r = 4).
    Cdf15,
    Filter(FilterSpec),
}

impl std::str::FromStr for BasisSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(BasisSpec::Haar),
            "cdf13" => Ok(BasisSpec::Cdf13),
            "cdf15" => Ok(BasisSpec::Cdf15),
            other => Err(Error::InvalidBasis(format!(
                "unknown basis '{other}' (expected haar, cdf13 or cdf15)"
            ))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct WaveletBasis {
    name: String,
    phi: StepFunction,
    psi: StepFunction,
    recon: Option<Reconstruction>,
    r: u32,
}

impl WaveletBasis {
    pub fn haar() -> Self {
        Self {
            name: "haar".into(),
            phi: box_fn(),
            psi: StepFunction::new(vec![0.0, 0.5, 1.0], vec![1.0, -1.0]).unwrap(),
            recon: None,
            r: 0,
        }
    }

    pub fn from_spec(spec: &BasisSpec, j_grid: u32) -> Result<Self> {
        match spec {
            BasisSpec::Haar => Ok(Self::haar()),
            BasisSpec::Cdf13 => Self::from_filter(&FilterSpec::cdf13(), j_grid),
            BasisSpec::Cdf15 => Self::from_filter(&FilterSpec::cdf15(), j_grid),
            BasisSpec::Filter(f) => Self::from_filter(f, j_grid),
        }
    }

    pub fn from_filter(spec: &FilterSpec, j_grid: u32) -> Result<Self> {
        let psi = spec.analysis_wavelet()?;
        if psi.moment(0).abs() > 1e-10 {
            return Err(Error::InvalidBasis(format!(
                "analysis wavelet must integrate to 0, got {}",
                psi.moment(0)
            )));
        }
        let recon = Reconstruction::build(spec, j_grid)?;
        let r = vanishing_moments_of(&psi);
        if let Some(declared) = spec.declared_r {
            if declared > r {
                return Err(Error::InvalidBasis(format!(
                    "declared r = {declared} but only moments up to degree {r} vanish"
                )));
            }
        }
        let basis = Self {
            name: spec.name.clone().unwrap_or_else(|| "filter".into()),
            phi: box_fn(),
            psi,
            recon: Some(recon),
            r,
        };
        let defect = basis.biorthogonality_defect(2)?;
        if defect > 1e-8 {
            return Err(Error::InvalidBasis(format!(
                "analysis and reconstruction functions are not biorthogonal (defect {defect:.3e})"
            )));
        }
        Ok(basis)
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_haar(&self) -> bool {
        self.recon.is_none()
    }

    /// Mother analysis wavelet on unit scale.
    pub fn psi(&self) -> &StepFunction {
        &self.psi
    }

    pub fn phi(&self) -> &StepFunction {
        &self.phi
    }

    /// Reconstruction grid exponent (`None` for Haar, which is exact everywhere).
    pub fn j_grid(&self) -> Option<u32> {
        self.recon.as_ref().map(|r| r.j_grid())
    }

    fn table(&self, j: i32) -> &StepFunction {
        if j < 0 {
            &self.phi
        } else {
            &self.psi
        }
    }

    fn scale(j: i32) -> f64 {
        if j < 0 {
            1.0
        } else {
            2f64.powf(0.5 * j as f64)
        }
    }

    fn dilation(j: i32) -> f64 {
        if j < 0 {
            1.0
        } else {
            2f64.powi(j)
        }
    }

    /// `φ_λ` as a step function.
    pub fn analysis_fn(&self, lambda: LambdaIndex) -> StepFunction {
        let t = self.table(lambda.j);
        let (d, s) = (Self::dilation(lambda.j), Self::scale(lambda.j));
        let breaks = t
            .breaks()
            .iter()
            .map(|b| (b + lambda.k as f64) / d)
            .collect();
        let values = t.values().iter().map(|v| v * s).collect();
        StepFunction::new(breaks, values).expect("dilated table stays valid")
    }

    pub fn analysis_value(&self, lambda: LambdaIndex, x: f64) -> f64 {
        let z = x * Self::dilation(lambda.j) - lambda.k as f64;
        Self::scale(lambda.j) * self.table(lambda.j).eval(z)
    }

    pub fn eval(&self, lambda: LambdaIndex, x: f64, side: Side) -> Result<f64> {
        match (side, &self.recon) {
            (Side::Analysis, _) | (Side::Reconstruction, None) => {
                Ok(self.analysis_value(lambda, x))
            }
            (Side::Reconstruction, Some(r)) => r.eval(lambda, x),
        }
    }

    /// Support of `φ_λ`.
    pub fn support(&self, lambda: LambdaIndex) -> (f64, f64) {
        let (a, b) = self.table(lambda.j).support().expect("nonzero table");
        let d = Self::dilation(lambda.j);
        ((a + lambda.k as f64) / d, (b + lambda.k as f64) / d)
    }

    /// Support of the reconstruction function `φ̃_λ`.
    pub fn recon_support(&self, lambda: LambdaIndex) -> (f64, f64) {
        match &self.recon {
            None => self.support(lambda),
            Some(r) => r.support(lambda),
        }
    }

    /// `‖φ_λ‖_∞`.
    pub fn sup_norm(&self, lambda: LambdaIndex) -> f64 {
        Self::scale(lambda.j) * self.table(lambda.j).sup_abs()
    }

    /// Translates `k` at level `j` with `φ_{j,k}(t) != 0`, paired with the
    /// index of the table piece that `t` falls into.
    pub fn hits(&self, j: i32, t: f64) -> impl Iterator<Item = (i64, usize)> + '_ {
        let table = self.table(j);
        let y = t * Self::dilation(j);
        let b = table.breaks();
        let lo = (y - b[b.len() - 1]).floor() as i64;
        let hi = (y - b[0]).floor() as i64 + 1;
        (lo..=hi).filter_map(move |k| {
            let cell = table.piece_index(y - k as f64)?;
            (table.values()[cell] != 0.0).then_some((k, cell))
        })
    }

    /// Values of the table pieces at level `j`, scaled by `2^{j/2}`.
    pub fn level_values(&self, j: i32) -> Vec<f64> {
        let s = Self::scale(j);
        self.table(j).values().iter().map(|v| v * s).collect()
    }

    /// Sorted translates whose analysis support holds at least one event.
    pub fn active_indices(&self, sample: &PointSample, j: i32) -> Vec<i64> {
        let mut ks: Vec<i64> = sample
            .times()
            .iter()
            .flat_map(|&t| self.hits(j, t).map(|(k, _)| k))
            .collect();
        ks.sort_unstable();
        ks.dedup();
        ks
    }

    /// Translates at level `j` whose support meets `[a, b]`.
    pub fn translates_meeting(&self, j: i32, a: f64, b: f64) -> std::ops::RangeInclusive<i64> {
        let (sa, sb) = self.table(j).support().expect("nonzero table");
        let d = Self::dilation(j);
        let lo = (a * d - sb).floor() as i64;
        let hi = (b * d - sa).ceil() as i64;
        lo..=hi
    }

    /// Vanishing-moment degree `r` of the analysis wavelet.
    pub fn vanishing_moments(&self) -> u32 {
        self.r
    }

    /// `S_φ = max(sup|φ|, sup|ψ|)`.
    pub fn s_phi(&self) -> f64 {
        self.phi.sup_abs().max(self.psi.sup_abs())
    }

    /// `I_φ = min(inf_{supp φ}|φ|, inf_{supp ψ}|ψ|)`.
    pub fn i_phi(&self) -> f64 {
        let p = self.phi.inf_abs_on_support().unwrap();
        let q = self.psi.inf_abs_on_support().unwrap();
        p.min(q)
    }

    /// `μ_ψ = inf_{supp ψ} |ψ|`.
    pub fn mu_psi(&self) -> f64 {
        self.psi.inf_abs_on_support().unwrap()
    }

    /// `Θ_φ = S_φ² / I_φ²`.
    pub fn theta(&self) -> f64 {
        let r = self.s_phi() / self.i_phi();
        r * r
    }

    /// Frame constants `(c₁, c₂)`. Exact for Haar; for the filter family they
    /// are the extreme Gram eigenvalues of the reconstruction functions over
    /// levels `<= max_level` with translates covering `[-2, 3]` (numerical
    /// estimates, not certified bounds).
    pub fn frame_constants(&self, max_level: u32) -> (f64, f64) {
        match &self.recon {
            None => (1.0, 1.0),
            Some(r) => r.frame_constants(max_level, -2.0, 3.0),
        }
    }

    /// `∫_u^v φ̃_λ`.
    pub fn recon_integral(&self, lambda: LambdaIndex, u: f64, v: f64) -> Result<f64> {
        match &self.recon {
            None => {
                let f = self.analysis_fn(lambda);
                Ok(f.pieces()
                    .map(|(a, b, val)| val * (b.min(v) - a.max(u)).max(0.0))
                    .sum())
            }
            Some(r) => r.integral(lambda, u, v),
        }
    }

    /// `∫ φ_λ φ̃_μ`, exact for the tabulated reconstruction functions.
    pub fn cross_inner(&self, analysis: LambdaIndex, recon: LambdaIndex) -> Result<f64> {
        let f = self.analysis_fn(analysis);
        let mut acc = 0.0;
        for (u, v, val) in f.pieces() {
            if val != 0.0 {
                acc += val * self.recon_integral(recon, u, v)?;
            }
        }
        Ok(acc)
    }

    /// Largest `|∫ φ_λ φ̃_μ - 1_{λ=μ}|` over levels `-1..=max_level` and
    /// translates covering `[-2, 3]`.
    pub fn biorthogonality_defect(&self, max_level: i32) -> Result<f64> {
        let mut idx = Vec::new();
        for j in -1..=max_level {
            let d = Self::dilation(j);
            let lo = (-2.0 * d).floor() as i64;
            let hi = (3.0 * d).ceil() as i64;
            idx.extend((lo..hi).map(|k| LambdaIndex::new(j, k)));
        }
        let mut worst: f64 = 0.0;
        for &a in &idx {
            let (sa, sb) = self.support(a);
            for &b in &idx {
                let (ra, rb) = self.recon_support(b);
                if rb <= sa || ra >= sb {
                    if a == b {
                        worst = worst.max(1.0);
                    }
                    continue;
                }
                let target = if a == b { 1.0 } else { 0.0 };
                worst = worst.max((self.cross_inner(a, b)? - target).abs());
            }
        }
        Ok(worst)
    }
}

fn box_fn() -> StepFunction {
    StepFunction::new(vec![0.0, 1.0], vec![1.0]).unwrap()
}

/// Largest `m` with `∫ψ x^i = 0` (to 1e-10) for every `i <= m`.
fn vanishing_moments_of(psi: &StepFunction) -> u32 {
    let mut r = 0;
    for i in 1..=16 {
        if psi.moment(i).abs() > 1e-10 {
            break;
        }
        r = i;
    }
    r
}

//! Filter-defined reconstruction functions.
//!
//! The reconstruction scaling function solves `φ̃(x) = Σ_n c_n φ̃(2x - n)` and
//! is tabulated on the grid `2^{-J} Z` by running the cascade from the box
//! `1_{[0,1)}` for `J` rounds. Each round keeps the table piecewise constant
//! on its own grid, so biorthogonality against the box and the analysis
//! wavelet holds exactly at every round. The reconstruction wavelet is
//! `ψ̃(x) = φ̃(2x) - φ̃(2x - 1)`.

use serde::{Deserialize, Serialize};

use super::LambdaIndex;
use crate::error::{Error, Result};
use crate::step::StepFunction;

const FRAC_1_SQRT_2: f64 = std::f64::consts::FRAC_1_SQRT_2;

/// A filter tap, either a number or a rational string such as `"-3/256"`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Tap {
    Number(f64),
    Text(String),
}

impl Tap {
    fn value(&self) -> Result<f64> {
        match self {
            Tap::Number(x) => Ok(*x),
            Tap::Text(s) => parse_rational(s),
        }
    }
}

fn parse_rational(s: &str) -> Result<f64> {
    let bad = || Error::InvalidBasis(format!("cannot parse filter tap '{s}'"));
    let (num, den) = match s.split_once('/') {
        Some((p, q)) => (p.trim(), q.trim()),
        None => (s.trim(), "1"),
    };
    let p: f64 = num.parse().map_err(|_| bad())?;
    let q: f64 = den.parse().map_err(|_| bad())?;
    if q == 0.0 || !p.is_finite() || !q.is_finite() {
        return Err(bad());
    }
    Ok(p / q)
}

/// Two-scale filter of the reconstruction scaling function, normalised so
/// the taps sum to 2. `lowpass[i]` is `c_{offset + i}`. When no analysis
/// wavelet is given it is derived from the filter as
/// `ψ = Σ_n (-1)^n c_{1-n} 1_{[n/2, (n+1)/2)}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FilterSpec {
    #[serde(default)]
    pub name: Option<String>,
    pub lowpass: Vec<Tap>,
    pub offset: i64,
    #[serde(default)]
    pub psi_breaks: Option<Vec<f64>>,
    #[serde(default)]
    pub psi_values: Option<Vec<f64>>,
    #[serde(default)]
    pub declared_r: Option<u32>,
}

impl FilterSpec {
    fn builtin(name: &str, taps: &[&str], offset: i64, r: u32) -> Self {
        Self {
            name: Some(name.into()),
            lowpass: taps.iter().map(|t| Tap::Text((*t).into())).collect(),
            offset,
            psi_breaks: None,
            psi_values: None,
            declared_r: Some(r),
        }
    }

    pub fn cdf13() -> Self {
        Self::builtin("cdf13", &["-1/8", "1/8", "1", "1", "1/8", "-1/8"], -2, 2)
    }

    pub fn cdf15() -> Self {
        Self::builtin(
            "cdf15",
            &[
                "3/128", "-3/128", "-11/64", "11/64", "1", "1", "11/64", "-11/64", "-3/128",
                "3/128",
            ],
            -4,
            4,
        )
    }

    pub fn taps(&self) -> Result<Vec<f64>> {
        if self.lowpass.is_empty() {
            return Err(Error::InvalidBasis("empty low-pass filter".into()));
        }
        self.lowpass.iter().map(Tap::value).collect()
    }

    pub fn analysis_wavelet(&self) -> Result<StepFunction> {
        match (&self.psi_breaks, &self.psi_values) {
            (Some(b), Some(v)) => StepFunction::new(b.clone(), v.clone())
                .map_err(|e| Error::InvalidBasis(format!("analysis wavelet table: {e}"))),
            (None, None) => {
                let c = self.taps()?;
                let len = c.len() as i64;
                let n_lo = 1 - (self.offset + len - 1);
                let n_hi = 1 - self.offset;
                let breaks = (n_lo..=n_hi + 1).map(|n| n as f64 / 2.0).collect();
                let values = (n_lo..=n_hi)
                    .map(|n| {
                        let sign = if n.rem_euclid(2) == 0 { 1.0 } else { -1.0 };
                        sign * c[(1 - n - self.offset) as usize]
                    })
                    .collect();
                StepFunction::new(breaks, values).map_err(|e| Error::InvalidBasis(e.to_string()))
            }
            _ => Err(Error::InvalidBasis(
                "psi_breaks and psi_values must be given together".into(),
            )),
        }
    }
}

#[derive(Debug, Clone)]
pub(super) struct Reconstruction {
    taps: Vec<f64>,
    offset: i64,
    j_grid: u32,
    /// Grid index of `table[0]`.
    start: i64,
    table: Vec<f64>,
    /// `prefix[i] = ∫_{-∞}^{(start + i) 2^{-J}} φ̃`.
    prefix: Vec<f64>,
}

impl Reconstruction {
    pub(super) fn build(spec: &FilterSpec, j_grid: u32) -> Result<Self> {
        if !(1..=20).contains(&j_grid) {
            return Err(Error::InvalidBasis(format!(
                "grid exponent must lie in 1..=20, got {j_grid}"
            )));
        }
        let taps = spec.taps()?;
        let sum: f64 = taps.iter().sum();
        if (sum - 2.0).abs() > 1e-12 {
            return Err(Error::InvalidBasis(format!(
                "low-pass taps must sum to 2, got {sum}"
            )));
        }
        let offset = spec.offset;
        let n_min = offset;
        let n_max = offset + taps.len() as i64 - 1;

        let mut table = vec![1.0];
        let mut start: i64 = 0;
        for i in 0..j_grid {
            let step = 1i64 << i;
            let new_start = start + n_min * step;
            let new_len = table.len() as i64 + (n_max - n_min) * step;
            let mut next = vec![0.0; new_len as usize];
            for (t, &c) in taps.iter().enumerate() {
                if c == 0.0 {
                    continue;
                }
                let shift = (start + (n_min + t as i64) * step - new_start) as usize;
                for (m, &a) in table.iter().enumerate() {
                    next[m + shift] += c * a;
                }
            }
            table = next;
            start = new_start;
        }
        if table.iter().any(|v| !v.is_finite() || v.abs() > 1e8) {
            return Err(Error::InvalidBasis("cascade iteration diverged".into()));
        }
        let h = 2f64.powi(-(j_grid as i32));
        let mut prefix = Vec::with_capacity(table.len() + 1);
        let mut acc = 0.0;
        prefix.push(0.0);
        for &a in &table {
            acc += a * h;
            prefix.push(acc);
        }
        Ok(Self {
            taps,
            offset,
            j_grid,
            start,
            table,
            prefix,
        })
    }

    pub(super) fn j_grid(&self) -> u32 {
        self.j_grid
    }

    fn grid_index(&self, y: f64, x: f64, level: u32) -> Result<i64> {
        let m = y * 2f64.powi(self.j_grid as i32);
        if !m.is_finite() || m.fract() != 0.0 || m.abs() > 2f64.powi(62) {
            return Err(Error::GridResolution { x, level });
        }
        Ok(m as i64)
    }

    fn phi_at(&self, m: i64) -> f64 {
        let i = m - self.start;
        if i < 0 || i >= self.table.len() as i64 {
            0.0
        } else {
            self.table[i as usize]
        }
    }

    fn antiderivative_at(&self, m: i64) -> f64 {
        let i = (m - self.start).clamp(0, self.table.len() as i64);
        self.prefix[i as usize]
    }

    pub(super) fn eval(&self, lambda: LambdaIndex, x: f64) -> Result<f64> {
        let m = self.grid_index(x, x, self.j_grid)?;
        let one = 1i64 << self.j_grid;
        if lambda.j < 0 {
            return Ok(self.phi_at(m - lambda.k * one));
        }
        let j = lambda.j as u32;
        // 2^{j+1} x - 2k - n on the grid
        let y = m
            .checked_mul(1i64 << (j + 1))
            .ok_or(Error::GridResolution {
                x,
                level: self.j_grid,
            })?
            - 2 * lambda.k * one;
        let scale = 2f64.powf(0.5 * lambda.j as f64);
        Ok(scale * (self.phi_at(y) - self.phi_at(y - one)))
    }

    pub(super) fn support(&self, lambda: LambdaIndex) -> (f64, f64) {
        let h = 2f64.powi(-(self.j_grid as i32));
        let (a, b) = (
            self.start as f64 * h,
            (self.start + self.table.len() as i64) as f64 * h,
        );
        if lambda.j < 0 {
            return (a + lambda.k as f64, b + lambda.k as f64);
        }
        let d = 2f64.powi(lambda.j);
        (
            (a / 2.0 + lambda.k as f64) / d,
            ((b + 1.0) / 2.0 + lambda.k as f64) / d,
        )
    }

    /// `∫_u^v φ̃_λ`. Both endpoints, after dilation, must fall on the grid.
    pub(super) fn integral(&self, lambda: LambdaIndex, u: f64, v: f64) -> Result<f64> {
        let one = 1i64 << self.j_grid;
        if lambda.j < 0 {
            let mu = self.grid_index(u - lambda.k as f64, u, self.j_grid)?;
            let mv = self.grid_index(v - lambda.k as f64, v, self.j_grid)?;
            return Ok(self.antiderivative_at(mv) - self.antiderivative_at(mu));
        }
        let d = 2f64.powi(lambda.j + 1);
        let level = self.j_grid + lambda.j as u32 + 1;
        let mu = self.grid_index(d * u, u, level)? - 2 * lambda.k * one;
        let mv = self.grid_index(d * v, v, level)? - 2 * lambda.k * one;
        let prim = |m: i64| self.antiderivative_at(m) - self.antiderivative_at(m - one);
        Ok(2f64.powf(0.5 * lambda.j as f64) / d * (prim(mv) - prim(mu)))
    }

    /// `∫ φ̃(x) φ̃(x - d) dx` for `d = 0..=width`.
    fn autocorrelation(&self) -> Vec<f64> {
        let width = self.taps.len() - 1;
        let h = 2f64.powi(-(self.j_grid as i32));
        let one = 1usize << self.j_grid;
        (0..=width)
            .map(|d| {
                let shift = d * one;
                if shift >= self.table.len() {
                    return 0.0;
                }
                h * self.table[..self.table.len() - shift]
                    .iter()
                    .zip(&self.table[shift..])
                    .map(|(a, b)| a * b)
                    .sum::<f64>()
            })
            .collect()
    }

    /// Expansion of `φ̃_λ` into normalised scaling functions `2^{F/2} φ̃(2^F · - m)`.
    fn expand(&self, lambda: LambdaIndex, fine: i32) -> (i64, Vec<f64>) {
        let (mut level, mut first, mut coef) = if lambda.j < 0 {
            (0, lambda.k, vec![1.0])
        } else {
            (
                lambda.j + 1,
                2 * lambda.k,
                vec![FRAC_1_SQRT_2, -FRAC_1_SQRT_2],
            )
        };
        while level < fine {
            let len = 2 * coef.len() + self.taps.len() - 2;
            let mut next = vec![0.0; len];
            for (i, &a) in coef.iter().enumerate() {
                for (t, &c) in self.taps.iter().enumerate() {
                    next[2 * i + t] += a * c * FRAC_1_SQRT_2;
                }
            }
            first = 2 * first + self.offset;
            coef = next;
            level += 1;
        }
        (first, coef)
    }

    /// Extreme eigenvalues of the Gram matrix of reconstruction functions at
    /// levels `-1..=max_level` whose translates cover `[a, b]`.
    pub(super) fn frame_constants(&self, max_level: u32, a: f64, b: f64) -> (f64, f64) {
        let fine = max_level as i32 + 1;
        let mut rows: Vec<(i64, Vec<f64>)> = Vec::new();
        for j in -1..=max_level as i32 {
            let d = if j < 0 { 1.0 } else { 2f64.powi(j) };
            let lo = (a * d).floor() as i64;
            let hi = (b * d).ceil() as i64;
            rows.extend((lo..hi).map(|k| self.expand(LambdaIndex::new(j, k), fine)));
        }
        let gmin = rows.iter().map(|r| r.0).min().unwrap();
        let gmax = rows.iter().map(|r| r.0 + r.1.len() as i64).max().unwrap();
        let width = (gmax - gmin) as usize;
        let r = self.autocorrelation();

        let gram = |v: &[f64], out: &mut [f64]| {
            let mut t = vec![0.0; width];
            for ((first, c), &vi) in rows.iter().zip(v) {
                let o = (first - gmin) as usize;
                for (x, &ci) in t[o..o + c.len()].iter_mut().zip(c) {
                    *x += vi * ci;
                }
            }
            let mut u = vec![0.0; width];
            for m in 0..width {
                let mut s = r[0] * t[m];
                for (d, &rd) in r.iter().enumerate().skip(1) {
                    if m >= d {
                        s += rd * t[m - d];
                    }
                    if m + d < width {
                        s += rd * t[m + d];
                    }
                }
                u[m] = s;
            }
            for ((first, c), y) in rows.iter().zip(out.iter_mut()) {
                let o = (first - gmin) as usize;
                *y = u[o..o + c.len()].iter().zip(c).map(|(a, b)| a * b).sum();
            }
        };
        extreme_eigenvalues(rows.len(), 400, gram)
    }
}

/// Lanczos with full reorthogonalisation, then Sturm bisection on the
/// tridiagonal for the smallest and largest Ritz values.
fn extreme_eigenvalues(
    n: usize,
    max_steps: usize,
    matvec: impl Fn(&[f64], &mut [f64]),
) -> (f64, f64) {
    let steps = n.min(max_steps);
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(steps);
    let mut v: Vec<f64> = (0..n)
        .map(|i| 1.0 + 0.5 * ((i as f64) * 0.618).sin())
        .collect();
    normalize(&mut v);
    let mut alpha = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut w = vec![0.0; n];
    for _ in 0..steps {
        matvec(&v, &mut w);
        let a = dot(&w, &v);
        alpha.push(a);
        basis.push(v.clone());
        for _ in 0..2 {
            for q in &basis {
                let p = dot(&w, q);
                for (x, y) in w.iter_mut().zip(q) {
                    *x -= p * y;
                }
            }
        }
        let b = dot(&w, &w).sqrt();
        if b < 1e-12 || basis.len() == steps {
            break;
        }
        beta.push(b);
        v = w.iter().map(|x| x / b).collect();
    }
    let lo = tridiagonal_eigenvalue(&alpha, &beta, 0);
    let hi = tridiagonal_eigenvalue(&alpha, &beta, alpha.len() - 1);
    (lo, hi)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) {
    let s = dot(v, v).sqrt();
    v.iter_mut().for_each(|x| *x /= s);
}

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 {
            0.0
        } else {
            beta[i - 1] * beta[i - 1]
        };
        q = alpha[i] - x - if i == 0 { 0.0 } else { off / q };
        if q == 0.0 {
            q = -f64::EPSILON * (alpha[i].abs() + 1.0);
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// The `idx`-th smallest eigenvalue (0-based), by bisection.
fn tridiagonal_eigenvalue(alpha: &[f64], beta: &[f64], idx: usize) -> f64 {
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..alpha.len() {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i < beta.len() { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) > idx {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_taps() {
        assert_eq!(parse_rational("-3/256").unwrap(), -3.0 / 256.0);
        assert_eq!(parse_rational("1").unwrap(), 1.0);
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("x").is_err());
    }

    #[test]
    fn derived_wavelet_for_cdf13() {
        let psi = FilterSpec::cdf13().analysis_wavelet().unwrap();
        assert_eq!(psi.breaks().first(), Some(&-1.0));
        assert_eq!(psi.breaks().last(), Some(&2.0));
        assert_eq!(psi.values(), &[-0.125, -0.125, 1.0, -1.0, 0.125, 0.125]);
    }

    #[test]
    fn cascade_preserves_mass_and_support() {
        let r = Reconstruction::build(&FilterSpec::cdf13(), 10).unwrap();
        assert!((r.prefix.last().unwrap() - 1.0).abs() < 1e-12);
        let s = r.support(LambdaIndex::scaling(0));
        assert!(s.0 >= -2.0 && s.1 <= 3.0);
    }

    #[test]
    fn box_filter_gives_box() {
        let spec = FilterSpec {
            name: None,
            lowpass: vec![Tap::Number(1.0), Tap::Number(1.0)],
            offset: 0,
            psi_breaks: None,
            psi_values: None,
            declared_r: None,
        };
        let r = Reconstruction::build(&spec, 6).unwrap();
        assert!(r.table.iter().all(|&v| v == 1.0));
        let (c1, c2) = r.frame_constants(3, -2.0, 3.0);
        assert!((c1 - 1.0).abs() < 1e-10 && (c2 - 1.0).abs() < 1e-10);
    }

    #[test]
    fn tridiagonal_bisection() {
        // eigenvalues of tridiag(-1, 2, -1) of size 3: 2 - √2, 2, 2 + √2
        let a = [2.0, 2.0, 2.0];
        let b = [-1.0, -1.0];
        let s = std::f64::consts::SQRT_2;
        assert!((tridiagonal_eigenvalue(&a, &b, 0) - (2.0 - s)).abs() < 1e-12);
        assert!((tridiagonal_eigenvalue(&a, &b, 2) - (2.0 + s)).abs() < 1e-12);
    }

    #[test]
    fn filter_spec_json() {
        let s: FilterSpec =
            serde_json::from_str(r#"{"lowpass": ["1", 1.0], "offset": 0}"#).unwrap();
        assert_eq!(s.taps().unwrap(), vec![1.0, 1.0]);
        assert!(serde_json::from_str::<FilterSpec>(
            r#"{"lowpass": [1, 1], "offset": 0, "bogus": 1}"#
        )
        .is_err());
    }
}

//! Compactly supported piecewise-constant functions.
//!
//! Every analysis function of the wavelet bases used here is a step function,
//! and so are the test functions `g` fed to empirical integrals and Campbell
//! checks. Pieces are half-open `[b_i, b_{i+1})`.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct StepFunction {
    breaks: Vec<f64>,
    values: Vec<f64>,
}

impl StepFunction {
    /// `breaks` must be strictly increasing and finite, with
    /// `values.len() + 1 == breaks.len()`.
    pub fn new(breaks: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breaks.len() != values.len() + 1 {
            return Err(Error::InvalidArgument(format!(
                "step function needs len(breaks) = len(values) + 1 >= 2, got {} and {}",
                breaks.len(),
                values.len()
            )));
        }
        if breaks.iter().any(|b| !b.is_finite()) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument(
                "step function breakpoints and values must be finite".into(),
            ));
        }
        if breaks.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument(
                "step function breakpoints must be strictly increasing".into(),
            ));
        }
        Ok(Self { breaks, values })
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![1.0])
    }

    pub fn breaks(&self) -> &[f64] {
        &self.breaks
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(move |(i, &v)| (self.breaks[i], self.breaks[i + 1], v))
    }

    /// Index of the piece containing `x`, if any.
    pub fn piece_index(&self, x: f64) -> Option<usize> {
        let first = self.breaks[0];
        let last = *self.breaks.last().unwrap();
        if !(x >= first && x < last) {
            return None;
        }
        Some(self.breaks.partition_point(|&b| b <= x) - 1)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.piece_index(x).map_or(0.0, |i| self.values[i])
    }

    /// Closed hull of the pieces carrying a nonzero value.
    pub fn support(&self) -> Option<(f64, f64)> {
        let first = self.values.iter().position(|&v| v != 0.0)?;
        let last = self.values.iter().rposition(|&v| v != 0.0)?;
        Some((self.breaks[first], self.breaks[last + 1]))
    }

    pub fn sup_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Infimum of |g| over {g != 0}; `None` for the zero function.
    pub fn inf_abs_on_support(&self) -> Option<f64> {
        self.values
            .iter()
            .filter(|v| **v != 0.0)
            .map(|v| v.abs())
            .reduce(f64::min)
    }

    pub fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            breaks: self.breaks.clone(),
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn squared(&self) -> Self {
        self.map_values(|v| v * v)
    }

    /// `∫ g(x) x^m dx`, exact up to rounding.
    pub fn moment(&self, m: u32) -> f64 {
        let p = m as i32 + 1;
        self.pieces()
            .map(|(a, b, v)| v * (b.powi(p) - a.powi(p)) / p as f64)
            .sum()
    }

    pub fn integral(&self) -> f64 {
        self.pieces().map(|(a, b, v)| v * (b - a)).sum()
    }

    /// `∫ g h`, exact for two step functions.
    pub fn inner(&self, other: &StepFunction) -> f64 {
        let mut pts: Vec<f64> = self.breaks.iter().chain(&other.breaks).copied().collect();
        pts.sort_by(f64::total_cmp);
        pts.dedup();
        pts.windows(2)
            .map(|w| {
                let mid = 0.5 * (w[0] + w[1]);
                self.eval(mid) * other.eval(mid) * (w[1] - w[0])
            })
            .sum()
    }
}

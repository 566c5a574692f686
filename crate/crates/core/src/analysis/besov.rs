//! Besov sequence norms and the weak-Besov radius.

use std::collections::BTreeMap;

use crate::basis::LambdaIndex;
use crate::error::{Error, Result};

use super::spike::{spike_coefficient, spike_sigma_sq};

fn lp_norm(xs: impl Iterator<Item = f64>, p: f64) -> f64 {
    if p.is_infinite() {
        xs.fold(0.0, |m, x| m.max(x.abs()))
    } else {
        xs.map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// `‖(α_k)‖_p + ‖(2^{j(α+1/2-1/p)} ‖(β_{j,k})_k‖_p)_j‖_q` over a finite map.
pub fn besov_norm(coeffs: &BTreeMap<LambdaIndex, f64>, alpha: f64, p: f64, q: f64) -> Result<f64> {
    if !(p >= 1.0 && q >= 1.0 && alpha > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "Besov norm needs alpha > 0 and p, q in [1, inf], got ({alpha}, {p}, {q})"
        )));
    }
    let scaling = lp_norm(
        coeffs
            .iter()
            .filter(|(l, _)| l.is_scaling())
            .map(|(_, &v)| v),
        p,
    );
    let mut levels: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for (l, &v) in coeffs.iter().filter(|(l, _)| !l.is_scaling()) {
        levels.entry(l.j).or_default().push(v);
    }
    let weighted = levels.iter().map(|(&j, vs)| {
        2f64.powf(j as f64 * (alpha + 0.5 - 1.0 / p)) * lp_norm(vs.iter().copied(), p)
    });
    Ok(scaling + lp_norm(weighted, q))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeakBesovRadius {
    /// `sup_t t^{-4s} Σ β² 1{|β| <= σ t}` over breakpoints `t = |β|/σ`.
    pub exact: f64,
    /// Smallest `R` with `exact <= R^{2-4s}`.
    pub radius: f64,
    /// Breakpoint attaining the supremum.
    pub argmax_t: f64,
    /// Same functional maximised over the supplied grid only.
    pub grid_max: f64,
    pub points: usize,
}

fn check_s(s: f64) -> Result<()> {
    if !(s > 0.0 && s < 0.5) {
        return Err(Error::InvalidArgument(format!(
            "s must lie in (0, 1/2), got {s}"
        )));
    }
    Ok(())
}

/// Radius from `(β_λ, σ_λ)` pairs.
pub fn weak_besov_radius(pairs: &[(f64, f64)], s: f64, t_grid: &[f64]) -> Result<WeakBesovRadius> {
    check_s(s)?;
    let points = pairs
        .iter()
        .filter(|(b, sig)| *b != 0.0 && *sig > 0.0)
        .map(|&(b, sig)| (b.abs() / sig, b * b))
        .collect();
    radius_from_points(points, s, t_grid)
}

/// Radius of `f_β` in the Haar basis truncated after `max_level`.
pub fn spike_weak_besov_radius(
    beta: f64,
    s: f64,
    max_level: i32,
    t_grid: &[f64],
) -> Result<WeakBesovRadius> {
    check_s(s)?;
    let mut points = Vec::with_capacity(1usize << (max_level + 1).max(1));
    for j in -1..=max_level {
        let width = if j < 0 { 1 } else { 1i64 << j };
        for k in 0..width {
            let l = LambdaIndex::new(j, k);
            let b = spike_coefficient(beta, l);
            let sig2 = spike_sigma_sq(beta, l);
            if b != 0.0 && sig2 > 0.0 {
                points.push((b.abs() / sig2.sqrt(), b * b));
            }
        }
    }
    radius_from_points(points, s, t_grid)
}

fn radius_from_points(
    mut points: Vec<(f64, f64)>,
    s: f64,
    t_grid: &[f64],
) -> Result<WeakBesovRadius> {
    if t_grid.iter().any(|t| !(*t > 0.0 && t.is_finite())) {
        return Err(Error::InvalidArgument(
            "t grid must be positive and finite".into(),
        ));
    }
    points.sort_unstable_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    let mut exact = 0.0;
    let mut argmax_t = f64::NAN;
    let mut cum = Vec::with_capacity(points.len());
    let mut acc = 0.0;
    for (i, &(t, b2)) in points.iter().enumerate() {
        acc += b2;
        cum.push(acc);
        let group_end = i + 1 == points.len() || points[i + 1].0 != t;
        if group_end {
            let v = t.powf(-4.0 * s) * acc;
            if v > exact {
                exact = v;
                argmax_t = t;
            }
        }
    }
    let grid_max = t_grid
        .iter()
        .map(|&t| {
            let m = points.partition_point(|p| p.0 <= t);
            if m == 0 {
                0.0
            } else {
                t.powf(-4.0 * s) * cum[m - 1]
            }
        })
        .fold(0.0, f64::max);
    Ok(WeakBesovRadius {
        exact,
        radius: exact.powf(1.0 / (2.0 - 4.0 * s)),
        argmax_t,
        grid_max,
        points: points.len(),
    })
}

/// `count` log-spaced points from `lo` to `hi`.
pub fn log_grid(lo: f64, hi: f64, count: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let steps = count.saturating_sub(1).max(1) as f64;
    (0..count)
        .map(|i| (a + (b - a) * i as f64 / steps).exp())
        .collect()
}

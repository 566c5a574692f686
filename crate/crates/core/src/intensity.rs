//! Symbolic intensity models.
//!
//! An [`Intensity`] is the density `f = dμ/(n dx)` of the mean measure of a
//! Poisson process. Every supported model is lowered to a canonical list of
//! disjoint segments, each carrying a finite sum of power terms `c·x^e`
//! (integer `e` for polynomial pieces, `e = -β` for the power spike). All
//! integrals are evaluated from closed-form antiderivatives.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::step::StepFunction;

/// Config-level description of an intensity, as found in experiment JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum IntensitySpec {
    Piecewise { pieces: Vec<PieceSpec> },
    PowerSpike { beta: f64 },
    Mixture { components: Vec<MixtureComponent> },
}

/// Polynomial on `[a, b)`, coefficients in ascending degree of `x`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PieceSpec {
    pub a: f64,
    pub b: f64,
    pub coeffs: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MixtureComponent {
    pub weight: f64,
    pub intensity: IntensitySpec,
}

/// Exponent of a power term.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Power {
    Int(u32),
    /// Real exponent in (-1, 0); only used on segments inside `[0, ∞)`.
    Real(f64),
}

impl Power {
    fn times(self, other: Power) -> Power {
        match (self, other) {
            (Power::Int(a), Power::Int(b)) => Power::Int(a + b),
            (Power::Int(a), Power::Real(e)) | (Power::Real(e), Power::Int(a)) => {
                Power::Real(e + a as f64)
            }
            (Power::Real(a), Power::Real(b)) => Power::Real(a + b),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Term {
    pub coef: f64,
    pub power: Power,
}

impl Term {
    fn eval(&self, x: f64) -> f64 {
        match self.power {
            Power::Int(m) => self.coef * x.powi(m as i32),
            Power::Real(e) => {
                if x == 0.0 {
                    if e < 0.0 {
                        f64::INFINITY
                    } else if e == 0.0 {
                        self.coef
                    } else {
                        0.0
                    }
                } else {
                    self.coef * x.powf(e)
                }
            }
        }
    }

    /// `∫_u^v c·x^e dx` for `u <= v`, written to avoid cancellation when
    /// `u` and `v` are close.
    fn integral(&self, u: f64, v: f64) -> f64 {
        if u >= v {
            return 0.0;
        }
        match self.power {
            Power::Int(0) => self.coef * (v - u),
            Power::Int(m) => {
                // (v^{m+1} - u^{m+1}) = (v - u) Σ_{i=0}^{m} u^i v^{m-i}
                let mut acc = 0.0;
                let mut ui = 1.0;
                for i in 0..=m {
                    acc += ui * v.powi((m - i) as i32);
                    ui *= u;
                }
                self.coef * (v - u) * acc / (m + 1) as f64
            }
            Power::Real(e) => {
                let p = e + 1.0;
                if u <= 0.0 {
                    self.coef * v.powf(p) / p
                } else {
                    let ln_ratio = ((u - v) / v).ln_1p();
                    self.coef * v.powf(p) * -(p * ln_ratio).exp_m1() / p
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Segment {
    pub a: f64,
    pub b: f64,
    pub terms: Vec<Term>,
    pub mass: f64,
}

impl Segment {
    fn new(a: f64, b: f64, mut terms: Vec<Term>) -> Self {
        terms.retain(|t| t.coef != 0.0);
        let mut seg = Self {
            a,
            b,
            terms,
            mass: 0.0,
        };
        seg.mass = seg.partial(a, b);
        seg
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.terms.iter().map(|t| t.eval(x)).sum()
    }

    /// `∫_u^v f` with `[u, v]` clipped to the segment.
    pub fn partial(&self, u: f64, v: f64) -> f64 {
        let (u, v) = (u.max(self.a), v.min(self.b));
        if u >= v {
            return 0.0;
        }
        self.terms.iter().map(|t| t.integral(u, v)).sum()
    }

    /// Value when the segment is a constant (possibly zero) function.
    pub fn constant_value(&self) -> Option<f64> {
        match self.terms.as_slice() {
            [] => Some(0.0),
            [Term {
                coef,
                power: Power::Int(0),
            }] => Some(*coef),
            _ => None,
        }
    }

    fn has_singularity(&self) -> bool {
        self.a <= 0.0
            && self
                .terms
                .iter()
                .any(|t| matches!(t.power, Power::Real(e) if e < 0.0) && t.coef != 0.0)
    }

    fn squared(&self) -> Segment {
        let mut terms = Vec::new();
        for s in &self.terms {
            for t in &self.terms {
                push_term(
                    &mut terms,
                    Term {
                        coef: s.coef * t.coef,
                        power: s.power.times(t.power),
                    },
                );
            }
        }
        Segment::new(self.a, self.b, terms)
    }

    fn polynomial(&self) -> Option<Vec<f64>> {
        let mut coeffs = Vec::new();
        for t in &self.terms {
            let Power::Int(m) = t.power else { return None };
            let m = m as usize;
            if coeffs.len() <= m {
                coeffs.resize(m + 1, 0.0);
            }
            coeffs[m] += t.coef;
        }
        Some(coeffs)
    }

    /// Solve `∫_a^x f = tau` for `x` in the segment, `0 <= tau <= mass`.
    fn invert(&self, tau: f64) -> f64 {
        let (a, b) = (self.a, self.b);
        if tau <= 0.0 {
            return a;
        }
        if tau >= self.mass {
            return b;
        }
        let closed = match self.terms.as_slice() {
            [Term {
                coef,
                power: Power::Int(0),
            }] => Some(a + tau / coef),
            [Term {
                coef,
                power: Power::Real(e),
            }] => {
                let p = e + 1.0;
                Some((a.max(0.0).powf(p) + p * tau / coef).powf(1.0 / p))
            }
            _ => match self.polynomial() {
                Some(c) if c.len() == 2 => {
                    // (c1/2) d^2 + f(a) d - tau = 0 with d = x - a
                    let fa = c[0] + c[1] * a;
                    let disc = (fa * fa + 2.0 * c[1] * tau).max(0.0);
                    Some(a + 2.0 * tau / (fa + disc.sqrt()))
                }
                _ => None,
            },
        };
        match closed {
            Some(x) if x.is_finite() => x.clamp(a, b),
            _ => self.invert_newton(tau),
        }
    }

    fn invert_newton(&self, tau: f64) -> f64 {
        let (mut lo, mut hi) = (self.a, self.b);
        let mut x = self.a + (self.b - self.a) * (tau / self.mass);
        for _ in 0..200 {
            let g = self.partial(self.a, x) - tau;
            if g == 0.0 {
                return x;
            }
            if g < 0.0 {
                lo = x;
            } else {
                hi = x;
            }
            if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE) {
                break;
            }
            let d = self.eval(x);
            let newton = x - g / d;
            x = if d > 0.0 && d.is_finite() && newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        x
    }
}

fn push_term(terms: &mut Vec<Term>, t: Term) {
    if let Some(existing) = terms.iter_mut().find(|e| e.power == t.power) {
        existing.coef += t.coef;
    } else {
        terms.push(t);
    }
}

fn poly_eval(c: &[f64], x: f64) -> f64 {
    c.iter().rev().fold(0.0, |acc, &ci| acc * x + ci)
}

fn poly_derivative(c: &[f64]) -> Vec<f64> {
    c.iter()
        .enumerate()
        .skip(1)
        .map(|(i, &ci)| i as f64 * ci)
        .collect()
}

/// Real roots of the polynomial `c` inside `[a, b]`. Roots of `c'` split the
/// interval into monotone pieces, each holding at most one root.
fn poly_roots_in(c: &[f64], a: f64, b: f64) -> Vec<f64> {
    let deg = c.iter().rposition(|&x| x != 0.0).unwrap_or(0);
    if deg == 0 {
        return Vec::new();
    }
    let c = &c[..=deg];
    let mut knots = vec![a];
    knots.extend(poly_roots_in(&poly_derivative(c), a, b));
    knots.push(b);
    let mut roots = Vec::new();
    for w in knots.windows(2) {
        let (mut lo, mut hi) = (w[0], w[1]);
        let (flo, fhi) = (poly_eval(c, lo), poly_eval(c, hi));
        if flo == 0.0 {
            roots.push(lo);
            continue;
        }
        if flo.signum() == fhi.signum() {
            continue;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if poly_eval(c, mid).signum() == flo.signum() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        roots.push(0.5 * (lo + hi));
    }
    if poly_eval(c, b) == 0.0 {
        roots.push(b);
    }
    roots.dedup();
    roots
}

/// Validated intensity with its canonical segment form.
#[derive(Debug, Clone, PartialEq)]
pub struct Intensity {
    spec: IntensitySpec,
    segments: Vec<Segment>,
    /// Mass to the left of each segment.
    cum: Vec<f64>,
    mass: f64,
    l2_sq: f64,
    sup: f64,
}

impl Intensity {
    pub fn from_spec(spec: IntensitySpec) -> Result<Self> {
        let segments = lower(&spec)?;
        let mut cum = Vec::with_capacity(segments.len());
        let mut acc = 0.0;
        for s in &segments {
            cum.push(acc);
            acc += s.mass;
        }
        if !(acc > 0.0 && acc.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "total mass must be finite and positive, got {acc}"
            )));
        }
        let l2_sq: f64 = segments.iter().map(|s| s.squared().mass).sum();
        if !l2_sq.is_finite() {
            return Err(Error::InvalidModel(
                "intensity is not square integrable".into(),
            ));
        }
        let sup = sup_norm(&segments);
        Ok(Self {
            spec,
            segments,
            cum,
            mass: acc,
            l2_sq,
            sup,
        })
    }

    /// `c·1_{[a,b)}`.
    pub fn constant(a: f64, b: f64, c: f64) -> Result<Self> {
        Self::piecewise(vec![PieceSpec {
            a,
            b,
            coeffs: vec![c],
        }])
    }

    pub fn indicator(a: f64, b: f64) -> Result<Self> {
        Self::constant(a, b, 1.0)
    }

    pub fn piecewise(pieces: Vec<PieceSpec>) -> Result<Self> {
        Self::from_spec(IntensitySpec::Piecewise { pieces })
    }

    /// `x^{-β} 1_{[0,1]}` with `0 < β < 1/2`.
    pub fn power_spike(beta: f64) -> Result<Self> {
        Self::from_spec(IntensitySpec::PowerSpike { beta })
    }

    pub fn spec(&self) -> &IntensitySpec {
        &self.spec
    }

    /// Exponent of a bare power spike model.
    pub fn spike_beta(&self) -> Option<f64> {
        match self.spec {
            IntensitySpec::PowerSpike { beta } => Some(beta),
            _ => None,
        }
    }

    /// Value of `f` near `x` when the piece holding `x` is constant.
    pub fn constant_on(&self, x: f64) -> Option<f64> {
        let i = self.segments.partition_point(|s| s.a <= x);
        match i.checked_sub(1).map(|i| &self.segments[i]) {
            Some(s) if x < s.b => s.constant_value(),
            _ => Some(0.0),
        }
    }

    /// `f(x)`; `+∞` at the singular point of a power spike.
    pub fn eval(&self, x: f64) -> f64 {
        let i = self.segments.partition_point(|s| s.a <= x);
        if i == 0 {
            return 0.0;
        }
        let s = &self.segments[i - 1];
        if x < s.b {
            s.eval(x)
        } else {
            0.0
        }
    }

    /// `‖f‖₁`.
    pub fn total_mass(&self) -> f64 {
        self.mass
    }

    /// `‖f‖₂`.
    pub fn l2_norm(&self) -> f64 {
        self.l2_sq.sqrt()
    }

    pub fn l2_norm_sq(&self) -> f64 {
        self.l2_sq
    }

    /// `‖f‖_∞`, `+∞` for unbounded models.
    pub fn sup_norm(&self) -> f64 {
        self.sup
    }

    /// Closed hull of the segments carrying mass.
    pub fn support(&self) -> (f64, f64) {
        let first = self.segments.iter().find(|s| s.mass > 0.0).unwrap();
        let last = self.segments.iter().rev().find(|s| s.mass > 0.0).unwrap();
        (first.a, last.b)
    }

    /// All segment endpoints, sorted.
    pub fn breakpoints(&self) -> Vec<f64> {
        let mut pts: Vec<f64> = self.segments.iter().flat_map(|s| [s.a, s.b]).collect();
        pts.dedup();
        pts
    }

    /// `∫_a^b f`. Infinite bounds are allowed.
    pub fn integrate_interval(&self, a: f64, b: f64) -> f64 {
        if !(a < b) {
            return 0.0;
        }
        let first = self.segments.partition_point(|s| s.b <= a);
        let mut acc = 0.0;
        for s in &self.segments[first..] {
            if s.a >= b {
                break;
            }
            if a <= s.a && s.b <= b {
                acc += s.mass;
            } else {
                acc += s.partial(a, b);
            }
        }
        acc
    }

    /// `∫_a^b w(x) f(x) dx` for a step weight `w`; breakpoints of `f` and
    /// `w` are merged so every sub-piece uses an exact antiderivative.
    pub fn integrate(&self, a: f64, b: f64, weight: &StepFunction) -> f64 {
        weight
            .pieces()
            .filter(|&(_, _, v)| v != 0.0)
            .map(|(u, v, w)| w * self.integrate_interval(u.max(a), v.min(b)))
            .sum()
    }

    /// CDF of the probability density `f / ‖f‖₁`.
    pub fn cdf(&self, x: f64) -> f64 {
        (self.integrate_interval(f64::NEG_INFINITY, x) / self.mass).min(1.0)
    }

    /// Quantile function of `f / ‖f‖₁`; nondecreasing in `u`.
    pub fn inverse_cdf(&self, u: f64) -> f64 {
        let u = u.clamp(0.0, 1.0);
        let target = u * self.mass;
        let n = self.segments.len();
        // first segment whose right cumulative mass exceeds the target
        let mut i = self
            .cum
            .iter()
            .zip(&self.segments)
            .position(|(c, s)| c + s.mass > target)
            .unwrap_or(n - 1);
        while self.segments[i].mass <= 0.0 && i > 0 {
            i -= 1;
        }
        let seg = &self.segments[i];
        if u >= 1.0 {
            return seg.b;
        }
        seg.invert((target - self.cum[i]).clamp(0.0, seg.mass))
    }
}

fn lower(spec: &IntensitySpec) -> Result<Vec<Segment>> {
    match spec {
        IntensitySpec::Piecewise { pieces } => lower_piecewise(pieces),
        IntensitySpec::PowerSpike { beta } => {
            let beta = *beta;
            if !(beta > 0.0 && beta < 0.5) {
                let why = if beta >= 1.0 {
                    "x^-beta is not integrable at 0"
                } else if beta >= 0.5 {
                    "x^-beta is not square integrable at 0"
                } else {
                    "exponent must be positive"
                };
                return Err(Error::InvalidModel(format!(
                    "power spike needs 0 < beta < 1/2, got {beta} ({why})"
                )));
            }
            Ok(vec![Segment::new(
                0.0,
                1.0,
                vec![Term {
                    coef: 1.0,
                    power: Power::Real(-beta),
                }],
            )])
        }
        IntensitySpec::Mixture { components } => lower_mixture(components),
    }
}

fn lower_piecewise(pieces: &[PieceSpec]) -> Result<Vec<Segment>> {
    if pieces.is_empty() {
        return Err(Error::InvalidModel("piecewise model has no pieces".into()));
    }
    let mut pieces = pieces.to_vec();
    pieces.sort_by(|p, q| p.a.total_cmp(&q.a));
    let mut segments = Vec::with_capacity(pieces.len());
    for (i, p) in pieces.iter().enumerate() {
        if !(p.a.is_finite() && p.b.is_finite() && p.a < p.b) {
            return Err(Error::InvalidModel(format!(
                "piece {i} has invalid interval [{}, {})",
                p.a, p.b
            )));
        }
        if i > 0 && p.a < pieces[i - 1].b {
            return Err(Error::InvalidModel(format!(
                "pieces overlap at [{}, {})",
                p.a,
                pieces[i - 1].b
            )));
        }
        if p.coeffs.is_empty() || p.coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "piece {i} needs finite polynomial coefficients"
            )));
        }
        check_nonnegative(&p.coeffs, p.a, p.b)?;
        let terms = p
            .coeffs
            .iter()
            .enumerate()
            .map(|(m, &c)| Term {
                coef: c,
                power: Power::Int(m as u32),
            })
            .collect();
        segments.push(Segment::new(p.a, p.b, terms));
    }
    Ok(segments)
}

fn check_nonnegative(coeffs: &[f64], a: f64, b: f64) -> Result<()> {
    let mut pts = vec![a, b];
    pts.extend(poly_roots_in(&poly_derivative(coeffs), a, b));
    for x in pts {
        let v = poly_eval(coeffs, x);
        let scale: f64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c.abs() * x.abs().powi(i as i32))
            .sum();
        if v < -1e-12 * scale.max(f64::MIN_POSITIVE) {
            return Err(Error::InvalidModel(format!(
                "polynomial piece on [{a}, {b}) is negative at x = {x} (value {v})"
            )));
        }
    }
    Ok(())
}

fn lower_mixture(components: &[MixtureComponent]) -> Result<Vec<Segment>> {
    if components.is_empty() {
        return Err(Error::InvalidModel("mixture has no components".into()));
    }
    let mut parts = Vec::with_capacity(components.len());
    for c in components {
        if !(c.weight >= 0.0 && c.weight.is_finite()) {
            return Err(Error::InvalidModel(format!(
                "mixture weight must be finite and nonnegative, got {}",
                c.weight
            )));
        }
        parts.push((c.weight, lower(&c.intensity)?));
    }
    let mut pts: Vec<f64> = parts
        .iter()
        .flat_map(|(_, segs)| segs.iter().flat_map(|s| [s.a, s.b]))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut out = Vec::new();
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let mid = 0.5 * (a + b);
        let mut terms = Vec::new();
        let mut covered = false;
        for (weight, segs) in &parts {
            if let Some(s) = segs.iter().find(|s| s.a <= mid && mid < s.b) {
                covered = true;
                for t in &s.terms {
                    push_term(
                        &mut terms,
                        Term {
                            coef: weight * t.coef,
                            power: t.power,
                        },
                    );
                }
            }
        }
        if covered {
            out.push(Segment::new(a, b, terms));
        }
    }
    Ok(out)
}

fn sup_norm(segments: &[Segment]) -> f64 {
    let mut sup: f64 = 0.0;
    for s in segments {
        if s.has_singularity() {
            return f64::INFINITY;
        }
        match s.polynomial() {
            Some(c) => {
                let mut pts = vec![s.a, s.b];
                pts.extend(poly_roots_in(&poly_derivative(&c), s.a, s.b));
                for x in pts {
                    sup = sup.max(poly_eval(&c, x).abs());
                }
            }
            None => {
                // Real exponents here are sums with integer powers on x > 0;
                // a dense scan is enough for reporting purposes.
                for i in 0..=1024 {
                    let x = s.a + (s.b - s.a) * i as f64 / 1024.0;
                    sup = sup.max(s.eval(x).abs());
                }
            }
        }
    }
    sup
}

//! Independent reference computations for the integration tests. Nothing
//! here calls into the library's numerics.
#![allow(dead_code)]

/// Double-exponential (tanh-sinh) quadrature on `[a, b]`. Integrable endpoint
/// singularities are fine because nodes never touch the endpoints.
pub fn tanh_sinh(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let h = 1.0 / 64.0;
    let pi2 = std::f64::consts::FRAC_PI_2;
    let mut sum = 0.0;
    for i in -400i32..=400 {
        let t = i as f64 * h;
        let u = pi2 * t.sinh();
        let cosh_u = u.cosh();
        let w = pi2 * t.cosh() / (cosh_u * cosh_u);
        // distance from the nearer endpoint, kept exact near the ends
        let d = half / (u.abs().exp() * cosh_u);
        if d == 0.0 || w == 0.0 {
            continue;
        }
        let x = if u < 0.0 { a + d } else { b - d };
        let x = if u == 0.0 { mid } else { x };
        sum += w * f(x);
    }
    sum * h * half
}

/// Integral over `[a, b]` split at every breakpoint in `cuts`.
pub fn piecewise_integral(f: impl Fn(f64) -> f64, a: f64, b: f64, cuts: &[f64]) -> f64 {
    let mut pts: Vec<f64> = std::iter::once(a)
        .chain(cuts.iter().copied().filter(|&c| c > a && c < b))
        .chain(std::iter::once(b))
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| tanh_sinh(&f, w[0], w[1])).sum()
}

/// Haar analysis function, written out from its definition.
pub fn haar(j: i32, k: i64, x: f64) -> f64 {
    if j < 0 {
        return if x >= k as f64 && x < k as f64 + 1.0 {
            1.0
        } else {
            0.0
        };
    }
    let s = 2f64.powi(j);
    let y = s * x - k as f64;
    let amp = s.sqrt();
    if (0.0..0.5).contains(&y) {
        amp
    } else if (0.5..1.0).contains(&y) {
        -amp
    } else {
        0.0
    }
}

pub fn spike(beta: f64, x: f64) -> f64 {
    if x > 0.0 && x <= 1.0 {
        x.powf(-beta)
    } else {
        0.0
    }
}

/// `β_{j,k}` of `x^{-β}1_{[0,1]}` straight from the closed-form display.
pub fn spike_beta_naive(beta: f64, j: i32, k: i64) -> f64 {
    let p = 1.0 - beta;
    if j < 0 {
        return if k == 0 { 1.0 / p } else { 0.0 };
    }
    if k < 0 || k >= 1 << j {
        return 0.0;
    }
    let kf = k as f64;
    2f64.powf(-(j as f64) * (0.5 - beta))
        * (2.0 * (kf + 0.5).powf(p) - kf.powf(p) - (kf + 1.0).powf(p))
        / p
}

/// `σ²_{j,k}` of the same intensity from its display.
pub fn spike_sigma_naive(beta: f64, j: i32, k: i64) -> f64 {
    let p = 1.0 - beta;
    if j < 0 {
        return if k == 0 { 1.0 / p } else { 0.0 };
    }
    if k < 0 || k >= 1 << j {
        return 0.0;
    }
    let kf = k as f64;
    2f64.powf(j as f64 * beta) * ((kf + 1.0).powf(p) - kf.powf(p)) / p
}

/// `β_{j,k}` of the spike by quadrature over the Haar cells.
pub fn spike_beta_quad(beta: f64, j: i32, k: i64) -> f64 {
    let (a, b) = cell(j, k);
    let m = 0.5 * (a + b);
    piecewise_integral(|x| haar(j, k, x) * spike(beta, x), a, b.min(1.0), &[m])
}

pub fn spike_sigma_quad(beta: f64, j: i32, k: i64) -> f64 {
    let (a, b) = cell(j, k);
    let m = 0.5 * (a + b);
    piecewise_integral(
        |x| haar(j, k, x).powi(2) * spike(beta, x),
        a,
        b.min(1.0),
        &[m],
    )
}

fn cell(j: i32, k: i64) -> (f64, f64) {
    if j < 0 {
        (k as f64, k as f64 + 1.0)
    } else {
        let w = 2f64.powi(-j);
        (k as f64 * w, (k + 1) as f64 * w)
    }
}

/// Sample mean and its standard error.
pub fn mean_se(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let v = xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
    (m, (v / n).sqrt())
}

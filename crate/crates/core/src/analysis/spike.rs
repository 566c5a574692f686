//! Haar coefficients of `f_β(x) = x^{-β} 1_{[0,1]}` in closed form.
//!
//! With `p = 1 - β`,
//! `β_{j,k} = 2^{-j(1/2-β)} D_k / p` where `D_k = 2(k+½)^p - k^p - (k+1)^p`,
//! and `σ²_{j,k} = 2^{jβ} ((k+1)^p - k^p) / p`. Both differences are formed
//! without cancellation so that levels up to 24 stay accurate.

use crate::basis::LambdaIndex;

/// `(k+1)^p - k^p`.
fn first_difference(p: f64, k: f64) -> f64 {
    if k == 0.0 {
        1.0
    } else {
        k.powf(p) * (p * (1.0 / k).ln_1p()).exp_m1()
    }
}

/// `2(k+½)^p - k^p - (k+1)^p`.
pub(crate) fn second_difference(p: f64, k: f64) -> f64 {
    if k < 16.0 {
        return 2.0 * (k + 0.5).powf(p) - k.powf(p) - (k + 1.0).powf(p);
    }
    // binomial series in 1/k; the m = 0, 1 terms cancel exactly
    let x = 1.0 / k;
    let mut binom = p * (p - 1.0) / 2.0;
    let mut xm = x * x;
    let mut sum = 0.0;
    for m in 2..60 {
        if m > 2 {
            binom *= (p - (m as f64 - 1.0)) / m as f64;
            xm *= x;
        }
        let term = binom * xm * (2f64.powi(1 - m) - 1.0);
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() {
            break;
        }
    }
    k.powf(p) * sum
}

pub fn spike_coefficient(beta: f64, lambda: LambdaIndex) -> f64 {
    let p = 1.0 - beta;
    if lambda.is_scaling() {
        return if lambda.k == 0 { 1.0 / p } else { 0.0 };
    }
    if lambda.k < 0 || lambda.k >= 1i64 << lambda.j {
        return 0.0;
    }
    let j = lambda.j as f64;
    2f64.powf(-j * (0.5 - beta)) * second_difference(p, lambda.k as f64) / p
}

pub fn spike_sigma_sq(beta: f64, lambda: LambdaIndex) -> f64 {
    let p = 1.0 - beta;
    if lambda.is_scaling() {
        return if lambda.k == 0 { 1.0 / p } else { 0.0 };
    }
    if lambda.k < 0 || lambda.k >= 1i64 << lambda.j {
        return 0.0;
    }
    let j = lambda.j as f64;
    2f64.powf(j * beta) * first_difference(p, lambda.k as f64) / p
}

/// Upper bound on `Σ_k D_k²`.
fn second_difference_energy(beta: f64) -> f64 {
    const TERMS: usize = 4096;
    let p = 1.0 - beta;
    let head: f64 = (0..TERMS)
        .map(|k| second_difference(p, k as f64).powi(2))
        .sum();
    // D_k <= β(1-β)/4 · k^{-1-β} for k >= 1
    let c = (beta * p / 4.0).powi(2);
    let kf = TERMS as f64;
    let e = 2.0 + 2.0 * beta;
    head + c * (kf.powf(-e) + kf.powf(1.0 - e) / (e - 1.0))
}

/// Upper bound on `Σ_{j > level} Σ_k β_{j,k}²`.
pub fn spike_tail_bound(beta: f64, level: i32) -> f64 {
    let p = 1.0 - beta;
    let r = 1.0 - 2.0 * beta;
    second_difference_energy(beta) / (p * p) * 2f64.powf(-(level as f64 + 1.0) * r)
        / (1.0 - 2f64.powf(-r))
}

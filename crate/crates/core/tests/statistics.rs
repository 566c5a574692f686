mod common;

use statrs::distribution::{ChiSquared, ContinuousCDF, Discrete, Poisson};

use poisson_wavelet::analysis::{sigma_sq, true_coefficient};
use poisson_wavelet::estimator::{empirical_coefficient, empirical_variance};
use poisson_wavelet::montecarlo::{mix_seed, Parallelism};
use poisson_wavelet::process::{campbell_check, simulate};
use poisson_wavelet::{Intensity, LambdaIndex, StepFunction, WaveletBasis};

const LAMBDAS: [(i32, i64); 12] = [
    (-1, 0),
    (0, 0),
    (1, 0),
    (1, 1),
    (2, 0),
    (2, 3),
    (3, 0),
    (3, 5),
    (4, 0),
    (4, 9),
    (5, 0),
    (5, 17),
];

fn check_unbiased(f: &Intensity, n: u64, seed: u64) {
    let h = WaveletBasis::haar();
    let reps = 10_000;
    let samples: Vec<_> = (0..reps)
        .map(|i| simulate(f, n, mix_seed(seed, i)).unwrap())
        .collect();
    for (j, k) in LAMBDAS {
        let l = LambdaIndex::new(j, k);
        let beta = true_coefficient(f, l, &h);
        let v = sigma_sq(f, l, &h) / n as f64;
        let bh: Vec<f64> = samples
            .iter()
            .map(|s| empirical_coefficient(s, l, &h))
            .collect();
        let vh: Vec<f64> = samples
            .iter()
            .map(|s| empirical_variance(s, l, &h))
            .collect();
        let (mb, sb) = common::mean_se(&bh);
        let (mv, sv) = common::mean_se(&vh);
        assert!(
            (mb - beta).abs() <= 3.0 * sb,
            "{l}: mean beta_hat {mb} vs {beta} (se {sb})"
        );
        assert!(
            (mv - v).abs() <= 3.0 * sv,
            "{l}: mean v_hat {mv} vs {v} (se {sv})"
        );
    }
}

#[test]
fn coefficient_estimates_unbiased_for_spike() {
    check_unbiased(&Intensity::power_spike(0.25).unwrap(), 64, 11);
}

#[test]
fn coefficient_estimates_unbiased_for_indicator() {
    check_unbiased(&Intensity::indicator(0.0, 1.0).unwrap(), 64, 12);
}

#[test]
fn counts_are_poisson() {
    let f = Intensity::indicator(0.0, 1.0).unwrap();
    let n = 16u64;
    let reps = 20_000;
    let mut hist = vec![0usize; 40];
    for i in 0..reps {
        let c = simulate(&f, n, mix_seed(5, i)).unwrap().len();
        hist[c.min(39)] += 1;
    }
    let pois = Poisson::new(16.0).unwrap();
    // pool the tails so every cell expects at least 5
    let (lo, hi) = (6usize, 27usize);
    let mut chi2 = 0.0;
    let mut cells = 0;
    let mut push = |obs: usize, p: f64| {
        let e = p * reps as f64;
        chi2 += (obs as f64 - e).powi(2) / e;
        cells += 1;
    };
    push(
        hist[..=lo].iter().sum(),
        (0..=lo as u64).map(|k| pois.pmf(k)).sum(),
    );
    for (k, &obs) in hist.iter().enumerate().take(hi).skip(lo + 1) {
        push(obs, pois.pmf(k as u64));
    }
    let upper: f64 = 1.0 - (0..hi as u64).map(|k| pois.pmf(k)).sum::<f64>();
    push(hist[hi..].iter().sum(), upper);
    let crit = ChiSquared::new((cells - 1) as f64)
        .unwrap()
        .inverse_cdf(0.999);
    assert!(chi2 < crit, "chi2 {chi2} >= {crit}");
}

#[test]
fn spike_mean_count() {
    let f = Intensity::power_spike(0.25).unwrap();
    let counts: Vec<f64> = (0..4000)
        .map(|i| simulate(&f, 100, mix_seed(9, i)).unwrap().len() as f64)
        .collect();
    let (m, se) = common::mean_se(&counts);
    assert!(
        (m - 400.0 / 3.0).abs() <= 3.0 * se,
        "{m} vs 133.33 (se {se})"
    );
}

#[test]
fn events_follow_normalized_intensity() {
    // Kolmogorov-Smirnov against F(x) = x^{3/4} on pooled events
    let f = Intensity::power_spike(0.25).unwrap();
    let mut all: Vec<f64> = (0..40)
        .flat_map(|i| simulate(&f, 50, mix_seed(3, i)).unwrap().times().to_vec())
        .collect();
    all.sort_by(f64::total_cmp);
    let m = all.len() as f64;
    let d = all
        .iter()
        .enumerate()
        .map(|(i, &x)| {
            let cdf = x.powf(0.75);
            (cdf - i as f64 / m)
                .abs()
                .max(((i + 1) as f64 / m - cdf).abs())
        })
        .fold(0.0, f64::max);
    assert!(d < 1.95 / m.sqrt(), "KS distance {d}");
}

#[test]
fn campbell_moments_for_step_weight() {
    let f = Intensity::piecewise(vec![poisson_wavelet::intensity::PieceSpec {
        a: 0.0,
        b: 1.0,
        coeffs: vec![0.0, 2.0],
    }])
    .unwrap();
    let g = StepFunction::new(vec![0.0, 0.3, 0.8], vec![2.0, -1.0]).unwrap();
    let r = campbell_check(&f, 20, &g, 20_000, 4, Parallelism::default()).unwrap();
    // n∫g f with f = 2x: 2·0.09 - (0.64 - 0.09) = -0.37, times 20
    assert!((r.target_mean - 20.0 * -0.37).abs() < 1e-12);
    assert!((r.target_var - 20.0 * (4.0 * 0.09 + 0.55)).abs() < 1e-12);
    assert!(r.within(3.0), "{r:?}");
}

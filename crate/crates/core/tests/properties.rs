mod common;

use std::collections::{BTreeMap, BTreeSet};

use proptest::prelude::*;

use poisson_wavelet::analysis::{
    besov_norm, kl_divergence, oracle_risk, true_coefficients, CoefficientMap, RiskRow,
};
use poisson_wavelet::estimator::{
    bruteforce_select, empirical_coefficient, level_cutoff, CoefficientRecord,
};
use poisson_wavelet::intensity::PieceSpec;
use poisson_wavelet::io::{read_coefficients, read_risk, write_coefficients, write_risk};
use poisson_wavelet::process::simulate;
use poisson_wavelet::{
    estimate, BasisSpec, EstimatorConfig, Intensity, LambdaIndex, PointSample, WaveletBasis,
};

/// Nonnegative linear pieces on consecutive subintervals of `[0, 4]`.
fn piecewise() -> impl Strategy<Value = Intensity> {
    (1usize..5)
        .prop_flat_map(|m| {
            (
                prop::collection::vec(0.05f64..1.0, m),
                prop::collection::vec((0.0f64..3.0, 0.0f64..2.0), m),
            )
        })
        .prop_map(|(widths, coeffs)| {
            let mut a = 0.0;
            let pieces = widths
                .iter()
                .zip(coeffs)
                .map(|(w, (c0, c1))| {
                    let p = PieceSpec {
                        a,
                        b: a + w,
                        coeffs: vec![c0 + 0.1, c1],
                    };
                    a += w;
                    p
                })
                .collect();
            Intensity::piecewise(pieces).unwrap()
        })
}

/// Constant pieces on the dyadic cells of `[0, 1)` at level `level`.
fn dyadic_step(level: u32) -> impl Strategy<Value = Intensity> {
    prop::collection::vec(0.0f64..3.0, 1usize << level).prop_map(move |vals| {
        let w = 1.0 / vals.len() as f64;
        let pieces = vals
            .iter()
            .enumerate()
            .map(|(i, &c)| PieceSpec {
                a: i as f64 * w,
                b: (i + 1) as f64 * w,
                coeffs: vec![c + 0.01],
            })
            .collect();
        Intensity::piecewise(pieces).unwrap()
    })
}

fn sample_times() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-0.5f64..2.5, 0..60)
}

fn record() -> impl Strategy<Value = CoefficientRecord> {
    (
        -1i32..12,
        -50i64..50,
        -10.0f64..10.0,
        0.0f64..5.0,
        0.0f64..5.0,
        0.0f64..5.0,
        any::<bool>(),
    )
        .prop_map(|(j, k, b, v, dv, e, kept)| CoefficientRecord {
            lambda: LambdaIndex::new(j, k),
            beta_hat: b / 3.0,
            v_hat: v,
            v_tilde: v + dv,
            eta: e,
            kept,
        })
}

fn kept_set(est: &poisson_wavelet::ThresholdedEstimate) -> BTreeSet<LambdaIndex> {
    est.kept().map(|r| r.lambda).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn cdf_inverts(f in piecewise(), u in 0.001f64..0.999) {
        let x = f.inverse_cdf(u);
        prop_assert!((f.cdf(x) - u).abs() < 1e-10);
    }

    #[test]
    fn total_integral_is_mass(f in piecewise()) {
        let whole = f.integrate_interval(f64::NEG_INFINITY, f64::INFINITY);
        prop_assert!((whole - f.total_mass()).abs() <= 1e-12 * f.total_mass());
        let bps = f.breakpoints();
        let (a, b) = f.support();
        let q = common::piecewise_integral(|x| f.eval(x), a, b, &bps);
        prop_assert!((q - f.total_mass()).abs() < 1e-10);
    }

    #[test]
    fn haar_matches_definition(j in -1i32..12, k in -4i64..4100, x in -1.0f64..5.0) {
        let h = WaveletBasis::haar();
        prop_assert_eq!(h.analysis_value(LambdaIndex::new(j, k), x), common::haar(j, k, x));
    }

    #[test]
    fn filter_dilation(j in 0i32..6, k in -3i64..20, x in -1.0f64..2.0) {
        let b = WaveletBasis::from_spec(&BasisSpec::Cdf13, 10).unwrap();
        let s = 2f64.powi(j);
        let lhs = b.analysis_value(LambdaIndex::new(j, k), x);
        let rhs = s.sqrt() * b.analysis_value(LambdaIndex::new(0, 0), s * x - k as f64);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + rhs.abs()));
    }

    #[test]
    fn haar_parseval_on_dyadic_steps(f in dyadic_step(4)) {
        let h = WaveletBasis::haar();
        let energy: f64 = true_coefficients(&f, &h, -1, 3).values().map(|b| b * b).sum();
        prop_assert!((energy - f.l2_norm_sq()).abs() <= 1e-12 * f.l2_norm_sq());
        let finer: f64 = true_coefficients(&f, &h, 4, 6).values().map(|b| b * b).sum();
        prop_assert!(finer < 1e-24);
    }

    #[test]
    fn active_indices_match_scan(times in sample_times(), j in -1i32..7, cdf in any::<bool>()) {
        let basis = if cdf {
            WaveletBasis::from_spec(&BasisSpec::Cdf13, 10).unwrap()
        } else {
            WaveletBasis::haar()
        };
        let sample = PointSample::new(times, 10).unwrap();
        let d = if j < 0 { 1.0 } else { 2f64.powi(j) };
        let mut expect = Vec::new();
        for k in (-3.0 * d - 8.0) as i64..=(3.0 * d + 8.0) as i64 {
            let l = LambdaIndex::new(j, k);
            if sample.times().iter().any(|&t| basis.analysis_value(l, t) != 0.0) {
                expect.push(k);
            }
        }
        prop_assert_eq!(basis.active_indices(&sample, j), expect);
    }

    #[test]
    fn sparse_estimate_matches_dense_scan(times in sample_times(), n in 8u64..200) {
        let sample = PointSample::new(times, n).unwrap();
        let h = WaveletBasis::haar();
        let cfg = EstimatorConfig::default();
        let est = estimate(&sample, &cfg, &h).unwrap();
        let j0 = level_cutoff(n, cfg.c, cfg.c_prime).unwrap();
        let mut dense = BTreeMap::new();
        for j in -1..=j0.min(8) {
            let d = if j < 0 { 1.0 } else { 2f64.powi(j) };
            for k in (-0.5 * d).floor() as i64 - 1..=(2.5 * d).ceil() as i64 + 1 {
                let l = LambdaIndex::new(j, k);
                let b = empirical_coefficient(&sample, l, &h);
                if b != 0.0 {
                    dense.insert(l, b);
                }
            }
        }
        let sparse: BTreeMap<_, _> = est
            .records()
            .iter()
            .filter(|r| r.lambda.j <= 8)
            .map(|r| (r.lambda, r.beta_hat))
            .collect();
        prop_assert_eq!(sparse.keys().collect::<Vec<_>>(), dense.keys().collect::<Vec<_>>());
        for (l, b) in &dense {
            prop_assert!((sparse[l] - b).abs() <= 1e-14 * b.abs().max(1.0));
        }
        for r in est.records() {
            prop_assert!(r.lambda.j <= j0);
            prop_assert!(r.v_tilde >= r.v_hat);
            prop_assert_eq!(r.kept, r.beta_hat.abs() >= r.eta);
        }
    }

    #[test]
    fn larger_gamma_keeps_fewer(times in sample_times(), n in 4u64..80, g in 0.2f64..3.0, dg in 0.0f64..2.0) {
        let sample = PointSample::new(times, n).unwrap();
        let h = WaveletBasis::haar();
        let lo = EstimatorConfig { gamma: g, ..Default::default() };
        let hi = EstimatorConfig { gamma: g + dg, ..Default::default() };
        let a = kept_set(&estimate(&sample, &lo, &h).unwrap());
        let b = kept_set(&estimate(&sample, &hi, &h).unwrap());
        prop_assert!(b.is_subset(&a));
    }

    #[test]
    fn duplicated_events_keep_coefficients(times in sample_times(), n in 4u64..100) {
        let h = WaveletBasis::haar();
        let cfg = EstimatorConfig { c_prime: 0.0, ..Default::default() };
        let once = PointSample::new(times.clone(), n).unwrap();
        let twice = PointSample::new(times.iter().chain(&times).copied().collect(), 2 * n).unwrap();
        let a = estimate(&once, &cfg, &h).unwrap();
        let b = estimate(&twice, &cfg, &h).unwrap();
        for r in a.records() {
            // the doubled run has one more level; shared levels must agree
            let other = b.get(r.lambda).expect("same support");
            prop_assert_eq!(other.beta_hat, r.beta_hat);
        }
    }

    #[test]
    fn kept_set_is_crit_minimizer(seed in any::<u64>(), n in 8u64..64) {
        let f = Intensity::power_spike(0.25).unwrap();
        let h = WaveletBasis::haar();
        let sample = simulate(&f, n, seed).unwrap();
        let est = estimate(&sample, &EstimatorConfig::default(), &h).unwrap();
        prop_assume!(est.records().len() <= 20);
        let chosen = bruteforce_select(est.records()).unwrap();
        let kept: Vec<usize> = (0..est.records().len()).filter(|&i| est.records()[i].kept).collect();
        prop_assert_eq!(chosen, kept);
    }

    #[test]
    fn besov_nesting(f in dyadic_step(5), alpha in 0.2f64..2.0, p in 1.0f64..4.0, dp in 0.0f64..3.0, q in 1.0f64..4.0, dq in 0.0f64..3.0) {
        let h = WaveletBasis::haar();
        let c: CoefficientMap = true_coefficients(&f, &h, -1, 5);
        let base = besov_norm(&c, alpha, p, q).unwrap();
        // ℓ_q nesting in the level index
        prop_assert!(besov_norm(&c, alpha, p, q + dq).unwrap() <= base * (1.0 + 1e-12));
        prop_assert!(besov_norm(&c, alpha, p, f64::INFINITY).unwrap() <= base * (1.0 + 1e-12));
        // ℓ_p nesting with the smoothness shift that keeps the level weight
        let p2 = p + dp;
        let alpha2 = alpha - 1.0 / p + 1.0 / p2;
        prop_assume!(alpha2 > 0.0);
        prop_assert!(besov_norm(&c, alpha2, p2, q).unwrap() <= base * (1.0 + 1e-12));
    }

    #[test]
    fn kl_nonnegative(f in piecewise(), scale in prop::collection::vec(0.1f64..4.0, 5)) {
        prop_assert!(kl_divergence(&f, &f).unwrap().abs() < 1e-12);
        let pieces = pieces_of(&f);
        let m = pieces.len();
        let g = Intensity::piecewise(
            pieces
                .into_iter()
                .enumerate()
                .map(|(i, p)| PieceSpec { coeffs: p.coeffs.iter().map(|c| c * scale[i]).collect(), ..p })
                .collect(),
        )
        .unwrap();
        let d = kl_divergence(&f, &g).unwrap();
        prop_assert!(d >= -1e-12, "{}", d);
        if scale.iter().take(m).any(|s| (s - 1.0).abs() > 1e-3) {
            prop_assert!(d > 0.0);
        }
    }

    #[test]
    fn oracle_sum_below_bound(beta in 0.05f64..0.45, e in 3u32..14) {
        let f = Intensity::power_spike(beta).unwrap();
        let n = 1u64 << e;
        let h = WaveletBasis::haar();
        let j0 = level_cutoff(n, 1.0, -1.0).unwrap();
        let t = oracle_risk(&f, n, j0, &h, j0 + 4).unwrap();
        prop_assert!(t.oracle_sum <= t.log_oracle_sum);
        prop_assert!(t.oracle_sum <= t.bound_main());
        prop_assert!(t.beyond <= t.beyond_bound.unwrap() * (1.0 + 1e-9) + 1e-15);
    }

    #[test]
    fn coefficient_csv_round_trip(records in prop::collection::vec(record(), 0..30)) {
        let mut buf = Vec::new();
        write_coefficients(&mut buf, &records).unwrap();
        prop_assert_eq!(read_coefficients(&buf[..]).unwrap(), records);
    }

    #[test]
    fn risk_csv_round_trip(vals in prop::collection::vec(any::<f64>().prop_filter("finite", |x| x.is_finite()), 5), n in 2u64..1 << 40, r in 2usize..100000) {
        let row = RiskRow { n, replicates: r, mc_risk: vals[0], mc_se: vals[1], oracle_sum: vals[2], bound_main: vals[3], ratio: vals[4] };
        let mut buf = Vec::new();
        write_risk(&mut buf, &[row]).unwrap();
        prop_assert_eq!(read_risk(&buf[..]).unwrap(), vec![row]);
    }
}

fn pieces_of(f: &Intensity) -> Vec<PieceSpec> {
    match f.spec() {
        poisson_wavelet::IntensitySpec::Piecewise { pieces } => pieces.clone(),
        _ => unreachable!(),
    }
}

//! Kullback–Leibler divergence between Poisson processes with intensities
//! `s` and `s'`: `∫ s (s'/s - ln(s'/s) - 1)`.

use crate::error::{Error, Result};
use crate::intensity::Intensity;
use crate::quad;

pub fn kl_divergence(s: &Intensity, s_prime: &Intensity) -> Result<f64> {
    let mut pts: Vec<f64> = s
        .breakpoints()
        .into_iter()
        .chain(s_prime.breakpoints())
        .collect();
    pts.sort_by(f64::total_cmp);
    pts.dedup();

    let mut mass_gap = 0.0;
    let mut log_term = 0.0;
    for w in pts.windows(2) {
        let (u, v) = (w[0], w[1]);
        let ms = s.integrate_interval(u, v);
        let mp = s_prime.integrate_interval(u, v);
        mass_gap += mp - ms;
        if ms == 0.0 {
            continue;
        }
        if mp == 0.0 {
            return Err(Error::SupportViolation { a: u, b: v });
        }
        let mid = 0.5 * (u + v);
        log_term += match (s.constant_on(mid), s_prime.constant_on(mid)) {
            (Some(a), Some(b)) => a * (b / a).ln() * (v - u),
            _ => {
                let g = |x: f64| {
                    let a = s.eval(x);
                    if a == 0.0 {
                        return 0.0;
                    }
                    a * (s_prime.eval(x) / a).ln()
                };
                quad::integrate(g, u, v, 1e-13 * (ms + mp))
            }
        };
    }
    Ok((mass_gap - log_term).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_cases() {
        let one = Intensity::constant(0.0, 1.0, 1.0).unwrap();
        let two = Intensity::constant(0.0, 1.0, 2.0).unwrap();
        assert_eq!(kl_divergence(&one, &one).unwrap(), 0.0);
        let k = kl_divergence(&one, &two).unwrap();
        assert!((k - (1.0 - 2f64.ln())).abs() < 1e-12);
        assert!((k - 0.306_852_819_44).abs() < 1e-11);
    }

    #[test]
    fn support_violation() {
        let wide = Intensity::constant(0.0, 2.0, 1.0).unwrap();
        let narrow = Intensity::constant(0.0, 1.0, 1.0).unwrap();
        assert!(matches!(
            kl_divergence(&wide, &narrow),
            Err(Error::SupportViolation { .. })
        ));
        // s = 0 where s' > 0 only adds ∫ s'
        let k = kl_divergence(&narrow, &wide).unwrap();
        assert!((k - 1.0).abs() < 1e-15);
    }

    #[test]
    fn spike_against_constant() {
        let spike = Intensity::power_spike(0.25).unwrap();
        let one = Intensity::constant(0.0, 1.0, 1.0).unwrap();
        // 1 - ∫ s - ∫ s ln(1/s) = 1 - 1/p + β/p²
        let beta = 0.25f64;
        let p = 1.0 - beta;
        let expected = 1.0 - 1.0 / p + beta / (p * p);
        let k = kl_divergence(&spike, &one).unwrap();
        assert!((k - expected).abs() < 1e-10, "{k} vs {expected}");
        assert!(k >= 0.0);
    }
}

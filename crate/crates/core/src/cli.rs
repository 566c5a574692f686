//! Command-line front end.
//!
//! Settings are resolved per field as: flag, then `--config` document, then
//! built-in default. The seed additionally falls back to the
//! `POISSON_WAVELET_SEED` environment variable before the default of 0.

use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::analysis::{
    besov_norm, coefficient_sigma_pairs, kl_divergence, log_grid, mc_risk, rate_study,
    spike_tail_bound, spike_weak_besov_radius, true_coefficients, weak_besov_radius, RiskSettings,
};
use crate::basis::{BasisSpec, LambdaIndex, DEFAULT_J_GRID};
use crate::config::ExperimentConfig;
use crate::error::{Error, Result};
use crate::estimator::{estimate, reconstruct, DyadicGrid, EstimatorConfig};
use crate::intensity::{Intensity, IntensitySpec, PieceSpec};
use crate::io::{fmt_f64, read_events, write_coefficients, write_events, write_rate, write_risk};
use crate::montecarlo::Parallelism;
use crate::process::{exponential_inequality_check, simulate, tail_check};

pub const SEED_ENV: &str = "POISSON_WAVELET_SEED";

#[derive(Debug, Parser)]
#[command(
    name = "poisson-wavelet",
    version,
    about = "Wavelet thresholding for Poisson intensities"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw one realization and write it as an event file.
    Simulate(Common),
    /// Write every nonzero empirical coefficient with its threshold.
    Coeffs(Common),
    /// Write the kept coefficients, optionally reconstructing on a grid.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Write `x,f_hat` samples of the estimate to this path.
        #[arg(long)]
        recon: Option<PathBuf>,
        /// Grid spacing 2^-level for `--recon`.
        #[arg(long, default_value_t = 10)]
        recon_level: u32,
    },
    /// Monte Carlo risk against the oracle bound, one row per n.
    Risk(Common),
    /// Risk over a list of n with a fitted rate exponent.
    Rate(Common),
    /// Besov and weak-Besov functionals of the true coefficients.
    Classcheck(Common),
    /// Kullback-Leibler divergence between two intensities.
    Kl {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        intensity_prime: Option<String>,
    },
    /// Empirical exceedance frequencies against the exponential bounds.
    Tailcheck(Common),
}

#[derive(Debug, Clone, Default, Args)]
pub struct Common {
    /// JSON experiment config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Intensity: JSON, `uniform`, `triangle`, `spike:<beta>` or `const:<c>`.
    #[arg(long)]
    pub intensity: Option<String>,
    #[arg(long)]
    pub events: Option<PathBuf>,
    #[arg(long)]
    pub n: Option<u64>,
    /// Comma-separated sample sizes.
    #[arg(long, value_delimiter = ',')]
    pub n_list: Option<Vec<u64>>,
    #[arg(long, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub c: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub cprime: Option<f64>,
    /// `haar`, `cdf13` or `cdf15`.
    #[arg(long)]
    pub basis: Option<String>,
    #[arg(long)]
    pub j_grid: Option<u32>,
    #[arg(long)]
    pub replicates: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, allow_negative_numbers = true)]
    pub tail_j: Option<i32>,
    #[arg(long)]
    pub threads: Option<usize>,
    /// Output path; stdout when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long)]
    pub s: Option<f64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long)]
    pub q: Option<f64>,
}

/// Flags merged over the config document.
struct Settings {
    cfg: ExperimentConfig,
    estimator: EstimatorConfig,
    seed: u64,
    parallelism: Parallelism,
}

fn parse_intensity(text: &str) -> Result<IntensitySpec> {
    let t = text.trim();
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| Error::Config(format!("intensity: {e}")));
    }
    let unit = |coeffs: Vec<f64>| IntensitySpec::Piecewise {
        pieces: vec![PieceSpec {
            a: 0.0,
            b: 1.0,
            coeffs,
        }],
    };
    let number = |v: &str| {
        v.parse::<f64>()
            .map_err(|_| Error::InvalidArgument(format!("bad number in intensity '{t}'")))
    };
    match t.split_once(':') {
        None if t == "uniform" => Ok(unit(vec![1.0])),
        None if t == "triangle" => Ok(unit(vec![0.0, 2.0])),
        Some(("spike", b)) => Ok(IntensitySpec::PowerSpike { beta: number(b)? }),
        Some(("const", c)) => Ok(unit(vec![number(c)?])),
        _ => Err(Error::InvalidArgument(format!(
            "unknown intensity '{t}' (use JSON, uniform, triangle, spike:<beta> or const:<c>)"
        ))),
    }
}

fn resolve(common: &Common) -> Result<Settings> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::load(p)?,
        None => ExperimentConfig::default(),
    };
    if let Some(i) = &common.intensity {
        cfg.intensity = Some(parse_intensity(i)?);
    }
    macro_rules! over {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = common.$flag.clone() { cfg.$field = Some(v); })*
        };
    }
    over!(events => events, n => n, n_list => n_list, gamma => gamma, c => c,
          cprime => c_prime, j_grid => j_grid, replicates => replicates,
          tail_j => tail_j, threads => threads, out => out, s => s,
          alpha => alpha, p => p, q => q, seed => seed);
    if let Some(b) = &common.basis {
        cfg.basis = Some(b.parse::<BasisSpec>()?);
    }
    let seed = match cfg.seed {
        Some(s) => s,
        None => match std::env::var(SEED_ENV) {
            Ok(v) => v.trim().parse().map_err(|_| {
                Error::InvalidArgument(format!("{SEED_ENV}='{v}' is not a 64-bit seed"))
            })?,
            Err(_) => 0,
        },
    };
    let estimator = EstimatorConfig {
        gamma: cfg.gamma.unwrap_or(1.5),
        c: cfg.c.unwrap_or(1.0),
        c_prime: cfg.c_prime.unwrap_or(-1.0),
        basis: cfg.basis.clone().unwrap_or_default(),
        j_grid: cfg.j_grid.unwrap_or(DEFAULT_J_GRID),
    };
    estimator.validate()?;
    let parallelism = Parallelism(cfg.threads);
    Ok(Settings {
        cfg,
        estimator,
        seed,
        parallelism,
    })
}

impl Settings {
    fn intensity(&self) -> Result<Intensity> {
        let spec = self.cfg.intensity.clone().ok_or_else(|| {
            Error::InvalidArgument("an intensity is required (--intensity or config)".into())
        })?;
        Intensity::from_spec(spec)
    }

    fn n(&self) -> Result<u64> {
        self.cfg
            .n
            .ok_or_else(|| Error::InvalidArgument("--n is required".into()))
    }

    fn n_list(&self) -> Result<Vec<u64>> {
        match (&self.cfg.n_list, self.cfg.n) {
            (Some(l), _) => Ok(l.clone()),
            (None, Some(n)) => Ok(vec![n]),
            (None, None) => Err(Error::InvalidArgument(
                "--n-list (or --n) is required".into(),
            )),
        }
    }

    fn risk_settings(&self, default_replicates: usize) -> RiskSettings {
        RiskSettings {
            replicates: self.cfg.replicates.unwrap_or(default_replicates),
            seed: self.seed,
            tail_j: self.cfg.tail_j,
            parallelism: self.parallelism,
            ..Default::default()
        }
    }

    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match &self.cfg.out {
            Some(p) => std::fs::write(p, bytes)?,
            None => std::io::stdout().write_all(bytes)?,
        }
        Ok(())
    }
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => {
            let s = resolve(&c)?;
            let sample = simulate(&s.intensity()?, s.n()?, s.seed)?;
            let mut buf = Vec::new();
            write_events(&mut buf, &sample)?;
            s.emit(&buf)
        }
        Command::Coeffs(c) => {
            let s = resolve(&c)?;
            let (est, _) = estimate_from_events(&s)?;
            let mut buf = Vec::new();
            write_coefficients(&mut buf, est.records())?;
            s.emit(&buf)
        }
        Command::Estimate {
            common,
            recon,
            recon_level,
        } => {
            let s = resolve(&common)?;
            let (est, basis) = estimate_from_events(&s)?;
            let kept: Vec<_> = est.kept().copied().collect();
            let mut buf = Vec::new();
            write_coefficients(&mut buf, &kept)?;
            if let Some(path) = recon {
                let (lo, hi) = kept
                    .iter()
                    .map(|r| basis.recon_support(r.lambda))
                    .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), (u, v)| {
                        (a.min(u), b.max(v))
                    });
                let grid = if lo < hi {
                    DyadicGrid::covering(lo, hi, recon_level)
                } else {
                    DyadicGrid::covering(0.0, 0.0, recon_level)
                };
                let mut out = b"x,f_hat\n".to_vec();
                for (x, y) in reconstruct(&est, &basis, &grid)? {
                    writeln!(out, "{},{}", fmt_f64(x), fmt_f64(y))?;
                }
                std::fs::write(path, out)?;
            }
            s.emit(&buf)
        }
        Command::Risk(c) => {
            let s = resolve(&c)?;
            let f = s.intensity()?;
            let basis = s.estimator.build_basis()?;
            let settings = s.risk_settings(500);
            let rows = s
                .n_list()?
                .into_iter()
                .map(|n| mc_risk(&f, n, &s.estimator, &basis, &settings).map(|r| r.row()))
                .collect::<Result<Vec<_>>>()?;
            let mut buf = Vec::new();
            write_risk(&mut buf, &rows)?;
            s.emit(&buf)
        }
        Command::Rate(c) => {
            let s = resolve(&c)?;
            let f = s.intensity()?;
            let basis = s.estimator.build_basis()?;
            let study = rate_study(
                &f,
                &s.n_list()?,
                &s.estimator,
                &basis,
                &s.risk_settings(500),
            )?;
            let mut buf = Vec::new();
            write_rate(&mut buf, &study)?;
            s.emit(&buf)
        }
        Command::Classcheck(c) => {
            let s = resolve(&c)?;
            classcheck(&s)
        }
        Command::Kl {
            common,
            intensity_prime,
        } => {
            let mut s = resolve(&common)?;
            if let Some(i) = intensity_prime {
                s.cfg.intensity_prime = Some(parse_intensity(&i)?);
            }
            let f = s.intensity()?;
            let g =
                Intensity::from_spec(s.cfg.intensity_prime.clone().ok_or_else(|| {
                    Error::InvalidArgument("--intensity-prime is required".into())
                })?)?;
            let k = kl_divergence(&f, &g)?;
            s.emit(format!("{}\n", fmt_f64(k)).as_bytes())
        }
        Command::Tailcheck(c) => {
            let s = resolve(&c)?;
            tailcheck(&s)
        }
    }
}

fn estimate_from_events(
    s: &Settings,
) -> Result<(
    crate::estimator::ThresholdedEstimate,
    crate::basis::WaveletBasis,
)> {
    let path = s
        .cfg
        .events
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("--events is required".into()))?;
    let sample = read_events(path, s.n()?)?;
    let basis = s.estimator.build_basis()?;
    Ok((estimate(&sample, &s.estimator, &basis)?, basis))
}

fn classcheck(s: &Settings) -> Result<()> {
    let f = s.intensity()?;
    let basis = s.estimator.build_basis()?;
    let level = s.cfg.tail_j.unwrap_or(12);
    if level < 0 {
        return Err(Error::InvalidArgument("--tail-j must be >= 0".into()));
    }
    let sw = s.cfg.s.unwrap_or(0.1);
    let (alpha, p, q) = (
        s.cfg.alpha.unwrap_or(1.0),
        s.cfg.p.unwrap_or(2.0),
        s.cfg.q.unwrap_or(2.0),
    );
    let grid = log_grid(1e-8, 1e2, 201);
    let weak = match f.spike_beta() {
        Some(b) if basis.is_haar() => spike_weak_besov_radius(b, sw, level, &grid)?,
        _ => weak_besov_radius(&coefficient_sigma_pairs(&f, &basis, level), sw, &grid)?,
    };
    let besov = besov_norm(&true_coefficients(&f, &basis, -1, level), alpha, p, q)?;
    let mut out = b"quantity,value\n".to_vec();
    let mut row = |k: &str, v: f64| writeln!(out, "{k},{}", fmt_f64(v));
    row("truncation_level", level as f64)?;
    row("besov_alpha", alpha)?;
    row("besov_p", p)?;
    row("besov_q", q)?;
    row("besov_norm", besov)?;
    row("weak_besov_s", sw)?;
    row("weak_besov_sup", weak.exact)?;
    row("weak_besov_radius", weak.radius)?;
    row("weak_besov_argmax_t", weak.argmax_t)?;
    row("weak_besov_grid_max", weak.grid_max)?;
    if let (Some(b), true) = (f.spike_beta(), basis.is_haar()) {
        row("tail_energy_bound", spike_tail_bound(b, level))?;
    }
    s.emit(&out)
}

fn tailcheck(s: &Settings) -> Result<()> {
    let f = s.intensity()?;
    let n = s.n()?;
    let basis = s.estimator.build_basis()?;
    let replicates = s.cfg.replicates.unwrap_or(10_000);
    let lambdas = [
        LambdaIndex::scaling(0),
        LambdaIndex::new(0, 0),
        LambdaIndex::new(3, 2),
    ];
    let mut out = b"check,j,k,u,exceedances,replicates,frequency,bound,se\n".to_vec();
    for (li, &l) in lambdas.iter().enumerate() {
        for (ui, u) in [1.0, 2.0, 3.0].into_iter().enumerate() {
            let seed = crate::montecarlo::mix_seed(s.seed, (li * 3 + ui) as u64);
            let g = basis.analysis_fn(l);
            let reports = [
                (
                    "exponential",
                    exponential_inequality_check(&f, n, &g, u, replicates, seed, s.parallelism)?,
                ),
                (
                    "coefficient",
                    tail_check(&f, n, &basis, l, u, replicates, seed, s.parallelism)?,
                ),
            ];
            for (name, r) in reports {
                writeln!(
                    out,
                    "{name},{},{},{},{},{},{},{},{}",
                    l.j,
                    l.k,
                    fmt_f64(u),
                    r.exceedances,
                    r.replicates,
                    fmt_f64(r.frequency),
                    fmt_f64(r.bound),
                    fmt_f64(r.se)
                )?;
            }
        }
    }
    s.emit(&out)
}

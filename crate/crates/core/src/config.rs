//! Experiment configuration: one strict JSON document. Every field is
//! optional; command-line flags override what is set here.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::basis::BasisSpec;
use crate::error::{Error, Result};
use crate::intensity::IntensitySpec;

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub intensity: Option<IntensitySpec>,
    /// Second intensity for divergence runs.
    pub intensity_prime: Option<IntensitySpec>,
    pub n: Option<u64>,
    pub n_list: Option<Vec<u64>>,
    pub gamma: Option<f64>,
    pub c: Option<f64>,
    pub c_prime: Option<f64>,
    pub basis: Option<BasisSpec>,
    pub j_grid: Option<u32>,
    pub replicates: Option<usize>,
    pub seed: Option<u64>,
    pub tail_j: Option<i32>,
    pub threads: Option<usize>,
    pub events: Option<PathBuf>,
    pub out: Option<PathBuf>,
    /// Weak-Besov exponent for class checks.
    pub s: Option<f64>,
    pub alpha: Option<f64>,
    pub p: Option<f64>,
    pub q: Option<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

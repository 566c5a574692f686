//! Wavelet-thresholding estimation of Poisson process intensities with
//! data-driven thresholds, and a harness for checking its risk behaviour.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analysis;
pub mod basis;
pub mod cli;
pub mod config;
pub mod error;
pub mod estimator;
pub mod intensity;
pub mod io;
pub mod montecarlo;
pub mod process;
pub mod quad;
pub mod step;

pub use basis::{BasisSpec, LambdaIndex, Side, WaveletBasis};
pub use error::{Error, Result};
pub use estimator::{estimate, EstimatorConfig, ThresholdedEstimate};
pub use intensity::{Intensity, IntensitySpec};
pub use process::PointSample;
pub use step::StepFunction;

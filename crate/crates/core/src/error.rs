use std::path::PathBuf;

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid intensity model: {0}")]
    InvalidModel(String),

    #[error("invalid level cutoff: n^c (log n)^c' = {target} (n = {n}, c = {c}, c' = {c_prime})")]
    InvalidCutoff {
        n: u64,
        c: f64,
        c_prime: f64,
        target: f64,
    },

    #[error("x = {x} is not on the dyadic reconstruction grid of resolution 2^-{level}")]
    GridResolution { x: f64, level: u32 },

    #[error("exhaustive model selection limited to {max} records, got {got}")]
    TooManyRecords { got: usize, max: usize },

    #[error("support violation: s > 0 while s' = 0 on [{a}, {b}]")]
    SupportViolation { a: f64, b: f64 },

    #[error("invalid basis: {0}")]
    InvalidBasis(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{path}:{line}: {msg}")]
    Parse {
        path: PathBuf,
        line: usize,
        msg: String,
    },

    #[error("{schema} v{version}: {detail}")]
    Format {
        schema: &'static str,
        version: u32,
        detail: String,
    },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Short stable tag used in the CLI's one-line error output.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidModel(_) => "invalid-model",
            Error::InvalidCutoff { .. } => "invalid-cutoff",
            Error::GridResolution { .. } => "grid-resolution",
            Error::TooManyRecords { .. } => "too-many-records",
            Error::SupportViolation { .. } => "support-violation",
            Error::InvalidBasis(_) => "invalid-basis",
            Error::InvalidArgument(_) => "invalid-argument",
            Error::Parse { .. } => "parse",
            Error::Format { .. } => "format",
            Error::Config(_) => "config",
            Error::Io(_) => "io",
        }
    }
}

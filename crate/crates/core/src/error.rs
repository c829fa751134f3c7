use std::path::PathBuf;

use thiserror::Error;

use crate::io::config::ConfigError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("grid needs an even node count of at least {min}, got {n}")]
    InvalidNodeCount { n: usize, min: usize },

    #[error("domain length must be positive and finite, got {0}")]
    InvalidLength(f64),

    #[error("non-finite sample at node {index}")]
    NonFinite { index: usize },

    #[error("derivative order must be at least 1")]
    ZeroOrder,

    #[error("grid functions live on different grids")]
    GridMismatch,

    #[error("integrand has mean {integral:e}, above tolerance {tolerance:e}; no periodic primitive exists")]
    MeanNotZero { integral: f64, tolerance: f64 },

    #[error("winding number must be nonzero")]
    ZeroWinding,

    #[error("perturbation mode must be at least 1, got {0}")]
    InvalidMode(i64),

    #[error("curvature integrates to winding {measured}, stored winding is {expected}")]
    WindingMismatch { expected: i64, measured: f64 },

    #[error("blowup at t = {t}: sup |k| = {k_sup}")]
    Blowup { t: f64, k_sup: f64 },

    #[error("invalid integrator setting `{0}`")]
    InvalidIntegrator(&'static str),

    #[error("fit window contains fewer than two samples")]
    EmptyWindow,

    #[error("energy {energy:e} at t = {t} is not positive; log-linear fit undefined")]
    NonPositiveEnergy { t: f64, energy: f64 },

    #[error("monomial exponent p = {p} is not below 2")]
    RegimeViolation { p: f64 },

    #[error("invalid monomial: {0}")]
    InvalidMonomial(String),

    #[error("need at least {min} samples, got {got}")]
    TooFewSamples { min: usize, got: usize },

    #[error("{} configuration error(s): {}", .0.len(), join_config_errors(.0))]
    Config(Vec<ConfigError>),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("malformed samples file {path}: {reason}")]
    SamplesFile { path: PathBuf, reason: String },

    #[error("{0} batch run(s) could not start or write their output")]
    BatchRuns(usize),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}

fn join_config_errors(errors: &[ConfigError]) -> String {
    errors
        .iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

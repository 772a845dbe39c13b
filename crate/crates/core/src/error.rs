use std::path::PathBuf;

use thiserror::Error;

use crate::spectral::HeuristicScan;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("I/O error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("parse error at row {row}, column {column}: {message}")]
    Parse {
        row: usize,
        column: usize,
        message: String,
    },

    #[error("shape error: {0}")]
    Shape(String),

    #[error("signal too short: need at least {needed} samples, got {got}")]
    TooShort { needed: usize, got: usize },

    #[error("non-finite value in channel {channel} at sample {sample}")]
    NonFinite { channel: usize, sample: usize },

    #[error("unsupported format: {0}")]
    UnsupportedFormat(String),

    #[error("arity error: {0}")]
    Arity(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("degenerate entropy: channel is constant")]
    DegenerateEntropy,

    #[error("objective evaluation produced a non-finite value: {0}")]
    Evaluation(String),

    #[error("at angle {angle_deg} deg: {source}")]
    AtAngle {
        angle_deg: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("trivial-kernel: eigenvalue gap {gap:e} is below threshold {threshold:e}")]
    TrivialKernel { gap: f64, threshold: f64 },

    #[error("no-valid-kernel: every candidate shift around omega0 = {:.4} is degenerate", .0.argmin_omega0)]
    NoValidKernel(Box<HeuristicScan>),

    #[error("trivial-lag: lagged covariances are indistinguishable from a multiple of the identity ({0})")]
    TrivialLag(String),

    #[error("range error: {0}")]
    Range(String),

    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors that signal a violated separation assumption rather than bad input.
    pub fn is_degeneracy(&self) -> bool {
        match self {
            Error::DegenerateInput(_)
            | Error::DegenerateEntropy
            | Error::TrivialKernel { .. }
            | Error::NoValidKernel(_)
            | Error::TrivialLag(_)
            | Error::Evaluation(_) => true,
            Error::AtAngle { source, .. } => source.is_degeneracy(),
            _ => false,
        }
    }
}

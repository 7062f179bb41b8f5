use std::path::PathBuf;

use thiserror::Error;

/// Errors raised anywhere in the detection laboratory.
#[derive(Debug, Error)]
pub enum Error {
    #[error("matrix is rank deficient (diagonal ratio {ratio:e})")]
    RankDeficient { ratio: f64 },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("non-finite value in {0}")]
    NonFinite(&'static str),

    #[error("{0} did not converge")]
    NonConvergence(&'static str),

    #[error("invalid constellation order {order} for {kind}")]
    InvalidOrder { kind: &'static str, order: usize },

    #[error("column {0} of the channel is zero")]
    ZeroColumn(usize),

    #[error("search space of {size} candidates exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: f64, cap: u64 },

    #[error("sphere radius grew beyond {0}x the initial value without finding a lattice point")]
    RestartOverflow(f64),

    #[error("only {observed} error events observed, at least {required} required")]
    InsufficientTrials { observed: u64, required: u64 },

    #[error("symbol error rate {ser} must lie in (0, {beta})")]
    InvalidSer { ser: f64, beta: f64 },

    #[error("conditioning cell holds {observed} samples, at least {required} required")]
    InsufficientBinOccupancy { observed: usize, required: usize },

    #[error("threshold table does not match the model: {0}")]
    TableMismatch(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("failed to parse {path}: {message}")]
    Parse { path: PathBuf, message: String },

    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

impl Error {
    /// Errors caused by bad user input rather than a failed computation.
    pub fn is_validation(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::TableMismatch(_)
                | Error::Parse { .. }
                | Error::InvalidOrder { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;

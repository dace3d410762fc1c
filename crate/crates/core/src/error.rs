use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("placement failed after {attempts} attempts: {what}")]
    Geometry { what: String, attempts: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("numerical failure: {0}")]
    Numerical(String),

    #[error("power iteration did not converge after {iterations} iterations (residual {residual:e})")]
    NoConvergence {
        iterations: usize,
        residual: f64,
        last: Box<crate::spectral::PfEigenpair>,
    },

    #[error("rates are not jointly achievable: {0}")]
    InfeasibleRate(String),

    #[error("search space of {size} power-solver calls exceeds the cap of {cap}")]
    SearchSpaceTooLarge { size: u128, cap: usize },

    #[error("scheme refused: {0}")]
    Refused(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("csv: {0}")]
    Csv(#[from] csv::Error),

    #[error("config file: {0}")]
    Toml(#[from] toml::de::Error),
}

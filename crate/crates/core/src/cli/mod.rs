//! Command-line driver: configuration, the `optimize`, `rate`, `solve`,
//! `gridify` and `oracle` commands, and their CSV outputs.

mod commands;
mod config;
mod gridify;

pub use commands::{
    ball_oracle_csv, cmd_optimize, cmd_oracle_ball, cmd_rate_curves, cmd_solve, coefficient_scales,
    coefficient_table, configured_params, crop_potential, optimize_transmission, rate_band,
    reference_band, solve_problem, BallOracle, BallProbe, OptimizeReport, OptimizedTransmission,
    SolveOutcome, SweepRow, REFERENCE_OO0,
};
pub use config::{
    AnomalyConfig, AnomalyKind, GridConfig, OptimizerConfig, RunConfig, SolverConfig,
    TransmissionConfig,
};
pub use gridify::{gridify, GridificationPlan, KernelKind, DEFAULT_WARP};

use thiserror::Error;

use crate::cmaes::CmaesError;
use crate::linalg::LinalgError;
use crate::model::ModelError;
use crate::rate::RateError;
use crate::schwarz::SchwarzError;

pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_DIVERGED: i32 = 2;
pub const EXIT_CONFIG: i32 = 3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("solver did not converge: {0}")]
    Diverged(String),
    #[error("optimizer failed: {0}")]
    Optimizer(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Rate(#[from] RateError),
    #[error(transparent)]
    Cmaes(#[from] CmaesError),
    #[error(transparent)]
    Schwarz(SchwarzError),
}

impl From<SchwarzError> for CliError {
    fn from(e: SchwarzError) -> Self {
        match e {
            SchwarzError::Diverged { .. } => CliError::Diverged(e.to_string()),
            SchwarzError::IllPosed(_) | SchwarzError::Partition(_) | SchwarzError::InvalidConfig(_)
            | SchwarzError::Unsupported(_) => CliError::Config(e.to_string()),
            other => CliError::Schwarz(other),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Rate(_) => EXIT_CONFIG,
            CliError::Diverged(_) => EXIT_DIVERGED,
            _ => EXIT_FAILURE,
        }
    }
}

/// Parses `KMIN:KMAX`.
pub fn parse_band(s: &str) -> Result<(f64, f64), CliError> {
    let err = || CliError::Config(format!("band must look like KMIN:KMAX, got `{s}`"));
    let (a, b) = s.split_once(':').ok_or_else(err)?;
    Ok((a.trim().parse().map_err(|_| err())?, b.trim().parse().map_err(|_| err())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn band_flag() {
        assert_eq!(parse_band("1:100").unwrap(), (1.0, 100.0));
        assert_eq!(parse_band("0.0174 : 1.9164").unwrap(), (0.0174, 1.9164));
        assert!(parse_band("1-100").is_err());
        assert!(parse_band("a:b").is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(CliError::Config("x".into()).exit_code(), 3);
        assert_eq!(CliError::Diverged("x".into()).exit_code(), 2);
        let e: CliError = SchwarzError::Diverged { iterations: 3, residual: 2.0 }.into();
        assert_eq!(e.exit_code(), 2);
        let e: CliError = SchwarzError::IllPosed("p=q=0".into()).into();
        assert_eq!(e.exit_code(), 3);
        let e: CliError = std::io::Error::other("disk").into();
        assert_eq!(e.exit_code(), 1);
    }
}

//! Grids, density anomalies, Poisson assembly and the analytic gravity
//! oracles.

mod density;
mod gravity;
mod grid;
mod poisson;

pub use density::{
    crater_profile, load_density_grid, parse_density_grid, synthetic_crater_anomaly,
    uniform_ball_anomaly, write_grid_csv, DensityField,
};
pub use gravity::{
    direct_integration_potential, point_mass_potential, DirectIntegration, GRAVITY_CONSTANT,
};
pub use grid::{make_grid, Axis, Grid};
pub(crate) use poisson::inverse_square_spacings;
pub use poisson::{
    assemble_poisson, assemble_poisson_with_forcing, laplacian_matrix, padded_potential, DofMap,
    NodalField,
    PoissonProblem, PoissonSystem,
};

use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("grid too small: {0}")]
    GridTooSmall(String),
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("field has {found} cells, grid expects {expected}")]
    FieldSize { expected: usize, found: usize },
    #[error("density grid line {line}: {message}")]
    Ingest { line: usize, message: String },
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

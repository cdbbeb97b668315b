//! Non-overlapping optimized Schwarz iteration on x-direction slabs.

mod dtn;
mod exchange;
mod partition;
mod solve;
mod subdomain;

pub use dtn::{exact_dtn_transmission, MAX_DTN_PLANE};
pub use exchange::{exchange_interface_data, InterfaceData};
pub use partition::{partition_x, Interface, Partition};
pub use solve::{
    build_subdomains, schwarz_solve, OuterStop, SchwarzConfig, SchwarzReport, SubdomainStats,
    Transmission,
};
pub(crate) use subdomain::assemble_with_operators;
pub use subdomain::{
    assemble_subdomain, robin_operators, InterfaceOperator, InterfacePlane, InterfaceSide,
    SubdomainSystem,
};

use thiserror::Error;

use crate::linalg::LinalgError;
use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum SchwarzError {
    #[error("invalid partition: {0}")]
    Partition(String),
    #[error("ill-posed transmission conditions: {0}")]
    IllPosed(String),
    #[error("interface vector has length {found}, expected {expected}")]
    InterfaceSize { expected: usize, found: usize },
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("outer iteration diverged at iteration {iterations} (relative residual {residual:e})")]
    Diverged { iterations: usize, residual: f64 },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

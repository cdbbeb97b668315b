//! Sparse linear algebra kernels and the Jacobi-preconditioned conjugate
//! gradient solver used for every subdomain and monolithic solve.

mod csr;
mod matrix_market;
mod pcg;

pub use csr::{spmv, CsrMatrix};
pub use matrix_market::{read_matrix_market, write_matrix_market};
pub use pcg::{pcg, pcg_with_guess, PcgConfig, SolveStats};

use thiserror::Error;

/// Dense right-hand sides, iterates and residuals.
pub type DenseVector = Vec<f64>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LinalgError {
    #[error("entry ({row}, {col}) out of range for a {nrows}x{ncols} matrix")]
    IndexOutOfRange {
        row: usize,
        col: usize,
        nrows: usize,
        ncols: usize,
    },
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("matrix is not square ({nrows}x{ncols})")]
    NotSquare { nrows: usize, ncols: usize },
    #[error("diagonal preconditioner failure: entry {row} is {value}")]
    NonPositiveDiagonal { row: usize, value: f64 },
    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),
    #[error("matrix market: {0}")]
    MatrixMarket(String),
}

fn check_len(expected: usize, found: usize) -> Result<(), LinalgError> {
    if expected != found {
        return Err(LinalgError::DimensionMismatch { expected, found });
    }
    Ok(())
}

/// `alpha * x + y`.
pub fn daxpy(alpha: f64, x: &[f64], y: &[f64]) -> Result<DenseVector, LinalgError> {
    check_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(xi, yi)| alpha * xi + yi).collect())
}

/// In-place `y += alpha * x`.
pub fn daxpy_in_place(alpha: f64, x: &[f64], y: &mut [f64]) -> Result<(), LinalgError> {
    check_len(x.len(), y.len())?;
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
    Ok(())
}

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64, LinalgError> {
    check_len(x.len(), y.len())?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

//! Optimized Schwarz domain decomposition for gravimetric Poisson problems.
//!
//! The Robin transmission coefficients of the non-overlapping Schwarz
//! iteration are tuned by CMA-ES against the Fourier convergence factor of
//! the two-subdomain Laplace problem, then used to solve `-Δ Φ = 4πG δρ` on
//! x-direction slabs with Jacobi-preconditioned CG subdomain solves.

pub mod cli;
pub mod cmaes;
pub mod linalg;
pub mod model;
pub mod rate;
pub mod schwarz;

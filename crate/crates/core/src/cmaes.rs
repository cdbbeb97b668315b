//! Covariance Matrix Adaptation Evolution Strategy.
//!
//! Standard (μ/μ_w, λ) CMA-ES with log-rank recombination weights,
//! cumulative step-size adaptation and rank-one plus rank-μ covariance
//! updates, with learning rates set from the search dimension.
//!
//! Sampling is reproducible: generation `g` draws its normals from a
//! ChaCha8 stream seeded with `rng_seed` and positioned on stream `g`, so a
//! population depends only on `(seed, generation, state)`.

use std::error::Error as StdError;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use thiserror::Error;

pub type BoxError = Box<dyn StdError + Send + Sync>;

#[derive(Debug, Error)]
pub enum CmaesError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("dimension mismatch: state has dimension {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("covariance factorization failed at generation {generation}: {detail}")]
    Factorization { generation: usize, detail: String },
    #[error("objective failed at generation {generation}: {source}")]
    Objective { generation: usize, source: BoxError },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CmaEsConfig {
    pub population_size: usize,
    /// Defaults to `population_size / 2`.
    pub parent_count: Option<usize>,
    pub initial_mean: Vec<f64>,
    pub initial_step_size: f64,
    pub max_iterations: usize,
    /// Threshold on the spread of recent best values and of the current
    /// population's values.
    pub f_tolerance: f64,
    /// Stop once `σ √λ_max(C)` falls below this.
    pub x_tolerance: f64,
    pub rng_seed: u64,
}

impl CmaEsConfig {
    pub fn new(initial_mean: Vec<f64>, initial_step_size: f64, rng_seed: u64) -> Self {
        Self {
            population_size: 25,
            parent_count: None,
            initial_mean,
            initial_step_size,
            max_iterations: 7200,
            f_tolerance: 5e-11,
            x_tolerance: 1e-14,
            rng_seed,
        }
    }

    pub fn parents(&self) -> usize {
        self.parent_count.unwrap_or(self.population_size / 2)
    }

    /// Normalized weights `w_i ∝ ln(μ + ½) − ln i`, `i = 1..=μ`.
    pub fn weights(&self) -> Vec<f64> {
        let mu = self.parents();
        let raw: Vec<f64> = (1..=mu)
            .map(|i| (mu as f64 + 0.5).ln() - (i as f64).ln())
            .collect();
        let sum: f64 = raw.iter().sum();
        raw.into_iter().map(|w| w / sum).collect()
    }

    fn validate(&self) -> Result<(), CmaesError> {
        let bad = |m: String| Err(CmaesError::InvalidConfig(m));
        if self.population_size < 2 {
            return bad(format!("population size must be >= 2, got {}", self.population_size));
        }
        let mu = self.parents();
        if mu < 1 || mu > self.population_size {
            return bad(format!("parent count {mu} outside 1..={}", self.population_size));
        }
        if !(self.initial_step_size > 0.0 && self.initial_step_size.is_finite()) {
            return bad(format!("initial step size must be positive, got {}", self.initial_step_size));
        }
        if self.initial_mean.iter().any(|v| !v.is_finite()) {
            return bad("initial mean must be finite".into());
        }
        if self.max_iterations == 0 {
            return bad("max_iterations must be at least 1".into());
        }
        Ok(())
    }
}

/// Strategy parameters derived from the dimension and weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    pub lambda: usize,
    pub mu: usize,
    pub weights: Vec<f64>,
    pub mu_eff: f64,
    pub c_sigma: f64,
    pub d_sigma: f64,
    pub c_c: f64,
    pub c_1: f64,
    pub c_mu: f64,
    pub chi_n: f64,
}

impl Strategy {
    fn new(cfg: &CmaEsConfig, n: usize) -> Self {
        let nf = n as f64;
        let weights = cfg.weights();
        let mu_eff = 1.0 / weights.iter().map(|w| w * w).sum::<f64>();
        let c_sigma = (mu_eff + 2.0) / (nf + mu_eff + 5.0);
        let d_sigma = 1.0 + 2.0 * (((mu_eff - 1.0) / (nf + 1.0)).sqrt() - 1.0).max(0.0) + c_sigma;
        let c_c = (4.0 + mu_eff / nf) / (nf + 4.0 + 2.0 * mu_eff / nf);
        let c_1 = 2.0 / ((nf + 1.3).powi(2) + mu_eff);
        let c_mu = (1.0 - c_1).min(2.0 * (mu_eff - 2.0 + 1.0 / mu_eff) / ((nf + 2.0).powi(2) + mu_eff));
        let chi_n = nf.sqrt() * (1.0 - 1.0 / (4.0 * nf) + 1.0 / (21.0 * nf * nf));
        Self {
            lambda: cfg.population_size,
            mu: weights.len(),
            weights,
            mu_eff,
            c_sigma,
            d_sigma,
            c_c,
            c_1,
            c_mu,
            chi_n,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub points: Vec<Vec<f64>>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone)]
pub struct CmaEsState {
    pub strategy: Strategy,
    pub mean: DVector<f64>,
    pub sigma: f64,
    pub covariance: DMatrix<f64>,
    pub path_sigma: DVector<f64>,
    pub path_c: DVector<f64>,
    pub generation: usize,
    pub best_point: Vec<f64>,
    pub best_value: f64,
    eigenvectors: DMatrix<f64>,
    /// Square roots of the eigenvalues of `C`.
    axis_lengths: DVector<f64>,
}

impl CmaEsState {
    /// Initial distribution: `C = I`, `σ = σ₀`, zero evolution paths.
    pub fn new(cfg: &CmaEsConfig, dimension: usize) -> Result<Self, CmaesError> {
        cfg.validate()?;
        if dimension == 0 {
            return Err(CmaesError::InvalidConfig("dimension must be at least 1".into()));
        }
        if cfg.initial_mean.len() != dimension {
            return Err(CmaesError::DimensionMismatch {
                expected: dimension,
                found: cfg.initial_mean.len(),
            });
        }
        Ok(Self {
            strategy: Strategy::new(cfg, dimension),
            mean: DVector::from_column_slice(&cfg.initial_mean),
            sigma: cfg.initial_step_size,
            covariance: DMatrix::identity(dimension, dimension),
            path_sigma: DVector::zeros(dimension),
            path_c: DVector::zeros(dimension),
            generation: 0,
            best_point: cfg.initial_mean.clone(),
            best_value: f64::INFINITY,
            eigenvectors: DMatrix::identity(dimension, dimension),
            axis_lengths: DVector::from_element(dimension, 1.0),
        })
    }

    pub fn dimension(&self) -> usize {
        self.mean.len()
    }

    pub fn eigenvalues(&self) -> DVector<f64> {
        self.axis_lengths.map(|d| d * d)
    }

    /// `σ · √λ_max(C)`: the largest standard deviation of the search
    /// distribution.
    pub fn max_std(&self) -> f64 {
        self.sigma * self.axis_lengths.max()
    }

    /// Draws `λ` points `m + σ B D z`, `z ~ N(0, I)`.
    pub fn ask<R: rand::Rng + ?Sized>(&self, rng: &mut R) -> Vec<Vec<f64>> {
        let n = self.dimension();
        let bd = &self.eigenvectors * DMatrix::from_diagonal(&self.axis_lengths);
        (0..self.strategy.lambda)
            .map(|_| {
                let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
                let x = &self.mean + (&bd * z) * self.sigma;
                x.iter().copied().collect()
            })
            .collect()
    }

    /// Ranks the population and updates mean, step size, paths and
    /// covariance. Non-finite costs rank last; ties keep sample order.
    pub fn tell(&mut self, population: &Population) -> Result<(), CmaesError> {
        let n = self.dimension();
        let s = &self.strategy;
        if population.points.len() != s.lambda || population.values.len() != s.lambda {
            return Err(CmaesError::DimensionMismatch {
                expected: s.lambda,
                found: population.points.len().min(population.values.len()),
            });
        }
        if let Some(bad) = population.points.iter().find(|p| p.len() != n) {
            return Err(CmaesError::DimensionMismatch {
                expected: n,
                found: bad.len(),
            });
        }

        let key = |v: f64| if v.is_nan() { f64::INFINITY } else { v };
        let mut order: Vec<usize> = (0..s.lambda).collect();
        order.sort_by(|&a, &b| {
            key(population.values[a])
                .total_cmp(&key(population.values[b]))
                .then(a.cmp(&b))
        });

        let best = order[0];
        if key(population.values[best]) < self.best_value {
            self.best_value = population.values[best];
            self.best_point = population.points[best].clone();
        }

        let old_mean = self.mean.clone();
        let steps: Vec<DVector<f64>> = order[..s.mu]
            .iter()
            .map(|&i| (DVector::from_column_slice(&population.points[i]) - &old_mean) / self.sigma)
            .collect();
        let mut y_w = DVector::zeros(n);
        for (w, y) in s.weights.iter().zip(&steps) {
            y_w += y * *w;
        }
        self.mean = &old_mean + &y_w * self.sigma;

        // C^{-1/2} y_w = B D^{-1} Bᵀ y_w
        let inv_sqrt_c_yw = &self.eigenvectors
            * (self.eigenvectors.transpose() * &y_w).component_div(&self.axis_lengths);
        self.path_sigma = &self.path_sigma * (1.0 - s.c_sigma)
            + inv_sqrt_c_yw * (s.c_sigma * (2.0 - s.c_sigma) * s.mu_eff).sqrt();

        let g = (self.generation + 1) as f64;
        let ps_norm = self.path_sigma.norm();
        let h_sigma = ps_norm / (1.0 - (1.0 - s.c_sigma).powf(2.0 * g)).sqrt()
            < (1.4 + 2.0 / (n as f64 + 1.0)) * s.chi_n;
        let h = if h_sigma { 1.0 } else { 0.0 };
        self.path_c = &self.path_c * (1.0 - s.c_c)
            + &y_w * (h * (s.c_c * (2.0 - s.c_c) * s.mu_eff).sqrt());

        let delta_h = (1.0 - h) * s.c_c * (2.0 - s.c_c);
        let mut rank_mu = DMatrix::zeros(n, n);
        for (w, y) in s.weights.iter().zip(&steps) {
            rank_mu += (y * y.transpose()) * *w;
        }
        let weight_sum: f64 = s.weights.iter().sum();
        self.covariance = &self.covariance * (1.0 + s.c_1 * delta_h - s.c_1 - s.c_mu * weight_sum)
            + (&self.path_c * self.path_c.transpose()) * s.c_1
            + rank_mu * s.c_mu;
        self.covariance = (&self.covariance + self.covariance.transpose()) * 0.5;

        self.sigma *= ((s.c_sigma / s.d_sigma) * (ps_norm / s.chi_n - 1.0)).exp();
        self.generation += 1;
        self.refresh_eigensystem()
    }

    fn refresh_eigensystem(&mut self) -> Result<(), CmaesError> {
        let eig = SymmetricEigen::new(self.covariance.clone());
        let min = eig.eigenvalues.min();
        if !(min > 0.0) || !eig.eigenvalues.iter().all(|v| v.is_finite()) {
            return Err(CmaesError::Factorization {
                generation: self.generation,
                detail: format!(
                    "eigenvalues {:?}, sigma {}, mean {:?}",
                    eig.eigenvalues.as_slice(),
                    self.sigma,
                    self.mean.as_slice()
                ),
            });
        }
        self.axis_lengths = eig.eigenvalues.map(f64::sqrt);
        self.eigenvectors = eig.eigenvectors;
        Ok(())
    }

    /// Largest `|C_ij - C_ji|`.
    pub fn covariance_asymmetry(&self) -> f64 {
        (&self.covariance - self.covariance.transpose()).amax()
    }
}

/// Per-generation stream of the counter-based sampler.
pub fn generation_rng(seed: u64, generation: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(generation as u64);
    rng
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StopReason {
    MaxIterations,
    FunctionTolerance,
    StepTolerance,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GenerationRecord {
    pub generation: usize,
    /// Incumbent value after this generation.
    pub best_value: f64,
    pub generation_best: f64,
    pub mean: Vec<f64>,
    pub sigma: f64,
    pub min_eigenvalue: f64,
    pub max_eigenvalue: f64,
    pub asymmetry: f64,
}

#[derive(Debug, Clone)]
pub struct MinimizeOutcome {
    pub best_point: Vec<f64>,
    pub best_value: f64,
    pub generations: usize,
    pub stop_reason: StopReason,
    pub history: Vec<GenerationRecord>,
    pub final_state: CmaEsState,
}

impl MinimizeOutcome {
    /// Optimizer trace: generation, best value, mean components, σ.
    pub fn trace_csv(&self, seed: u64) -> String {
        let n = self.best_point.len();
        let mut out = format!("# seed={seed}\ngeneration,best_value");
        for i in 0..n {
            out.push_str(&format!(",mean_{i}"));
        }
        out.push_str(",sigma\n");
        for r in &self.history {
            out.push_str(&format!("{},{:.17e}", r.generation, r.best_value));
            for m in &r.mean {
                out.push_str(&format!(",{m:.17e}"));
            }
            out.push_str(&format!(",{:.17e}\n", r.sigma));
        }
        out
    }
}

/// Minimizes an infallible objective.
pub fn cmaes_minimize<F>(objective: F, cfg: &CmaEsConfig) -> Result<MinimizeOutcome, CmaesError>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    cmaes_try_minimize(|x| Ok::<f64, std::convert::Infallible>(objective(x)), cfg)
}

/// Runs ask/tell until the generation budget, the function-value tolerance or
/// the step tolerance is reached. Objective evaluations within a generation
/// run concurrently; the first failure aborts the run.
pub fn cmaes_try_minimize<F, E>(objective: F, cfg: &CmaEsConfig) -> Result<MinimizeOutcome, CmaesError>
where
    F: Fn(&[f64]) -> Result<f64, E> + Sync,
    E: Into<BoxError> + Send,
{
    let mut state = CmaEsState::new(cfg, cfg.initial_mean.len())?;
    let n = state.dimension();
    let window = 10 + (30.0 * n as f64 / cfg.population_size as f64).ceil() as usize;
    let mut history: Vec<GenerationRecord> = Vec::new();
    let mut recent_best: Vec<f64> = Vec::new();

    let stop_reason = loop {
        let generation = state.generation;
        let points = state.ask(&mut generation_rng(cfg.rng_seed, generation));
        let values = points
            .par_iter()
            .map(|p| objective(p))
            .collect::<Result<Vec<f64>, E>>()
            .map_err(|e| CmaesError::Objective {
                generation,
                source: e.into(),
            })?;
        let population = Population { points, values };
        state.tell(&population)?;

        let finite: Vec<f64> = population.values.iter().copied().filter(|v| v.is_finite()).collect();
        let gen_best = finite.iter().copied().fold(f64::INFINITY, f64::min);
        let gen_worst = finite.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let eig = state.eigenvalues();
        history.push(GenerationRecord {
            generation: state.generation,
            best_value: state.best_value,
            generation_best: gen_best,
            mean: state.mean.iter().copied().collect(),
            sigma: state.sigma,
            min_eigenvalue: eig.min(),
            max_eigenvalue: eig.max(),
            asymmetry: state.covariance_asymmetry(),
        });

        recent_best.push(gen_best);
        if recent_best.len() > window {
            recent_best.remove(0);
        }

        if state.max_std() < cfg.x_tolerance {
            break StopReason::StepTolerance;
        }
        if recent_best.len() == window && finite.len() == population.values.len() {
            let hi = recent_best.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let lo = recent_best.iter().copied().fold(f64::INFINITY, f64::min);
            if (hi - lo).max(gen_worst - gen_best) < cfg.f_tolerance {
                break StopReason::FunctionTolerance;
            }
        }
        if state.generation >= cfg.max_iterations {
            break StopReason::MaxIterations;
        }
    };

    Ok(MinimizeOutcome {
        best_point: state.best_point.clone(),
        best_value: state.best_value,
        generations: state.generation,
        stop_reason,
        history,
        final_state: state,
    })
}

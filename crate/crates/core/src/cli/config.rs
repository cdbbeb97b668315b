use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::CliError;
use crate::cmaes::CmaEsConfig;
use crate::linalg::PcgConfig;
use crate::model::{
    load_density_grid, make_grid, synthetic_crater_anomaly, uniform_ball_anomaly, DensityField,
    Grid,
};
use crate::rate::{FrequencyBand, TransmissionMode, DEFAULT_SAMPLES};
use crate::schwarz::SchwarzConfig;

/// Run configuration, read from a TOML file. Every section and key is
/// optional; command-line flags override the file.
#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub grid: Option<GridConfig>,
    pub anomaly: AnomalyConfig,
    pub transmission: TransmissionConfig,
    pub optimizer: OptimizerConfig,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub nx: usize,
    #[serde(default = "one")]
    pub ny: usize,
    #[serde(default = "one")]
    pub nz: usize,
    pub lx: f64,
    #[serde(default = "unit")]
    pub ly: f64,
    #[serde(default = "unit")]
    pub lz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AnomalyKind {
    Zero,
    #[default]
    Crater,
    Ball,
    File,
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnomalyConfig {
    pub kind: AnomalyKind,
    /// Horizontal center for a crater, 3D center for a ball; defaults to the
    /// middle of the box.
    pub center: Option<Vec<f64>>,
    /// Rim radius (crater) or radius (ball); defaults to 15% of the smallest
    /// horizontal extent.
    pub radius: Option<f64>,
    /// Density contrast in kg/m³.
    pub amplitude: f64,
    pub path: Option<PathBuf>,
    /// Zero-density padding added on each side, as a multiple of the extent.
    pub padding: f64,
}

impl Default for AnomalyConfig {
    fn default() -> Self {
        Self {
            kind: AnomalyKind::default(),
            center: None,
            radius: None,
            amplitude: 300.0,
            path: None,
            padding: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TransmissionConfig {
    pub mode: String,
    pub band: Option<[f64; 2]>,
    pub samples: usize,
    /// Explicit coefficients in the mode's layout; skips the optimizer.
    pub coefficients: Option<Vec<f64>>,
    /// Use the discrete Dirichlet-to-Neumann map (two subdomains only).
    pub exact_dtn: bool,
}

impl Default for TransmissionConfig {
    fn default() -> Self {
        Self {
            mode: TransmissionMode::Oo2Sym.name().into(),
            band: None,
            samples: DEFAULT_SAMPLES,
            coefficients: None,
            exact_dtn: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OptimizerConfig {
    pub population: usize,
    /// Initial step size in normalized coordinates.
    pub sigma0: f64,
    /// Initial search zone in normalized coordinates; the search starts at
    /// its midpoint.
    pub zone: [f64; 2],
    pub max_generations: usize,
    pub f_tolerance: f64,
    pub x_tolerance: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            population: 25,
            sigma0: 0.3,
            zone: [0.5, 1.5],
            max_generations: 7200,
            f_tolerance: 5e-11,
            x_tolerance: 1e-14,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub nsub: usize,
    pub outer_tolerance: f64,
    pub max_outer_iterations: usize,
    pub inner_tolerance: f64,
    pub inner_max_iterations: usize,
    /// Extra subdomain counts to run after the main solve.
    pub sweep: Vec<usize>,
    /// Also solve the monolithic system and report the difference.
    pub compare_monolithic: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        let schwarz = SchwarzConfig::default();
        Self {
            nsub: 2,
            outer_tolerance: schwarz.outer_tolerance,
            max_outer_iterations: schwarz.max_outer_iterations,
            inner_tolerance: schwarz.inner.tolerance,
            inner_max_iterations: schwarz.inner.max_iterations,
            sweep: Vec::new(),
            compare_monolithic: true,
        }
    }
}

fn one() -> usize {
    1
}

fn unit() -> f64 {
    1.0
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, CliError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    pub fn mode(&self) -> Result<TransmissionMode, CliError> {
        self.transmission
            .mode
            .parse()
            .map_err(|e: crate::rate::RateError| CliError::Config(e.to_string()))
    }

    /// Explicit band if configured, otherwise `fallback`.
    pub fn band_or(&self, fallback: impl FnOnce() -> (f64, f64)) -> Result<FrequencyBand, CliError> {
        let (k_min, k_max) = match self.transmission.band {
            Some([a, b]) => (a, b),
            None => fallback(),
        };
        FrequencyBand::new(k_min, k_max, self.transmission.samples)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<Grid, CliError> {
        let g = self
            .grid
            .ok_or_else(|| CliError::Config("missing [grid] section".into()))?;
        make_grid(g.nx, g.ny, g.nz, g.lx, g.ly, g.lz).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Density anomaly on the configured box, before padding.
    pub fn density(&self) -> Result<DensityField, CliError> {
        let a = &self.anomaly;
        if a.kind == AnomalyKind::File {
            if self.grid.is_some() {
                return Err(CliError::Config(
                    "a density file carries its own grid; drop the [grid] section".into(),
                ));
            }
            let path = a
                .path
                .as_ref()
                .ok_or_else(|| CliError::Config("anomaly kind `file` needs `path`".into()))?;
            return load_density_grid(path).map_err(|e| CliError::Config(e.to_string()));
        }
        let g = self.grid()?;
        let radius = a.radius.unwrap_or(0.15 * g.lx.min(if g.ny > 1 { g.ly } else { g.lx }));
        let center = |n: usize| -> Result<Vec<f64>, CliError> {
            match &a.center {
                Some(c) if c.len() == n => Ok(c.clone()),
                Some(c) => Err(CliError::Config(format!(
                    "anomaly center needs {n} coordinates, got {}",
                    c.len()
                ))),
                None => Ok([g.lx, g.ly, g.lz][..n].iter().map(|l| 0.5 * l).collect()),
            }
        };
        match a.kind {
            AnomalyKind::Zero => Ok(DensityField::zeros(g)),
            AnomalyKind::Crater => {
                let c = center(2)?;
                synthetic_crater_anomaly(g, (c[0], c[1]), radius, a.amplitude)
                    .map_err(|e| CliError::Config(e.to_string()))
            }
            AnomalyKind::Ball => {
                let c = center(3)?;
                if !(radius > 0.0) {
                    return Err(CliError::Config("ball radius must be positive".into()));
                }
                Ok(uniform_ball_anomaly(g, [c[0], c[1], c[2]], radius, a.amplitude))
            }
            AnomalyKind::File => unreachable!(),
        }
    }

    pub fn padding(&self) -> Result<f64, CliError> {
        let p = self.anomaly.padding;
        if !(p >= 0.0 && p.is_finite()) {
            return Err(CliError::Config(format!("padding must be nonnegative, got {p}")));
        }
        Ok(p)
    }

    pub fn schwarz(&self) -> Result<SchwarzConfig, CliError> {
        let s = &self.solver;
        let cfg = SchwarzConfig {
            outer_tolerance: s.outer_tolerance,
            max_outer_iterations: s.max_outer_iterations,
            inner: PcgConfig {
                tolerance: s.inner_tolerance,
                max_iterations: s.inner_max_iterations,
            },
            ..SchwarzConfig::default()
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    /// CMA-ES settings in normalized coordinates for a search of `dimension`.
    pub fn cmaes(&self, dimension: usize, seed: u64) -> Result<CmaEsConfig, CliError> {
        let o = &self.optimizer;
        let [lo, hi] = o.zone;
        if !(lo < hi) {
            return Err(CliError::Config(format!("empty search zone [{lo}, {hi}]")));
        }
        let mut cfg = CmaEsConfig::new(vec![0.5 * (lo + hi); dimension], o.sigma0, seed);
        cfg.population_size = o.population;
        cfg.max_iterations = o.max_generations;
        cfg.f_tolerance = o.f_tolerance;
        cfg.x_tolerance = o.x_tolerance;
        if o.population < 2 || !(o.sigma0 > 0.0) || o.max_generations == 0 {
            return Err(CliError::Config(
                "optimizer needs population >= 2, sigma0 > 0 and max_generations >= 1".into(),
            ));
        }
        Ok(cfg)
    }
}

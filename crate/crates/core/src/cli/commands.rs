use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::{CliError, RunConfig};
use crate::cmaes::{cmaes_minimize, CmaEsConfig, MinimizeOutcome};
use crate::linalg::PcgConfig;
use crate::model::{
    direct_integration_potential, make_grid, padded_potential, point_mass_potential,
    uniform_ball_anomaly, write_grid_csv, DensityField, NodalField, PoissonProblem,
};
use crate::rate::{
    cost_function, optimal_oo0_symmetric, rate_curve, rate_curve_csv, recover_band_from_oo0,
    rho_max, FrequencyBand, TransmissionMode, TransmissionParams,
};
use crate::schwarz::{partition_x, schwarz_solve, SchwarzReport, Transmission};

/// Symmetric zeroth-order optimum whose band is used when neither a band nor
/// a grid is configured.
pub const REFERENCE_OO0: (f64, f64) = (0.1826, 0.6823);

/// Band recovered from [`REFERENCE_OO0`].
pub fn reference_band() -> (f64, f64) {
    recover_band_from_oo0(REFERENCE_OO0.0, REFERENCE_OO0.1).expect("valid reference optimum")
}

#[derive(Debug, Clone)]
pub struct OptimizedTransmission {
    pub mode: TransmissionMode,
    pub params: TransmissionParams,
    /// `rho_max` of `params`, recomputed from the decoded coefficients.
    pub rho_max: f64,
    pub outcome: MinimizeOutcome,
}

/// Per-coordinate scale of the search: `p` entries in units of the
/// geometric-mean frequency `√(k_min k_max)`, `q` entries in its inverse, so
/// a normalized point near 1 is a sensible transmission condition on any band.
pub fn coefficient_scales(mode: TransmissionMode, band: &FrequencyBand) -> Vec<f64> {
    let (p0, _) = optimal_oo0_symmetric(band);
    match mode {
        TransmissionMode::Oo0Sym => vec![p0],
        TransmissionMode::Oo0Unsym => vec![p0, p0],
        TransmissionMode::Oo2Sym => vec![p0, 1.0 / p0],
        TransmissionMode::Oo2Unsym => vec![p0, 1.0 / p0, p0, 1.0 / p0],
    }
}

/// Minimizes `rho_max` over the free coefficients of `mode` with CMA-ES,
/// searching in normalized coordinates.
pub fn optimize_transmission(
    mode: TransmissionMode,
    band: &FrequencyBand,
    cfg: &CmaEsConfig,
) -> Result<OptimizedTransmission, CliError> {
    let scales = coefficient_scales(mode, band);
    if cfg.initial_mean.len() != scales.len() {
        return Err(CliError::Config(format!(
            "{mode} has {} coefficients, initial mean has {}",
            scales.len(),
            cfg.initial_mean.len()
        )));
    }
    let physical = |x: &[f64]| -> Vec<f64> { x.iter().zip(&scales).map(|(v, s)| v * s).collect() };
    let mut outcome = cmaes_minimize(
        |x| cost_function(&physical(x), mode, band).unwrap_or(f64::INFINITY),
        cfg,
    )?;
    outcome.best_point = physical(&outcome.best_point);
    let params = mode.decode(&outcome.best_point).map_err(|e| {
        CliError::Optimizer(format!("{mode}: no feasible point found ({e})"))
    })?;
    let rho_max = rho_max(&params, band).value;
    Ok(OptimizedTransmission {
        mode,
        params,
        rho_max,
        outcome,
    })
}

/// Coefficient table: one row per mode with `p(1), q(1), p(2), q(2), ρmax`.
pub fn coefficient_table(seed: u64, band: &FrequencyBand, rows: &[OptimizedTransmission]) -> String {
    let mut out = format!(
        "# seed={seed} band={}:{} samples={}\nmode,p(1),q(1),p(2),q(2),rho_max\n",
        band.k_min, band.k_max, band.n_samples
    );
    for r in rows {
        let t = &r.params;
        let _ = writeln!(out, "{},{},{},{},{},{}", r.mode, t.p1, t.q1, t.p2, t.q2, r.rho_max);
    }
    out
}

fn write_file(out: Option<&Path>, name: &str, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = out {
        fs::create_dir_all(dir)?;
        fs::write(dir.join(name), contents)?;
    }
    Ok(())
}

/// Band of a rate-only run: configured band, else the band of the configured
/// grid, else the reference band.
pub fn rate_band(cfg: &RunConfig) -> Result<FrequencyBand, CliError> {
    let grid = match cfg.grid {
        Some(_) => Some(solve_problem(cfg)?.0.grid().to_owned()),
        None => None,
    };
    cfg.band_or(|| match grid {
        Some(g) => {
            let b = FrequencyBand::for_grid(&g);
            (b.k_min, b.k_max)
        }
        None => reference_band(),
    })
}

#[derive(Debug, Clone)]
pub struct OptimizeReport {
    pub seed: u64,
    pub band: FrequencyBand,
    pub rows: Vec<OptimizedTransmission>,
    pub table: String,
}

/// Optimizes every requested mode; writes `coefficients.csv` and one
/// `trace_<mode>.csv` per mode when an output directory is configured.
pub fn cmd_optimize(
    cfg: &RunConfig,
    modes: &[TransmissionMode],
    seed: u64,
) -> Result<OptimizeReport, CliError> {
    let band = rate_band(cfg)?;
    let mut rows = Vec::with_capacity(modes.len());
    for &mode in modes {
        let row = optimize_transmission(mode, &band, &cfg.cmaes(mode.dimension(), seed)?)?;
        write_file(
            cfg.out.as_deref(),
            &format!("trace_{mode}.csv"),
            &row.outcome.trace_csv(seed),
        )?;
        rows.push(row);
    }
    let table = coefficient_table(seed, &band, &rows);
    write_file(cfg.out.as_deref(), "coefficients.csv", &table)?;
    Ok(OptimizeReport {
        seed,
        band,
        rows,
        table,
    })
}

/// Explicit coefficients from the configuration, if any.
pub fn configured_params(cfg: &RunConfig) -> Result<Option<TransmissionParams>, CliError> {
    match &cfg.transmission.coefficients {
        None => Ok(None),
        Some(x) => cfg
            .mode()?
            .decode(x)
            .map(Some)
            .map_err(|e| CliError::Config(e.to_string())),
    }
}

/// Rate curves `(k, ρ(k))` over the run band, one per parameter set; written
/// as `rate_<label>.csv`.
pub fn cmd_rate_curves(
    cfg: &RunConfig,
    curves: &[(String, TransmissionParams)],
) -> Result<Vec<(String, Vec<(f64, f64)>)>, CliError> {
    let band = rate_band(cfg)?;
    curves
        .iter()
        .map(|(label, tp)| {
            let curve = rate_curve(tp, &band);
            write_file(cfg.out.as_deref(), &format!("rate_{label}.csv"), &rate_curve_csv(&curve))?;
            Ok((label.clone(), curve))
        })
        .collect()
}

/// Padded problem of a solve run and the cell offset of the original box.
pub fn solve_problem(cfg: &RunConfig) -> Result<(PoissonProblem, DensityField, [usize; 3]), CliError> {
    let field = cfg.density()?;
    let (padded, offset) = field.padded(cfg.padding()?);
    Ok((PoissonProblem::from_density(&padded), field, offset))
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub nsub: usize,
    pub outer_iterations: usize,
    pub converged: bool,
    pub inner_iterations: usize,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub transmission: Transmission,
    pub optimized: Option<OptimizedTransmission>,
    pub potential: NodalField,
    pub report: SchwarzReport,
    /// Relative L∞ difference to the monolithic solve, when requested.
    pub monolithic_difference: Option<f64>,
    pub sweep: Vec<SweepRow>,
}

/// Cell-center potential restricted to the unpadded box.
pub fn crop_potential(potential: &NodalField, field: &DensityField, offset: [usize; 3]) -> Vec<f64> {
    let big = *potential.grid();
    let small = *field.grid();
    let centers = potential.to_cell_centers();
    let mut out = Vec::with_capacity(small.cell_count());
    for k in 0..small.nz {
        for j in 0..small.ny {
            for i in 0..small.nx {
                out.push(centers[big.cell_index(i + offset[0], j + offset[1], k + offset[2])]);
            }
        }
    }
    out
}

/// Solves the configured problem with the Schwarz iteration. Writes
/// `schwarz_report.csv`, `potential.csv` (cell centers of the unpadded box),
/// `coefficients.csv` and, for a sweep, `sweep.csv`.
pub fn cmd_solve(cfg: &RunConfig, seed: u64) -> Result<SolveOutcome, CliError> {
    let (problem, field, offset) = solve_problem(cfg)?;
    let grid = *problem.grid();
    let schwarz = cfg.schwarz()?;
    let out = cfg.out.as_deref();

    let (transmission, optimized) = if cfg.transmission.exact_dtn {
        (Transmission::ExactDtn, None)
    } else if let Some(tp) = configured_params(cfg)? {
        (Transmission::Robin(tp), None)
    } else {
        let band = cfg.band_or(|| {
            let b = FrequencyBand::for_grid(&grid);
            (b.k_min, b.k_max)
        })?;
        let mode = cfg.mode()?;
        let row = optimize_transmission(mode, &band, &cfg.cmaes(mode.dimension(), seed)?)?;
        write_file(out, "coefficients.csv", &coefficient_table(seed, &band, std::slice::from_ref(&row)))?;
        (Transmission::Robin(row.params.clone()), Some(row))
    };

    let run = |nsub: usize| -> Result<(NodalField, SchwarzReport), CliError> {
        let partition =
            partition_x(&grid, nsub).map_err(|e| CliError::Config(e.to_string()))?;
        Ok(schwarz_solve(&problem, &partition, &transmission, &schwarz)?)
    };
    let (potential, report) = run(cfg.solver.nsub)?;
    write_file(out, "schwarz_report.csv", &report.history_csv())?;
    write_file(
        out,
        "potential.csv",
        &write_grid_csv(field.grid(), &crop_potential(&potential, &field, offset)),
    )?;

    let monolithic_difference = if cfg.solver.compare_monolithic {
        let pcg = PcgConfig {
            tolerance: schwarz.inner.tolerance,
            max_iterations: schwarz.inner.max_iterations.max(10 * grid.node_count()),
        };
        let (mono, _) = problem.system()?.solve(&pcg)?;
        let scale = mono.max_abs();
        Some(if scale > 0.0 { potential.max_abs_diff(&mono) / scale } else { potential.max_abs() })
    } else {
        None
    };

    let mut sweep = Vec::new();
    for &nsub in &cfg.solver.sweep {
        let (_, rep) = run(nsub)?;
        sweep.push(SweepRow {
            nsub,
            outer_iterations: rep.outer_iterations,
            converged: rep.converged,
            inner_iterations: rep.total_inner_iterations(),
        });
    }
    if !sweep.is_empty() {
        let mut csv = String::from("subdomains,outer_iterations,converged,inner_iterations\n");
        for r in &sweep {
            let _ = writeln!(csv, "{},{},{},{}", r.nsub, r.outer_iterations, r.converged, r.inner_iterations);
        }
        write_file(out, "sweep.csv", &csv)?;
    }

    if !report.converged {
        return Err(CliError::Diverged(format!(
            "no convergence after {} outer iterations (relative residual {:e})",
            report.outer_iterations,
            report.global_residuals.last().copied().unwrap_or(f64::NAN)
        )));
    }
    if let Some(r) = sweep.iter().find(|r| !r.converged) {
        return Err(CliError::Diverged(format!(
            "sweep run with {} subdomains did not converge",
            r.nsub
        )));
    }
    Ok(SolveOutcome {
        transmission,
        optimized,
        potential,
        report,
        monolithic_difference,
        sweep,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallProbe {
    /// Probe distance from the ball center, in radii.
    pub distance: f64,
    /// `G m / r` outside the ball, `None` inside.
    pub point_mass: Option<f64>,
    pub direct: f64,
    pub poisson: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallOracle {
    pub cells: usize,
    /// Radius as a fraction of the box edge.
    pub radius_fraction: f64,
    pub delta_rho: f64,
    pub padding: f64,
}

impl Default for BallOracle {
    fn default() -> Self {
        Self {
            cells: 32,
            radius_fraction: 0.15,
            delta_rho: 1000.0,
            padding: 1.0,
        }
    }
}

/// Uniform ball in a unit-kilometre cube: point-mass potential, direct
/// integration and padded Poisson solve along a ray from the center.
pub fn cmd_oracle_ball(settings: &BallOracle, distances: &[f64]) -> Result<Vec<BallProbe>, CliError> {
    let edge = 1000.0;
    let n = settings.cells;
    let grid = make_grid(n, n, n, edge, edge, edge).map_err(|e| CliError::Config(e.to_string()))?;
    let radius = settings.radius_fraction * edge;
    let center = [0.5 * edge; 3];
    let field = uniform_ball_anomaly(grid, center, radius, settings.delta_rho);
    let mass = field.total_mass();
    // Off-axis probes avoid landing exactly on cell centers and nodes.
    let probes: Vec<[f64; 3]> = distances
        .iter()
        .map(|&d| [center[0] + d * radius, center[1] + 0.01 * edge, center[2] - 0.007 * edge])
        .collect();
    let pcg = PcgConfig {
        tolerance: 1e-10,
        max_iterations: 100_000,
    };
    let (poisson, _) = padded_potential(&field, settings.padding, &probes, &pcg)?;
    probes
        .iter()
        .zip(poisson)
        .map(|(p, phi)| {
            let r = p.iter().zip(&center).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
            Ok(BallProbe {
                distance: r / radius,
                point_mass: if r > radius { Some(point_mass_potential(mass, r)?) } else { None },
                direct: direct_integration_potential(&field, *p).potential,
                poisson: phi,
            })
        })
        .collect()
}

pub fn ball_oracle_csv(rows: &[BallProbe]) -> String {
    let mut out = String::from("distance_radii,point_mass,direct,poisson\n");
    for r in rows {
        let pm = r.point_mass.map(|v| format!("{v:.9e}")).unwrap_or_default();
        let _ = writeln!(out, "{:.6},{pm},{:.9e},{:.9e}", r.distance, r.direct, r.poisson);
    }
    out
}

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use gravschwarz::cli::{
    ball_oracle_csv, cmd_optimize, cmd_oracle_ball, cmd_rate_curves, cmd_solve, configured_params,
    gridify, parse_band, BallOracle, CliError, KernelKind, RunConfig, EXIT_CONFIG,
};
use gravschwarz::model::point_mass_potential;
use gravschwarz::rate::{TransmissionMode, TransmissionParams};
use gravschwarz::schwarz::Transmission;

#[derive(Parser)]
#[command(name = "gravschwarz", version, about = "Optimized Schwarz gravimetric Poisson solver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Transmission mode: oo0_sym, oo0_unsym, oo2_sym or oo2_unsym.
    #[arg(long)]
    mode: Option<String>,
    /// Frequency band as KMIN:KMAX.
    #[arg(long)]
    band: Option<String>,
    /// Number of subdomains.
    #[arg(long)]
    nsub: Option<usize>,
    /// Optimizer seed; a random one is drawn and recorded if omitted.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimize transmission coefficients (all modes unless --mode is given).
    Optimize(Common),
    /// Write rate curves rho(k) for optimized or explicit coefficients.
    Rate {
        #[command(flatten)]
        common: Common,
        /// Explicit coefficients in the mode's layout, comma separated.
        #[arg(long, value_delimiter = ',')]
        params: Option<Vec<f64>>,
    },
    /// Solve the configured problem with the Schwarz iteration.
    Solve {
        #[command(flatten)]
        common: Common,
        /// Also run these subdomain counts and tabulate iterations.
        #[arg(long, value_delimiter = ',')]
        sweep: Option<Vec<usize>>,
    },
    /// Plan the launch geometry of an accelerator kernel.
    Gridify {
        #[arg(long)]
        kind: String,
        #[arg(long)]
        rows: usize,
        #[arg(long)]
        block: Option<usize>,
        #[arg(long)]
        warp: Option<usize>,
    },
    /// Analytic gravity checks.
    Oracle {
        #[command(subcommand)]
        check: OracleCheck,
    },
}

#[derive(Subcommand)]
enum OracleCheck {
    /// Potential G m / r of a point mass.
    PointMass {
        #[arg(long)]
        mass: f64,
        #[arg(long)]
        distance: f64,
    },
    /// Uniform ball: point mass vs direct integration vs padded Poisson solve.
    Ball {
        #[arg(long, default_value_t = 32)]
        cells: usize,
        #[arg(long, default_value_t = 0.15)]
        radius_fraction: f64,
        #[arg(long, default_value_t = 1000.0)]
        delta_rho: f64,
        #[arg(long, default_value_t = 1.0)]
        padding: f64,
        /// Probe distances from the center, in radii.
        #[arg(long, value_delimiter = ',', default_value = "0,1,1.5,2,3")]
        distances: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn resolve(common: &Common) -> Result<(RunConfig, u64), CliError> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if let Some(mode) = &common.mode {
        cfg.transmission.mode = mode.clone();
    }
    if let Some(band) = &common.band {
        let (a, b) = parse_band(band)?;
        cfg.transmission.band = Some([a, b]);
    }
    if let Some(n) = common.nsub {
        cfg.solver.nsub = n;
    }
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    if common.out.is_some() {
        cfg.out = common.out.clone();
    }
    cfg.mode()?;
    let seed = cfg.seed.unwrap_or_else(rand::random);
    Ok((cfg, seed))
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Optimize(common) => {
            let (cfg, seed) = resolve(&common)?;
            let modes = match common.mode {
                Some(_) => vec![cfg.mode()?],
                None => TransmissionMode::ALL.to_vec(),
            };
            print!("{}", cmd_optimize(&cfg, &modes, seed)?.table);
        }
        Command::Rate { common, params } => {
            let (mut cfg, seed) = resolve(&common)?;
            if let Some(p) = params {
                cfg.transmission.coefficients = Some(p);
            }
            let curves: Vec<(String, TransmissionParams)> = match configured_params(&cfg)? {
                Some(tp) => vec![(cfg.mode()?.name().to_string(), tp)],
                None => {
                    let modes = match common.mode {
                        Some(_) => vec![cfg.mode()?],
                        None => TransmissionMode::ALL.to_vec(),
                    };
                    let report = cmd_optimize(&cfg, &modes, seed)?;
                    print!("{}", report.table);
                    report.rows.into_iter().map(|r| (r.mode.name().to_string(), r.params)).collect()
                }
            };
            for (label, curve) in cmd_rate_curves(&cfg, &curves)? {
                let max = curve.iter().map(|c| c.1).fold(f64::NEG_INFINITY, f64::max);
                println!("{label}: {} samples, max rho {max}", curve.len());
            }
        }
        Command::Solve { common, sweep } => {
            let (mut cfg, seed) = resolve(&common)?;
            if let Some(s) = sweep {
                cfg.solver.sweep = s;
            }
            let outcome = cmd_solve(&cfg, seed)?;
            println!("# seed={seed}");
            match &outcome.transmission {
                Transmission::Robin(tp) => println!(
                    "transmission {}: p(1)={} q(1)={} p(2)={} q(2)={}",
                    tp.mode(),
                    tp.p1,
                    tp.q1,
                    tp.p2,
                    tp.q2
                ),
                Transmission::ExactDtn => println!("transmission exact_dtn"),
            }
            if let Some(o) = &outcome.optimized {
                println!("rho_max {}", o.rho_max);
            }
            let rep = &outcome.report;
            println!(
                "outer iterations {} (converged), inner iterations {}, global residual {:e}",
                rep.outer_iterations,
                rep.total_inner_iterations(),
                rep.global_residuals.last().copied().unwrap_or(0.0)
            );
            if let Some(d) = outcome.monolithic_difference {
                println!("relative max difference to monolithic solve {d:e}");
            }
            if !outcome.sweep.is_empty() {
                println!("subdomains,outer_iterations,converged");
                for r in &outcome.sweep {
                    println!("{},{},{}", r.nsub, r.outer_iterations, r.converged);
                }
            }
        }
        Command::Gridify {
            kind,
            rows,
            block,
            warp,
        } => {
            let kind: KernelKind = kind.parse()?;
            println!("{}", gridify(kind, rows, block, warp)?);
        }
        Command::Oracle { check } => match check {
            OracleCheck::PointMass { mass, distance } => {
                println!("{:e}", point_mass_potential(mass, distance).map_err(|e| CliError::Config(e.to_string()))?);
            }
            OracleCheck::Ball {
                cells,
                radius_fraction,
                delta_rho,
                padding,
                distances,
                out,
            } => {
                let settings = BallOracle {
                    cells,
                    radius_fraction,
                    delta_rho,
                    padding,
                };
                let csv = ball_oracle_csv(&cmd_oracle_ball(&settings, &distances)?);
                if let Some(dir) = out {
                    std::fs::create_dir_all(&dir)?;
                    std::fs::write(dir.join("oracle_ball.csv"), &csv)?;
                }
                print!("{csv}");
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_CONFIG as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

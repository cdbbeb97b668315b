use gravschwarz::cmaes::{cmaes_minimize, CmaEsConfig, StopReason};
use gravschwarz::rate::{cost_function, FrequencyBand, TransmissionMode};

fn sphere(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum()
}

fn rosenbrock(x: &[f64]) -> f64 {
    100.0 * (x[1] - x[0] * x[0]).powi(2) + (1.0 - x[0]).powi(2)
}

#[test]
fn sphere_reaches_tolerance() {
    for dim in [2, 4] {
        for seed in 0..3 {
            let out = cmaes_minimize(sphere, &CmaEsConfig::new(vec![1.0; dim], 0.5, seed)).unwrap();
            assert!(out.best_value < 1e-10, "dim {dim} seed {seed}: {}", out.best_value);
            assert_ne!(out.stop_reason, StopReason::MaxIterations);
        }
    }
}

#[test]
fn rosenbrock_valley() {
    let out = cmaes_minimize(rosenbrock, &CmaEsConfig::new(vec![0.0, 0.0], 0.5, 8)).unwrap();
    assert!((out.best_point[0] - 1.0).abs() < 1e-3);
    assert!((out.best_point[1] - 1.0).abs() < 1e-3);
}

#[test]
fn optimum_outside_initial_zone() {
    let f = |x: &[f64]| (x[0] - 10.0).powi(2) + (x[1] - 10.0).powi(2);
    let out = cmaes_minimize(f, &CmaEsConfig::new(vec![0.5, 0.5], 0.25, 2)).unwrap();
    assert!((out.best_point[0] - 10.0).abs() < 1e-4);
    assert!((out.best_point[1] - 10.0).abs() < 1e-4);
}

#[test]
fn fixed_seed_gives_identical_traces() {
    let cfg = CmaEsConfig::new(vec![0.3, -0.2, 0.9], 0.4, 99);
    let a = cmaes_minimize(rosen3, &cfg).unwrap();
    let b = cmaes_minimize(rosen3, &cfg).unwrap();
    assert_eq!(a.trace_csv(99), b.trace_csv(99));
    let c = cmaes_minimize(rosen3, &CmaEsConfig { rng_seed: 100, ..cfg }).unwrap();
    assert_ne!(a.trace_csv(99), c.trace_csv(99));
}

fn rosen3(x: &[f64]) -> f64 {
    x.windows(2)
        .map(|w| 100.0 * (w[1] - w[0] * w[0]).powi(2) + (1.0 - w[0]).powi(2))
        .sum()
}

#[test]
fn translated_problem_reaches_translated_optimum() {
    let shift = [3.0, -7.0];
    let shifted = |x: &[f64]| sphere(&[x[0] - shift[0], x[1] - shift[1]]);
    let base = cmaes_minimize(sphere, &CmaEsConfig::new(vec![1.0, 1.0], 0.5, 4)).unwrap();
    let moved = cmaes_minimize(
        shifted,
        &CmaEsConfig::new(vec![1.0 + shift[0], 1.0 + shift[1]], 0.5, 4),
    )
    .unwrap();
    for i in 0..2 {
        assert!((moved.best_point[i] - shift[i] - base.best_point[i]).abs() < 1e-4);
    }
    assert!((moved.generations as f64 - base.generations as f64).abs() <= 0.2 * base.generations as f64);
}

#[test]
fn covariance_stays_symmetric_positive_definite() {
    for (f, x0) in [
        (rosenbrock as fn(&[f64]) -> f64, vec![-1.0, 1.5]),
        (sphere as fn(&[f64]) -> f64, vec![4.0, -2.0]),
    ] {
        let out = cmaes_minimize(f, &CmaEsConfig::new(x0, 0.8, 6)).unwrap();
        for g in &out.history {
            assert!(g.asymmetry <= 1e-12, "generation {}", g.generation);
            assert!(g.min_eigenvalue > 0.0, "generation {}", g.generation);
        }
    }
}

#[test]
fn incumbent_never_gets_worse() {
    let out = cmaes_minimize(rosen3, &CmaEsConfig::new(vec![2.0, 2.0, 2.0], 1.0, 12)).unwrap();
    assert!(out.history.windows(2).all(|w| w[1].best_value <= w[0].best_value));
    assert_eq!(out.best_value, out.history.last().unwrap().best_value);
}

#[test]
fn oo0_rate_cost_on_decade_band() {
    let band = FrequencyBand::new(1.0, 100.0, 10_000).unwrap();
    let cost = |x: &[f64]| cost_function(x, TransmissionMode::Oo0Sym, &band).unwrap();
    let out = cmaes_minimize(cost, &CmaEsConfig::new(vec![5.0], 2.0, 0)).unwrap();
    assert!((out.best_point[0] - 10.0).abs() <= 1e-3 * 10.0);
}

#[test]
fn generation_budget_is_respected() {
    let cfg = CmaEsConfig {
        max_iterations: 5,
        ..CmaEsConfig::new(vec![1.0, 1.0], 0.5, 1)
    };
    let out = cmaes_minimize(rosenbrock, &cfg).unwrap();
    assert_eq!(out.generations, 5);
    assert_eq!(out.stop_reason, StopReason::MaxIterations);
}

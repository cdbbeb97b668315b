use gravschwarz::linalg::PcgConfig;
use gravschwarz::model::{
    assemble_poisson, direct_integration_potential, make_grid, padded_potential,
    point_mass_potential, uniform_ball_anomaly, DensityField, NodalField, GRAVITY_CONSTANT,
};

fn tight() -> PcgConfig {
    PcgConfig {
        tolerance: 1e-12,
        max_iterations: 100_000,
    }
}

#[test]
fn ball_matches_point_mass_far_away() {
    let edge = 1000.0;
    let grid = make_grid(24, 24, 24, edge, edge, edge).unwrap();
    let center = [0.5 * edge; 3];
    let radius = 0.15 * edge;
    let field = uniform_ball_anomaly(grid, center, radius, 1000.0);
    let mass = field.total_mass();
    for d in [3.0, 4.0, 6.0] {
        let x = [center[0] + d * radius, center[1] + 0.3, center[2] - 0.7];
        let r = ((d * radius).powi(2) + 0.09 + 0.49).sqrt();
        let exact = point_mass_potential(mass, r).unwrap();
        let direct = direct_integration_potential(&field, x).potential;
        assert!((direct - exact).abs() / exact < 0.02, "d={d}: {direct} vs {exact}");
    }
}

#[test]
fn point_mass_rejects_zero_distance() {
    assert!(point_mass_potential(1.0, 0.0).is_err());
    assert_eq!(point_mass_potential(2.0, 4.0).unwrap(), GRAVITY_CONSTANT * 0.5);
}

#[test]
fn padding_reduces_boundary_error() {
    let edge = 1000.0;
    let grid = make_grid(16, 16, 16, edge, edge, edge).unwrap();
    let center = [0.5 * edge; 3];
    let field = uniform_ball_anomaly(grid, center, 0.2 * edge, 1000.0);
    let probes = [[center[0] + 0.25 * edge, center[1] + 3.0, center[2] - 5.0]];
    let direct = direct_integration_potential(&field, probes[0]).potential;
    let errors: Vec<f64> = [0.0, 0.5, 1.0]
        .iter()
        .map(|&pad| {
            let (phi, _) = padded_potential(&field, pad, &probes, &tight()).unwrap();
            (phi[0] - direct).abs() / direct.abs()
        })
        .collect();
    assert!(errors[0] > errors[1] && errors[1] > errors[2], "{errors:?}");
}

#[test]
fn zero_density_gives_zero_potential() {
    let grid = make_grid(8, 6, 4, 1.0, 2.0, 3.0).unwrap();
    let (phi, stats) = assemble_poisson(&DensityField::zeros(grid)).unwrap().solve(&tight()).unwrap();
    assert_eq!(phi.max_abs(), 0.0);
    assert_eq!(stats.iterations, 0);
}

#[test]
fn interpolation_is_exact_for_trilinear_fields() {
    let grid = make_grid(5, 4, 3, 2.0, 1.0, 1.5).unwrap();
    let f = |[x, y, z]: [f64; 3]| 1.0 + 2.0 * x - y + 0.5 * z + x * y * z;
    let field = NodalField::from_fn(grid, f);
    for x in [[0.0, 0.0, 0.0], [0.33, 0.71, 1.2], [2.0, 1.0, 1.5], [1.01, 0.5, 0.25]] {
        assert!((field.interpolate(x) - f(x)).abs() < 1e-12, "{x:?}");
    }
}

#[test]
fn interpolation_ignores_collapsed_axes() {
    let grid = make_grid(4, 4, 1, 1.0, 1.0, 1.0).unwrap();
    let field = NodalField::from_fn(grid, |[x, y, _]| x + 3.0 * y);
    let a = field.interpolate([0.3, 0.6, 0.0]);
    let b = field.interpolate([0.3, 0.6, 0.9]);
    assert_eq!(a, b);
    assert!((a - 2.1).abs() < 1e-12);
}

#[test]
fn potential_is_linear_in_density() {
    let grid = make_grid(12, 12, 1, 1.0, 1.0, 1.0).unwrap();
    let field = uniform_ball_anomaly(grid, [0.4, 0.5, 0.5], 0.2, 250.0);
    let (a, _) = assemble_poisson(&field).unwrap().solve(&tight()).unwrap();
    let (b, _) = assemble_poisson(&field.scaled(-3.0)).unwrap().solve(&tight()).unwrap();
    for (x, y) in a.values().iter().zip(b.values()) {
        assert!((3.0 * x + y).abs() <= 1e-9 * a.max_abs());
    }
}

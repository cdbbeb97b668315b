use super::{DensityField, ModelError};

/// Universal gravity constant in m³·kg⁻¹·s⁻².
pub const GRAVITY_CONSTANT: f64 = 6.672e-11;

/// Potential `G m / r` of a point (or spherically symmetric) mass.
pub fn point_mass_potential(mass: f64, r: f64) -> Result<f64, ModelError> {
    if !(r > 0.0) {
        return Err(ModelError::InvalidArgument(format!(
            "distance must be positive, got {r}"
        )));
    }
    Ok(GRAVITY_CONSTANT * mass / r)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectIntegration {
    pub potential: f64,
    /// Cell whose center coincides with the probe and was left out of the sum.
    pub excluded_cell: Option<usize>,
}

/// Midpoint-rule evaluation of `G ∫ δρ(x') / |x - x'| dx'` over the cells.
pub fn direct_integration_potential(field: &DensityField, x: [f64; 3]) -> DirectIntegration {
    let g = field.grid();
    let volume = g.cell_volume();
    let eps = 1e-9 * g.hx().min(g.hy()).min(g.hz());
    let mut sum = 0.0;
    let mut excluded_cell = None;
    for k in 0..g.nz {
        for j in 0..g.ny {
            for i in 0..g.nx {
                let idx = g.cell_index(i, j, k);
                let rho = field.values()[idx];
                let c = g.cell_center(i, j, k);
                let d = ((x[0] - c[0]).powi(2) + (x[1] - c[1]).powi(2) + (x[2] - c[2]).powi(2)).sqrt();
                if d <= eps {
                    excluded_cell = Some(idx);
                    continue;
                }
                if rho != 0.0 {
                    sum += rho / d;
                }
            }
        }
    }
    DirectIntegration {
        potential: GRAVITY_CONSTANT * volume * sum,
        excluded_cell,
    }
}

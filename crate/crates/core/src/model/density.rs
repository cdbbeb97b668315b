use std::fs;
use std::path::Path;

use super::{make_grid, Grid, ModelError};

/// Cell-wise density anomaly `δρ` (kg/m³) on a grid, x-fastest ordering.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityField {
    grid: Grid,
    delta_rho: Vec<f64>,
}

impl DensityField {
    pub fn new(grid: Grid, delta_rho: Vec<f64>) -> Result<Self, ModelError> {
        if delta_rho.len() != grid.cell_count() {
            return Err(ModelError::FieldSize {
                expected: grid.cell_count(),
                found: delta_rho.len(),
            });
        }
        Ok(Self { grid, delta_rho })
    }

    pub fn zeros(grid: Grid) -> Self {
        Self {
            delta_rho: vec![0.0; grid.cell_count()],
            grid,
        }
    }

    /// Field sampled from `f(x, y, z)` at cell centers.
    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let mut delta_rho = Vec::with_capacity(grid.cell_count());
        for k in 0..grid.nz {
            for j in 0..grid.ny {
                for i in 0..grid.nx {
                    delta_rho.push(f(grid.cell_center(i, j, k)));
                }
            }
        }
        Self { grid, delta_rho }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.delta_rho
    }

    pub fn cell(&self, i: usize, j: usize, k: usize) -> f64 {
        self.delta_rho[self.grid.cell_index(i, j, k)]
    }

    pub fn scaled(&self, factor: f64) -> Self {
        Self {
            grid: self.grid,
            delta_rho: self.delta_rho.iter().map(|v| v * factor).collect(),
        }
    }

    /// Total anomalous mass `Σ δρ_c V_c`.
    pub fn total_mass(&self) -> f64 {
        self.delta_rho.iter().sum::<f64>() * self.grid.cell_volume()
    }

    /// Density at a grid node: mean of the cells sharing that node.
    pub fn node_value(&self, i: usize, j: usize, k: usize) -> f64 {
        let [ax, ay, az] = self.grid.axes();
        let mut sum = 0.0;
        let mut count = 0usize;
        for ck in az.cells_around_node(k) {
            for cj in ay.cells_around_node(j) {
                for ci in ax.cells_around_node(i) {
                    sum += self.cell(ci, cj, ck);
                    count += 1;
                }
            }
        }
        sum / count as f64
    }

    /// Embeds the field in a larger zero-density box with `factor * n`
    /// extra cells on each side of every active axis. Returns the padded
    /// field and the cell offset of the original origin.
    pub fn padded(&self, factor: f64) -> (Self, [usize; 3]) {
        let g = &self.grid;
        let pad = g
            .axes()
            .map(|a| if a.active { (factor * a.cells as f64).round() as usize } else { 0 });
        let n = [g.nx + 2 * pad[0], g.ny + 2 * pad[1], g.nz + 2 * pad[2]];
        let big = Grid {
            nx: n[0],
            ny: n[1],
            nz: n[2],
            lx: g.hx() * n[0] as f64,
            ly: g.hy() * n[1] as f64,
            lz: g.hz() * n[2] as f64,
        };
        let mut out = Self::zeros(big);
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let idx = big.cell_index(i + pad[0], j + pad[1], k + pad[2]);
                    out.delta_rho[idx] = self.cell(i, j, k);
                }
            }
        }
        (out, pad)
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<(), ModelError> {
        fs::write(path, write_grid_csv(&self.grid, &self.delta_rho))?;
        Ok(())
    }
}

/// Serializes cell values in the density-grid CSV layout: a
/// `nx,ny,nz,lx,ly,lz` header, then one value per line, x fastest.
pub fn write_grid_csv(grid: &Grid, values: &[f64]) -> String {
    let mut out = format!(
        "{},{},{},{},{},{}\n",
        grid.nx, grid.ny, grid.nz, grid.lx, grid.ly, grid.lz
    );
    for v in values {
        out.push_str(&format!("{v}\n"));
    }
    out
}

pub fn parse_density_grid(text: &str) -> Result<DensityField, ModelError> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or(ModelError::Ingest {
        line: 1,
        message: "empty file".into(),
    })?;
    let fields: Vec<&str> = header.split(',').map(str::trim).collect();
    let bad_header = |message: String| ModelError::Ingest { line: 1, message };
    if fields.len() != 6 {
        return Err(bad_header(format!(
            "header must be `nx,ny,nz,lx,ly,lz`, found {} fields",
            fields.len()
        )));
    }
    let mut counts = [0usize; 3];
    for (c, s) in counts.iter_mut().zip(&fields[..3]) {
        *c = s
            .parse()
            .map_err(|_| bad_header(format!("cell count `{s}` is not an integer")))?;
    }
    let mut extents = [0f64; 3];
    for (e, s) in extents.iter_mut().zip(&fields[3..]) {
        *e = s
            .parse()
            .map_err(|_| bad_header(format!("extent `{s}` is not a number")))?;
    }
    let grid = make_grid(
        counts[0], counts[1], counts[2], extents[0], extents[1], extents[2],
    )
    .map_err(|e| bad_header(e.to_string()))?;

    let expected = grid.cell_count();
    let mut values = Vec::with_capacity(expected);
    let mut last_line = 1;
    for (idx, line) in lines {
        let lineno = idx + 1;
        last_line = lineno;
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        if values.len() == expected {
            return Err(ModelError::Ingest {
                line: lineno,
                message: format!("more than the {expected} cell values declared by the header"),
            });
        }
        let v: f64 = trimmed.parse().map_err(|_| ModelError::Ingest {
            line: lineno,
            message: format!("cell value `{trimmed}` is not a number"),
        })?;
        values.push(v);
    }
    if values.len() != expected {
        return Err(ModelError::Ingest {
            line: last_line,
            message: format!(
                "header declares {expected} cells but {} values were found",
                values.len()
            ),
        });
    }
    DensityField::new(grid, values)
}

pub fn load_density_grid(path: impl AsRef<Path>) -> Result<DensityField, ModelError> {
    parse_density_grid(&fs::read_to_string(path)?)
}

/// Radial density profile of the synthetic crater: a negative central disc
/// (`r < 0.8 R`), a positive rim ring of half amplitude (`0.8 R ≤ r < 1.5 R`),
/// and zero beyond.
pub fn crater_profile(r: f64, rim_radius: f64, amplitude: f64) -> f64 {
    if r < 0.8 * rim_radius {
        -amplitude
    } else if r < 1.5 * rim_radius {
        0.5 * amplitude
    } else {
        0.0
    }
}

/// Crater-like anomaly evaluated at cell centers from the horizontal distance
/// to `center`; the profile is applied over the full depth of the grid.
pub fn synthetic_crater_anomaly(
    grid: Grid,
    center: (f64, f64),
    rim_radius: f64,
    amplitude: f64,
) -> Result<DensityField, ModelError> {
    if !(rim_radius > 0.0) {
        return Err(ModelError::InvalidArgument(format!(
            "rim radius must be positive, got {rim_radius}"
        )));
    }
    Ok(DensityField::from_fn(grid, |[x, y, _]| {
        let r = (x - center.0).hypot(y - center.1);
        crater_profile(r, rim_radius, amplitude)
    }))
}

/// Uniform ball of density `delta_rho`, voxelized by cell-center membership.
pub fn uniform_ball_anomaly(grid: Grid, center: [f64; 3], radius: f64, delta_rho: f64) -> DensityField {
    DensityField::from_fn(grid, |c| {
        let d2: f64 = c.iter().zip(&center).map(|(a, b)| (a - b) * (a - b)).sum();
        if d2 <= radius * radius {
            delta_rho
        } else {
            0.0
        }
    })
}

use std::f64::consts::PI;
use std::ops::Range;

use super::{DensityField, Grid, ModelError, GRAVITY_CONSTANT};
use crate::linalg::{pcg, CsrMatrix, DenseVector, LinalgError, PcgConfig, SolveStats};

/// Mapping between interior grid nodes and unknown indices (x fastest).
/// Boundary nodes carry the homogeneous Dirichlet value and are eliminated.
#[derive(Debug, Clone, PartialEq)]
pub struct DofMap {
    grid: Grid,
    ranges: [Range<usize>; 3],
}

impl DofMap {
    pub fn new(grid: Grid) -> Result<Self, ModelError> {
        if grid.nx < 2 {
            return Err(ModelError::GridTooSmall(format!(
                "need at least 3 nodes along x, got {}",
                grid.nx + 1
            )));
        }
        let ranges = grid.axes().map(|a| a.interior_nodes());
        Ok(Self { grid, ranges })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn dims(&self) -> [usize; 3] {
        [
            self.ranges[0].len(),
            self.ranges[1].len(),
            self.ranges[2].len(),
        ]
    }

    pub fn len(&self) -> usize {
        self.dims().iter().product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Unknown index of node `(i, j, k)`, or `None` for boundary nodes.
    pub fn index(&self, i: usize, j: usize, k: usize) -> Option<usize> {
        let [rx, ry, rz] = &self.ranges;
        if !(rx.contains(&i) && ry.contains(&j) && rz.contains(&k)) {
            return None;
        }
        let [mx, my, _] = self.dims();
        Some((i - rx.start) + mx * ((j - ry.start) + my * (k - rz.start)))
    }

    pub fn node(&self, dof: usize) -> [usize; 3] {
        let [mx, my, _] = self.dims();
        [
            dof % mx + self.ranges[0].start,
            (dof / mx) % my + self.ranges[1].start,
            dof / (mx * my) + self.ranges[2].start,
        ]
    }

    pub fn nodes(&self) -> impl Iterator<Item = [usize; 3]> + '_ {
        (0..self.len()).map(|d| self.node(d))
    }
}

/// Discrete `-Δ Φ = 4πG δρ` with homogeneous Dirichlet boundary.
#[derive(Debug, Clone)]
pub struct PoissonSystem {
    pub matrix: CsrMatrix,
    pub rhs: DenseVector,
    pub dofs: DofMap,
}

/// Stencil weights `1/h²` of the active axes, zero for collapsed ones.
pub(crate) fn inverse_square_spacings(grid: &Grid) -> [f64; 3] {
    grid.axes()
        .map(|a| if a.active { 1.0 / (a.spacing() * a.spacing()) } else { 0.0 })
}

/// Second-order 7-point (5-point in 2D, 3-point in 1D) matrix of `-Δ`.
pub fn laplacian_matrix(grid: &Grid) -> Result<(CsrMatrix, DofMap), ModelError> {
    let dofs = DofMap::new(*grid)?;
    let w = inverse_square_spacings(grid);
    let diag = 2.0 * (w[0] + w[1] + w[2]);
    let mut entries = Vec::with_capacity(dofs.len() * 7);
    for (row, [i, j, k]) in dofs.nodes().enumerate() {
        entries.push((row, row, diag));
        let neighbours = [
            (i.wrapping_sub(1), j, k, w[0]),
            (i + 1, j, k, w[0]),
            (i, j.wrapping_sub(1), k, w[1]),
            (i, j + 1, k, w[1]),
            (i, j, k.wrapping_sub(1), w[2]),
            (i, j, k + 1, w[2]),
        ];
        for (ni, nj, nk, weight) in neighbours {
            if weight == 0.0 {
                continue;
            }
            if let Some(col) = dofs.index(ni, nj, nk) {
                entries.push((row, col, -weight));
            }
        }
    }
    let n = dofs.len();
    let matrix = CsrMatrix::from_triplets(n, n, &entries).map_err(ModelError::Linalg)?;
    Ok((matrix, dofs))
}

/// Right-hand side of `-Δ Φ = f` sampled at the grid nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct PoissonProblem {
    forcing: NodalField,
}

impl PoissonProblem {
    /// Gravimetric forcing `f = 4πG δρ`, with δρ averaged onto the nodes.
    pub fn from_density(field: &DensityField) -> Self {
        let scale = 4.0 * PI * GRAVITY_CONSTANT;
        let grid = *field.grid();
        let [mx, my, mz] = grid.node_dims();
        let mut forcing = NodalField::zeros(grid);
        for k in 0..mz {
            for j in 0..my {
                for i in 0..mx {
                    forcing.set(i, j, k, scale * field.node_value(i, j, k));
                }
            }
        }
        Self { forcing }
    }

    pub fn from_forcing(grid: Grid, forcing: impl Fn([f64; 3]) -> f64) -> Self {
        Self {
            forcing: NodalField::from_fn(grid, forcing),
        }
    }

    pub fn grid(&self) -> &Grid {
        self.forcing.grid()
    }

    pub fn forcing(&self) -> &NodalField {
        &self.forcing
    }

    /// Monolithic discrete system over all interior nodes.
    pub fn system(&self) -> Result<PoissonSystem, ModelError> {
        let (matrix, dofs) = laplacian_matrix(self.grid())?;
        let rhs = self.forcing.to_dofs(&dofs);
        Ok(PoissonSystem { matrix, rhs, dofs })
    }
}

pub fn assemble_poisson(field: &DensityField) -> Result<PoissonSystem, ModelError> {
    PoissonProblem::from_density(field).system()
}

/// Same operator with the right-hand side sampled from `forcing` at the
/// nodes, for manufactured-solution studies.
pub fn assemble_poisson_with_forcing(
    grid: &Grid,
    forcing: impl Fn([f64; 3]) -> f64,
) -> Result<PoissonSystem, ModelError> {
    PoissonProblem::from_forcing(*grid, forcing).system()
}

/// Potential of `field` at `probes` (coordinates of the unpadded box) from
/// a Dirichlet solve on the box padded by `padding` times its extent on each
/// side of every active axis.
pub fn padded_potential(
    field: &DensityField,
    padding: f64,
    probes: &[[f64; 3]],
    cfg: &PcgConfig,
) -> Result<(Vec<f64>, SolveStats), ModelError> {
    if !(padding >= 0.0) {
        return Err(ModelError::InvalidArgument(format!(
            "padding must be nonnegative, got {padding}"
        )));
    }
    let (big, pad) = field.padded(padding);
    let (phi, stats) = assemble_poisson(&big)?.solve(cfg)?;
    let g = field.grid();
    let shift = [pad[0] as f64 * g.hx(), pad[1] as f64 * g.hy(), pad[2] as f64 * g.hz()];
    let axes = g.axes();
    let values = probes
        .iter()
        .map(|x| {
            let mut y = [0.0; 3];
            for d in 0..3 {
                y[d] = if axes[d].active { x[d] + shift[d] } else { x[d] };
            }
            phi.interpolate(y)
        })
        .collect();
    Ok((values, stats))
}

impl PoissonSystem {
    pub fn solve(&self, cfg: &PcgConfig) -> Result<(NodalField, SolveStats), LinalgError> {
        let (x, stats) = pcg(&self.matrix, &self.rhs, cfg)?;
        Ok((NodalField::from_dofs(&self.dofs, &x), stats))
    }
}

/// Values on every grid node, including the Dirichlet boundary.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField {
    grid: Grid,
    values: Vec<f64>,
}

impl NodalField {
    pub fn zeros(grid: Grid) -> Self {
        Self {
            values: vec![0.0; grid.node_count()],
            grid,
        }
    }

    pub fn from_dofs(dofs: &DofMap, x: &[f64]) -> Self {
        let mut out = Self::zeros(*dofs.grid());
        for (d, [i, j, k]) in dofs.nodes().enumerate() {
            let idx = out.grid.node_index(i, j, k);
            out.values[idx] = x[d];
        }
        out
    }

    pub fn from_fn(grid: Grid, f: impl Fn([f64; 3]) -> f64) -> Self {
        let [mx, my, mz] = grid.node_dims();
        let mut values = Vec::with_capacity(grid.node_count());
        for k in 0..mz {
            for j in 0..my {
                for i in 0..mx {
                    values.push(f(grid.node_coordinates(i, j, k)));
                }
            }
        }
        Self { grid, values }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.grid.node_index(i, j, k)]
    }

    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.grid.node_index(i, j, k);
        self.values[idx] = v;
    }

    /// Restriction to the unknowns of `dofs`.
    pub fn to_dofs(&self, dofs: &DofMap) -> DenseVector {
        dofs.nodes().map(|[i, j, k]| self.get(i, j, k)).collect()
    }

    /// Cell-center values (mean of the cell's corner nodes), in the
    /// density-grid layout.
    pub fn to_cell_centers(&self) -> Vec<f64> {
        let g = &self.grid;
        let [ax, ay, az] = g.axes();
        let corners = |a: &super::Axis, c: usize| -> Vec<usize> {
            if a.active {
                vec![c, c + 1]
            } else {
                vec![0]
            }
        };
        let mut out = Vec::with_capacity(g.cell_count());
        for k in 0..g.nz {
            for j in 0..g.ny {
                for i in 0..g.nx {
                    let mut sum = 0.0;
                    let mut n = 0;
                    for nk in corners(&az, k) {
                        for nj in corners(&ay, j) {
                            for ni in corners(&ax, i) {
                                sum += self.get(ni, nj, nk);
                                n += 1;
                            }
                        }
                    }
                    out.push(sum / n as f64);
                }
            }
        }
        out
    }

    /// Largest absolute difference to another field on the same grid.
    pub fn max_abs_diff(&self, other: &NodalField) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| f64::max(m, (a - b).abs()))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| f64::max(m, v.abs()))
    }

    /// Trilinear interpolation at a point inside the box; collapsed axes are
    /// constant.
    pub fn interpolate(&self, x: [f64; 3]) -> f64 {
        let axes = self.grid.axes();
        let mut base = [0usize; 3];
        let mut frac = [0.0; 3];
        for d in 0..3 {
            let a = &axes[d];
            if a.active {
                let t = (x[d] / a.spacing()).clamp(0.0, a.cells as f64);
                let i = (t.floor() as usize).min(a.cells - 1);
                base[d] = i;
                frac[d] = t - i as f64;
            }
        }
        let mut sum = 0.0;
        for corner in 0..8usize {
            let mut w = 1.0;
            let mut idx = base;
            for d in 0..3 {
                let up = corner >> d & 1 == 1;
                if up {
                    if !axes[d].active {
                        w = 0.0;
                        break;
                    }
                    idx[d] += 1;
                    w *= frac[d];
                } else {
                    w *= 1.0 - frac[d];
                }
            }
            if w != 0.0 {
                sum += w * self.get(idx[0], idx[1], idx[2]);
            }
        }
        sum
    }
}

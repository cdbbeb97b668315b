use super::ModelError;

/// Uniform structured hexahedral grid of `nx * ny * nz` cells.
///
/// An axis with a single cell along `y` or `z` is collapsed: it carries no
/// finite-difference stencil and its nodes sit on the mid-plane. `nz == 1`
/// therefore gives the 2D five-point problem and `ny == nz == 1` a 1D one.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nz: usize,
    pub lx: f64,
    pub ly: f64,
    pub lz: f64,
}

/// Cell count, node count and spacing along a single axis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Axis {
    pub cells: usize,
    pub length: f64,
    /// Whether this axis carries a stencil (x always does).
    pub active: bool,
}

impl Axis {
    pub fn spacing(&self) -> f64 {
        self.length / self.cells as f64
    }

    pub fn node_count(&self) -> usize {
        if self.active {
            self.cells + 1
        } else {
            1
        }
    }

    /// Node indices that are unknowns (not on the Dirichlet boundary).
    pub fn interior_nodes(&self) -> std::ops::Range<usize> {
        if self.active {
            1..self.cells
        } else {
            0..1
        }
    }

    pub fn interior_count(&self) -> usize {
        self.interior_nodes().len()
    }

    pub fn node_coordinate(&self, i: usize) -> f64 {
        if self.active {
            i as f64 * self.spacing()
        } else {
            0.5 * self.length
        }
    }

    pub fn cell_center(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.spacing()
    }

    /// Cells sharing node `i` along this axis.
    pub fn cells_around_node(&self, i: usize) -> impl Iterator<Item = usize> {
        let (lo, hi) = if self.active {
            (i.saturating_sub(1), i.min(self.cells - 1))
        } else {
            (0, 0)
        };
        lo..=hi
    }
}

pub fn make_grid(
    nx: usize,
    ny: usize,
    nz: usize,
    lx: f64,
    ly: f64,
    lz: f64,
) -> Result<Grid, ModelError> {
    for (name, n) in [("nx", nx), ("ny", ny), ("nz", nz)] {
        if n == 0 {
            return Err(ModelError::InvalidGrid(format!("{name} must be at least 1")));
        }
    }
    for (name, l) in [("lx", lx), ("ly", ly), ("lz", lz)] {
        if !(l > 0.0 && l.is_finite()) {
            return Err(ModelError::InvalidGrid(format!(
                "{name} must be positive and finite, got {l}"
            )));
        }
    }
    Ok(Grid {
        nx,
        ny,
        nz,
        lx,
        ly,
        lz,
    })
}

impl Grid {
    pub fn hx(&self) -> f64 {
        self.lx / self.nx as f64
    }

    pub fn hy(&self) -> f64 {
        self.ly / self.ny as f64
    }

    pub fn hz(&self) -> f64 {
        self.lz / self.nz as f64
    }

    pub fn axes(&self) -> [Axis; 3] {
        [
            Axis {
                cells: self.nx,
                length: self.lx,
                active: true,
            },
            Axis {
                cells: self.ny,
                length: self.ly,
                active: self.ny > 1,
            },
            Axis {
                cells: self.nz,
                length: self.lz,
                active: self.nz > 1,
            },
        ]
    }

    /// Number of axes carrying a stencil (1, 2 or 3).
    pub fn dimension(&self) -> usize {
        self.axes().iter().filter(|a| a.active).count()
    }

    pub fn cell_count(&self) -> usize {
        self.nx * self.ny * self.nz
    }

    pub fn cell_volume(&self) -> f64 {
        self.hx() * self.hy() * self.hz()
    }

    /// Linear cell index, x fastest, then y, then z.
    pub fn cell_index(&self, i: usize, j: usize, k: usize) -> usize {
        i + self.nx * (j + self.ny * k)
    }

    pub fn cell_center(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let [ax, ay, az] = self.axes();
        [ax.cell_center(i), ay.cell_center(j), az.cell_center(k)]
    }

    pub fn node_dims(&self) -> [usize; 3] {
        self.axes().map(|a| a.node_count())
    }

    pub fn node_count(&self) -> usize {
        self.node_dims().iter().product()
    }

    pub fn node_index(&self, i: usize, j: usize, k: usize) -> usize {
        let [mx, my, _] = self.node_dims();
        i + mx * (j + my * k)
    }

    pub fn node_coordinates(&self, i: usize, j: usize, k: usize) -> [f64; 3] {
        let [ax, ay, az] = self.axes();
        [
            ax.node_coordinate(i),
            ay.node_coordinate(j),
            az.node_coordinate(k),
        ]
    }

    /// Smallest spacing among the active axes.
    pub fn min_spacing(&self) -> f64 {
        self.axes()
            .iter()
            .filter(|a| a.active)
            .map(|a| a.spacing())
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest extent among the active axes.
    pub fn max_extent(&self) -> f64 {
        self.axes()
            .iter()
            .filter(|a| a.active)
            .map(|a| a.length)
            .fold(0.0, f64::max)
    }
}

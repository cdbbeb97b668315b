use nalgebra::DMatrix;

use super::{Partition, SchwarzError};
use crate::linalg::{CsrMatrix, DenseVector};
use crate::model::{inverse_square_spacings, Grid, PoissonProblem};
use crate::rate::TransmissionParams;

/// Interior node plane shared by two slabs, indexed `j + my * k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfacePlane {
    pub dims: [usize; 2],
    /// `1/hy²`, `1/hz²` (zero on collapsed axes).
    pub weights: [f64; 2],
}

impl InterfacePlane {
    pub fn for_grid(grid: &Grid) -> Self {
        let [_, ay, az] = grid.axes();
        let w = inverse_square_spacings(grid);
        Self {
            dims: [ay.interior_count(), az.interior_count()],
            weights: [w[1], w[2]],
        }
    }

    pub fn len(&self) -> usize {
        self.dims[0] * self.dims[1]
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Entries of the discrete `-∂ττ` on the plane, homogeneous Dirichlet at
    /// its rim.
    pub fn tangential_triplets(&self) -> Vec<(usize, usize, f64)> {
        let [my, mz] = self.dims;
        let [wy, wz] = self.weights;
        let mut out = Vec::new();
        for k in 0..mz {
            for j in 0..my {
                let row = j + my * k;
                let diag = 2.0 * (wy + wz);
                if diag != 0.0 {
                    out.push((row, row, diag));
                }
                if wy != 0.0 {
                    if j > 0 {
                        out.push((row, row - 1, -wy));
                    }
                    if j + 1 < my {
                        out.push((row, row + 1, -wy));
                    }
                }
                if wz != 0.0 {
                    if k > 0 {
                        out.push((row, row - my, -wz));
                    }
                    if k + 1 < mz {
                        out.push((row, row + my, -wz));
                    }
                }
            }
        }
        out
    }
}

/// Transmission operator acting on interface traces.
#[derive(Debug, Clone, PartialEq)]
pub enum InterfaceOperator {
    /// `p - q ∂ττ`.
    Robin { p: f64, q: f64 },
    /// Nonlocal operator, e.g. a discrete Dirichlet-to-Neumann map.
    Dense(DMatrix<f64>),
}

impl InterfaceOperator {
    pub fn is_zero(&self) -> bool {
        match self {
            InterfaceOperator::Robin { p, q } => *p == 0.0 && *q == 0.0,
            InterfaceOperator::Dense(m) => m.iter().all(|v| *v == 0.0),
        }
    }

    pub fn triplets(&self, plane: &InterfacePlane) -> Vec<(usize, usize, f64)> {
        match self {
            InterfaceOperator::Robin { p, q } => {
                let mut out: Vec<_> = if *q != 0.0 {
                    plane
                        .tangential_triplets()
                        .into_iter()
                        .map(|(i, j, v)| (i, j, q * v))
                        .collect()
                } else {
                    Vec::new()
                };
                if *p != 0.0 {
                    out.extend((0..plane.len()).map(|i| (i, i, *p)));
                }
                out
            }
            InterfaceOperator::Dense(m) => {
                let mut out = Vec::new();
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        if m[(i, j)] != 0.0 {
                            out.push((i, j, m[(i, j)]));
                        }
                    }
                }
                out
            }
        }
    }

    pub fn apply(&self, plane: &InterfacePlane, v: &[f64]) -> Result<DenseVector, SchwarzError> {
        if v.len() != plane.len() {
            return Err(SchwarzError::InterfaceSize {
                expected: plane.len(),
                found: v.len(),
            });
        }
        let mut out = vec![0.0; v.len()];
        match self {
            InterfaceOperator::Dense(m) if m.nrows() != v.len() || m.ncols() != v.len() => {
                return Err(SchwarzError::InterfaceSize {
                    expected: m.nrows(),
                    found: v.len(),
                });
            }
            _ => {}
        }
        for (i, j, a) in self.triplets(plane) {
            out[i] += a * v[j];
        }
        Ok(out)
    }
}

/// One side of an interface as seen from a subdomain.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceSide {
    pub interface: usize,
    pub x_node: usize,
    /// Local unknown of each plane node, in plane order.
    pub dofs: Vec<usize>,
    pub operator: InterfaceOperator,
}

/// Local system of one slab: interior Laplacian rows plus Robin rows on the
/// duplicated interface planes.
///
/// An interface row of the subdomain to the left of the plane at `x_m` is
///
/// ```text
/// (u_m - u_{m-1}) / hx + hx/2 (-∂ττ u_m - f_m) + A u_m = g
/// ```
///
/// (one-sided normal flux, half-cell balance, transmission operator), stored
/// divided by `hx` so the local matrix stays symmetric.
#[derive(Debug, Clone)]
pub struct SubdomainSystem {
    pub index: usize,
    pub grid: Grid,
    /// Global x node index of every local node column.
    pub x_nodes: Vec<usize>,
    pub plane: InterfacePlane,
    pub matrix: CsrMatrix,
    pub rhs_base: DenseVector,
    pub left: Option<InterfaceSide>,
    pub right: Option<InterfaceSide>,
}

impl SubdomainSystem {
    pub fn len(&self) -> usize {
        self.x_nodes.len() * self.plane.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn local_index(&self, xl: usize, plane_index: usize) -> usize {
        xl + self.x_nodes.len() * plane_index
    }

    pub fn sides(&self) -> impl Iterator<Item = &InterfaceSide> {
        self.left.iter().chain(self.right.iter())
    }

    /// Local right-hand side for the given Robin data on each side.
    pub fn rhs(&self, left_data: Option<&[f64]>, right_data: Option<&[f64]>) -> DenseVector {
        let mut rhs = self.rhs_base.clone();
        let inv_hx = 1.0 / self.grid.hx();
        for (side, data) in [(&self.left, left_data), (&self.right, right_data)] {
            if let (Some(side), Some(data)) = (side, data) {
                for (&dof, g) in side.dofs.iter().zip(data) {
                    rhs[dof] += inv_hx * g;
                }
            }
        }
        rhs
    }

    /// Trace of a local solution on one side's plane.
    pub fn trace(&self, side: &InterfaceSide, u: &[f64]) -> DenseVector {
        side.dofs.iter().map(|&d| u[d]).collect()
    }

    /// Local matrix with the transmission terms removed.
    pub fn neumann_matrix(&self) -> CsrMatrix {
        let inv_hx = 1.0 / self.grid.hx();
        let mut entries = self.matrix.triplets();
        for side in self.sides() {
            for (i, j, v) in side.operator.triplets(&self.plane) {
                entries.push((side.dofs[i], side.dofs[j], -inv_hx * v));
            }
        }
        CsrMatrix::from_triplets(self.len(), self.len(), &entries)
            .expect("subdomain indices are in range")
    }
}

/// Robin operators `(left side, right side)` of subdomain `s`: the subdomain
/// left of an interface uses `p1 - q1 ∂ττ`, the one right of it `p2 - q2 ∂ττ`.
pub fn robin_operators(
    partition: &Partition,
    s: usize,
    tp: &TransmissionParams,
) -> Result<(Option<InterfaceOperator>, Option<InterfaceOperator>), SchwarzError> {
    let side1 = InterfaceOperator::Robin { p: tp.p1, q: tp.q1 };
    let side2 = InterfaceOperator::Robin { p: tp.p2, q: tp.q2 };
    if !partition.interfaces.is_empty() && side1.is_zero() && side2.is_zero() {
        return Err(SchwarzError::IllPosed(
            "p = q = 0 on both sides of an interface".into(),
        ));
    }
    Ok((
        partition.left_interface(s).map(|_| side2.clone()),
        partition.right_interface(s).map(|_| side1.clone()),
    ))
}

pub fn assemble_subdomain(
    problem: &PoissonProblem,
    partition: &Partition,
    s: usize,
    tp: &TransmissionParams,
) -> Result<SubdomainSystem, SchwarzError> {
    let (left, right) = robin_operators(partition, s, tp)?;
    assemble_with_operators(problem, partition, s, left, right)
}

pub(crate) fn assemble_with_operators(
    problem: &PoissonProblem,
    partition: &Partition,
    s: usize,
    left_op: Option<InterfaceOperator>,
    right_op: Option<InterfaceOperator>,
) -> Result<SubdomainSystem, SchwarzError> {
    let grid = *problem.grid();
    if grid.nx < 2 {
        return Err(SchwarzError::Partition("grid needs at least 2 cells along x".into()));
    }
    let slab = partition
        .slabs
        .get(s)
        .ok_or_else(|| SchwarzError::Partition(format!("no subdomain {s}")))?
        .clone();
    let left_iface = partition.left_interface(s);
    let right_iface = partition.right_interface(s);
    if left_iface.is_some() != left_op.is_some() || right_iface.is_some() != right_op.is_some() {
        return Err(SchwarzError::Partition(format!(
            "transmission operators do not match the interfaces of subdomain {s}"
        )));
    }

    let first = if left_iface.is_some() { slab.start } else { slab.start + 1 };
    let last = if right_iface.is_some() { slab.end } else { slab.end - 1 };
    let x_nodes: Vec<usize> = (first..=last).collect();
    let nxl = x_nodes.len();
    let plane = InterfacePlane::for_grid(&grid);
    let [my, mz] = plane.dims;
    let [_, ay, az] = grid.axes();
    let (j0, k0) = (ay.interior_nodes().start, az.interior_nodes().start);
    let w = inverse_square_spacings(&grid);
    let hx = grid.hx();

    let local = |xl: usize, pi: usize| xl + nxl * pi;
    let is_interface = |gx: usize| {
        (left_iface.is_some() && gx == slab.start) || (right_iface.is_some() && gx == slab.end)
    };

    let n = nxl * plane.len();
    let mut entries = Vec::with_capacity(n * 7);
    let mut rhs_base = vec![0.0; n];
    for kp in 0..mz {
        for jp in 0..my {
            let pi = jp + my * kp;
            for (xl, &gx) in x_nodes.iter().enumerate() {
                let row = local(xl, pi);
                let iface = is_interface(gx);
                let share = if iface { 0.5 } else { 1.0 };
                let x_diag = if iface { w[0] } else { 2.0 * w[0] };
                entries.push((row, row, x_diag + share * 2.0 * (w[1] + w[2])));
                if xl > 0 {
                    entries.push((row, local(xl - 1, pi), -w[0]));
                }
                if xl + 1 < nxl {
                    entries.push((row, local(xl + 1, pi), -w[0]));
                }
                if w[1] != 0.0 {
                    if jp > 0 {
                        entries.push((row, local(xl, pi - 1), -share * w[1]));
                    }
                    if jp + 1 < my {
                        entries.push((row, local(xl, pi + 1), -share * w[1]));
                    }
                }
                if w[2] != 0.0 {
                    if kp > 0 {
                        entries.push((row, local(xl, pi - my), -share * w[2]));
                    }
                    if kp + 1 < mz {
                        entries.push((row, local(xl, pi + my), -share * w[2]));
                    }
                }
                rhs_base[row] = share * problem.forcing().get(gx, jp + j0, kp + k0);
            }
        }
    }

    let make_side = |iface: Option<usize>, op: Option<InterfaceOperator>, xl: usize| {
        iface.zip(op).map(|(interface, operator)| InterfaceSide {
            interface,
            x_node: x_nodes[xl],
            dofs: (0..plane.len()).map(|pi| local(xl, pi)).collect(),
            operator,
        })
    };
    let left = make_side(left_iface, left_op, 0);
    let right = make_side(right_iface, right_op, nxl - 1);

    for side in left.iter().chain(right.iter()) {
        if let InterfaceOperator::Dense(m) = &side.operator {
            if m.nrows() != plane.len() || m.ncols() != plane.len() {
                return Err(SchwarzError::InterfaceSize {
                    expected: plane.len(),
                    found: m.nrows(),
                });
            }
        }
        for (i, j, v) in side.operator.triplets(&plane) {
            entries.push((side.dofs[i], side.dofs[j], v / hx));
        }
    }

    let matrix = CsrMatrix::from_triplets(n, n, &entries).map_err(SchwarzError::Linalg)?;
    Ok(SubdomainSystem {
        index: s,
        grid,
        x_nodes,
        plane,
        matrix,
        rhs_base,
        left,
        right,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{laplacian_matrix, make_grid, DensityField, DofMap};
    use crate::schwarz::partition_x;

    fn sym(p: f64, q: f64) -> TransmissionParams {
        TransmissionParams::oo2_symmetric(p, q).unwrap()
    }

    #[test]
    fn one_dimensional_interface_row() {
        // Left slab of a 4-cell 1D grid: unknowns at nodes 1 and 2 (plane).
        let g = make_grid(4, 1, 1, 4.0, 1.0, 1.0).unwrap();
        let problem = PoissonProblem::from_forcing(g, |_| 0.0);
        let part = partition_x(&g, 2).unwrap();
        let tp = TransmissionParams::oo0_symmetric(1.0).unwrap();
        let sub = assemble_subdomain(&problem, &part, 0, &tp).unwrap();
        assert_eq!(sub.x_nodes, vec![1, 2]);
        assert_eq!(sub.matrix.to_dense(), vec![vec![2.0, -1.0], vec![-1.0, 1.0 + 1.0]]);
    }

    #[test]
    fn interior_rows_match_monolithic_rows() {
        let g = make_grid(12, 6, 5, 3.0, 1.5, 1.0).unwrap();
        let field = DensityField::from_fn(g, |[x, y, z]| x + 2.0 * y - z);
        let problem = PoissonProblem::from_density(&field);
        let part = partition_x(&g, 3).unwrap();
        let (global, dofs) = laplacian_matrix(&g).unwrap();
        let mono = problem.system().unwrap();
        let tp = sym(2.0, 0.3);
        for s in 0..3 {
            let sub = assemble_subdomain(&problem, &part, s, &tp).unwrap();
            for pi in 0..sub.plane.len() {
                for (xl, &gx) in sub.x_nodes.iter().enumerate() {
                    if sub.sides().any(|side| side.x_node == gx) {
                        continue;
                    }
                    let [my, _] = sub.plane.dims;
                    let (j, k) = (pi % my + 1, pi / my + 1);
                    let grow = dofs.index(gx, j, k).unwrap();
                    let lrow = sub.local_index(xl, pi);
                    let mut global_row: Vec<(usize, usize, usize, f64)> = global
                        .row(grow)
                        .map(|(c, v)| {
                            let [a, b, c3] = dofs.node(c);
                            (a, b, c3, v)
                        })
                        .collect();
                    let mut local_row: Vec<(usize, usize, usize, f64)> = sub
                        .matrix
                        .row(lrow)
                        .map(|(c, v)| {
                            let xl2 = c % sub.x_nodes.len();
                            let pi2 = c / sub.x_nodes.len();
                            (sub.x_nodes[xl2], pi2 % my + 1, pi2 / my + 1, v)
                        })
                        .collect();
                    global_row.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    local_row.sort_by(|a, b| a.partial_cmp(b).unwrap());
                    assert_eq!(global_row, local_row);
                    assert_eq!(sub.rhs_base[lrow], mono.rhs[grow]);
                }
            }
        }
        let _ = DofMap::new(g).unwrap();
    }

    #[test]
    fn zeroth_order_robin_term_is_diagonal() {
        let g = make_grid(8, 5, 1, 2.0, 1.0, 1.0).unwrap();
        let problem = PoissonProblem::from_forcing(g, |_| 1.0);
        let part = partition_x(&g, 2).unwrap();
        let with = assemble_subdomain(&problem, &part, 0, &sym(3.0, 0.0)).unwrap();
        let without = with.neumann_matrix();
        let side = with.right.as_ref().unwrap();
        for i in 0..with.len() {
            for j in 0..with.len() {
                let d = with.matrix.get(i, j) - without.get(i, j);
                let on_plane = side.dofs.contains(&i) && i == j;
                if on_plane {
                    assert!((d - 3.0 / g.hx()).abs() < 1e-12);
                } else {
                    assert_eq!(d, 0.0);
                }
            }
        }
    }

    #[test]
    fn local_matrices_are_symmetric() {
        let g = make_grid(9, 4, 3, 1.0, 1.0, 1.0).unwrap();
        let problem = PoissonProblem::from_forcing(g, |_| 1.0);
        let part = partition_x(&g, 4).unwrap();
        let tp = TransmissionParams::oo2_unsymmetric(1.0, 0.2, 3.0, 0.05).unwrap();
        for s in 0..4 {
            let sub = assemble_subdomain(&problem, &part, s, &tp).unwrap();
            assert_eq!(sub.matrix, sub.matrix.transpose());
            assert!(sub.matrix.diagonal().iter().all(|&d| d > 0.0));
        }
    }

    #[test]
    fn sides_follow_left_right_assignment() {
        let g = make_grid(9, 4, 1, 1.0, 1.0, 1.0).unwrap();
        let problem = PoissonProblem::from_forcing(g, |_| 1.0);
        let part = partition_x(&g, 3).unwrap();
        let tp = TransmissionParams::oo2_unsymmetric(1.0, 0.2, 3.0, 0.05).unwrap();
        let mid = assemble_subdomain(&problem, &part, 1, &tp).unwrap();
        assert_eq!(mid.left.as_ref().unwrap().operator, InterfaceOperator::Robin { p: 3.0, q: 0.05 });
        assert_eq!(mid.right.as_ref().unwrap().operator, InterfaceOperator::Robin { p: 1.0, q: 0.2 });
        assert_eq!(mid.left.as_ref().unwrap().x_node, 3);
        assert_eq!(mid.right.as_ref().unwrap().x_node, 6);
    }

    #[test]
    fn ill_posed_parameters_rejected() {
        let g = make_grid(4, 3, 1, 1.0, 1.0, 1.0).unwrap();
        let problem = PoissonProblem::from_forcing(g, |_| 1.0);
        let part = partition_x(&g, 2).unwrap();
        assert!(matches!(
            assemble_subdomain(&problem, &part, 0, &sym(0.0, 0.0)),
            Err(SchwarzError::IllPosed(_))
        ));
        let single = partition_x(&g, 1).unwrap();
        assert!(assemble_subdomain(&problem, &single, 0, &sym(0.0, 0.0)).is_ok());
    }

    #[test]
    fn operator_application() {
        let plane = InterfacePlane { dims: [3, 1], weights: [1.0, 0.0] };
        let op = InterfaceOperator::Robin { p: 2.0, q: 1.0 };
        let v = op.apply(&plane, &[1.0, 2.0, 3.0]).unwrap();
        // 2v + T v with T = tridiag(-1, 2, -1)
        assert_eq!(v, vec![2.0 + 0.0, 4.0 + 0.0, 6.0 + 4.0]);
        assert!(op.apply(&plane, &[1.0]).is_err());
    }
}

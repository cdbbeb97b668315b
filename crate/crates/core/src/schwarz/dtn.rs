use nalgebra::DMatrix;
use rayon::prelude::*;

use super::{SchwarzError, SubdomainSystem};
use crate::linalg::{pcg, CsrMatrix, PcgConfig};

/// Largest interface plane for which the dense map is formed.
pub const MAX_DTN_PLANE: usize = 2000;

/// Discrete Dirichlet-to-Neumann map of a subdomain with a single interface,
/// in the units of an interface operator (`hx` times the Schur complement of
/// its Neumann matrix onto the plane).
///
/// Used as the transmission operator of the neighbour across that interface,
/// it makes the two-subdomain iteration exact after the second round.
pub fn exact_dtn_transmission(subdomain: &SubdomainSystem) -> Result<DMatrix<f64>, SchwarzError> {
    let mut sides = subdomain.sides();
    let side = match (sides.next(), sides.next()) {
        (Some(side), None) => side,
        _ => {
            return Err(SchwarzError::Unsupported(
                "exact DtN needs a subdomain with exactly one interface".into(),
            ))
        }
    };
    let m = subdomain.plane.len();
    if m > MAX_DTN_PLANE {
        return Err(SchwarzError::Unsupported(format!(
            "interface plane of {m} nodes is too large for a dense DtN map"
        )));
    }
    let k = subdomain.neumann_matrix();
    let n = k.nrows();

    let mut plane_pos = vec![None; n];
    for (pos, &d) in side.dofs.iter().enumerate() {
        plane_pos[d] = Some(pos);
    }
    let mut interior_pos = vec![None; n];
    let mut interior = Vec::new();
    for d in 0..n {
        if plane_pos[d].is_none() {
            interior_pos[d] = Some(interior.len());
            interior.push(d);
        }
    }

    let mut k_gg = DMatrix::zeros(m, m);
    let mut k_ii = Vec::new();
    // Column c of K_IΓ as (interior position, value) pairs.
    let mut k_ig = vec![Vec::new(); m];
    for (i, j, v) in k.triplets() {
        match (plane_pos[i], plane_pos[j], interior_pos[i], interior_pos[j]) {
            (Some(a), Some(b), _, _) => k_gg[(a, b)] += v,
            (None, Some(b), Some(a), _) => k_ig[b].push((a, v)),
            (None, None, Some(a), Some(b)) => k_ii.push((a, b, v)),
            _ => {}
        }
    }
    if interior.is_empty() {
        return Ok(k_gg * subdomain.grid.hx());
    }
    let ni = interior.len();
    let k_ii = CsrMatrix::from_triplets(ni, ni, &k_ii)?;
    let cfg = PcgConfig {
        tolerance: 1e-14,
        max_iterations: 20 * ni,
    };

    // S = K_ΓΓ - K_ΓI K_II⁻¹ K_IΓ, using K_ΓI = K_IΓᵀ.
    let corrections = k_ig
        .par_iter()
        .map(|col| {
            let mut rhs = vec![0.0; ni];
            for &(a, v) in col {
                rhs[a] = v;
            }
            let (y, _) = pcg(&k_ii, &rhs, &cfg)?;
            Ok(k_ig
                .iter()
                .map(|row| row.iter().map(|&(a, v)| v * y[a]).sum::<f64>())
                .collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>, SchwarzError>>()?;
    let mut s = k_gg;
    for (c, col) in corrections.iter().enumerate() {
        for (r, v) in col.iter().enumerate() {
            s[(r, c)] -= v;
        }
    }
    let s = (&s + s.transpose()) * (0.5 * subdomain.grid.hx());
    Ok(s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_grid, PoissonProblem};
    use crate::schwarz::{assemble_with_operators, partition_x, InterfaceOperator};

    fn neumann(nx: usize, ny: usize, lx: f64, s: usize) -> SubdomainSystem {
        let g = make_grid(nx, ny, 1, lx, 1.0, 1.0).unwrap();
        let problem = PoissonProblem::from_forcing(g, |_| 0.0);
        let part = partition_x(&g, 2).unwrap();
        let zero = || Some(InterfaceOperator::Robin { p: 0.0, q: 0.0 });
        let (l, r) = if s == 0 { (None, zero()) } else { (zero(), None) };
        assemble_with_operators(&problem, &part, s, l, r).unwrap()
    }

    #[test]
    fn one_dimensional_map() {
        // Slab of 2 unit cells: harmonic extension of u at the plane is
        // linear, so the outward flux is u / 2.
        let sub = neumann(4, 1, 4.0, 1);
        let s = exact_dtn_transmission(&sub).unwrap();
        assert_eq!(s.shape(), (1, 1));
        assert!((s[(0, 0)] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn one_dimensional_map_scales_with_width() {
        // Slab of width L: flux u / L.
        let sub = neumann(10, 1, 1.0, 0);
        let s = exact_dtn_transmission(&sub).unwrap();
        assert!((s[(0, 0)] - 1.0 / 0.5).abs() < 1e-10);
    }

    #[test]
    fn map_is_symmetric_positive_definite() {
        let sub = neumann(12, 9, 1.0, 0);
        let s = exact_dtn_transmission(&sub).unwrap();
        assert_eq!(s.nrows(), 8);
        assert!((&s - s.transpose()).amax() < 1e-12);
        let eig = s.clone().symmetric_eigen();
        assert!(eig.eigenvalues.iter().all(|&l| l > 0.0));
    }

    #[test]
    fn matches_dense_schur_complement() {
        let sub = neumann(6, 5, 1.5, 1);
        let s = exact_dtn_transmission(&sub).unwrap();
        let k = DMatrix::from_fn(sub.len(), sub.len(), |i, j| sub.neumann_matrix().get(i, j));
        let side = sub.left.as_ref().unwrap();
        let interior: Vec<usize> = (0..sub.len()).filter(|d| !side.dofs.contains(d)).collect();
        let kgg = k.select_rows(&side.dofs).select_columns(&side.dofs);
        let kgi = k.select_rows(&side.dofs).select_columns(&interior);
        let kii = k.select_rows(&interior).select_columns(&interior);
        let schur = &kgg - &kgi * kii.lu().solve(&kgi.transpose()).unwrap();
        let expected = schur * sub.grid.hx();
        assert!((&s - &expected).amax() < 1e-10 * expected.amax());
    }

    #[test]
    fn two_sided_subdomain_rejected() {
        let g = make_grid(9, 3, 1, 1.0, 1.0, 1.0).unwrap();
        let problem = PoissonProblem::from_forcing(g, |_| 0.0);
        let part = partition_x(&g, 3).unwrap();
        let op = || Some(InterfaceOperator::Robin { p: 1.0, q: 0.0 });
        let mid = assemble_with_operators(&problem, &part, 1, op(), op()).unwrap();
        assert!(matches!(exact_dtn_transmission(&mid), Err(SchwarzError::Unsupported(_))));
    }
}

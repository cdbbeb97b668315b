use super::{check_len, dot, norm2, CsrMatrix, DenseVector, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PcgConfig {
    /// Relative residual threshold: stop once `||b - A x|| <= tolerance * ||b||`.
    pub tolerance: f64,
    pub max_iterations: usize,
}

impl Default for PcgConfig {
    fn default() -> Self {
        Self {
            tolerance: 1e-10,
            max_iterations: 10_000,
        }
    }
}

impl PcgConfig {
    pub fn validate(&self) -> Result<(), LinalgError> {
        if !(self.tolerance > 0.0) {
            return Err(LinalgError::InvalidConfig(format!(
                "tolerance must be positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(LinalgError::InvalidConfig(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Absolute residual norm `||b - A x||` of the returned iterate.
    pub final_residual: f64,
    /// Residual norm after every iteration; entry 0 is the initial residual.
    pub residual_history: Vec<f64>,
    pub converged: bool,
}

/// Jacobi-preconditioned conjugate gradient from a zero initial guess.
pub fn pcg(
    a: &CsrMatrix,
    b: &[f64],
    cfg: &PcgConfig,
) -> Result<(DenseVector, SolveStats), LinalgError> {
    pcg_with_guess(a, b, None, cfg)
}

/// Jacobi-preconditioned conjugate gradient. When the iteration budget runs
/// out, the iterate with the smallest residual seen is returned.
pub fn pcg_with_guess(
    a: &CsrMatrix,
    b: &[f64],
    x0: Option<&[f64]>,
    cfg: &PcgConfig,
) -> Result<(DenseVector, SolveStats), LinalgError> {
    cfg.validate()?;
    let n = a.nrows();
    if a.ncols() != n {
        return Err(LinalgError::NotSquare {
            nrows: n,
            ncols: a.ncols(),
        });
    }
    check_len(n, b.len())?;

    let inv_diag = a
        .diagonal()
        .into_iter()
        .enumerate()
        .map(|(row, value)| {
            if value > 0.0 {
                Ok(1.0 / value)
            } else {
                Err(LinalgError::NonPositiveDiagonal { row, value })
            }
        })
        .collect::<Result<Vec<_>, _>>()?;

    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            SolveStats {
                iterations: 0,
                final_residual: 0.0,
                residual_history: vec![0.0],
                converged: true,
            },
        ));
    }
    let threshold = cfg.tolerance * b_norm;

    let mut x = match x0 {
        Some(guess) => {
            check_len(n, guess.len())?;
            guess.to_vec()
        }
        None => vec![0.0; n],
    };
    let mut r = a.spmv(&x)?;
    for (ri, bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut r_norm = norm2(&r);
    let mut history = vec![r_norm];
    if r_norm <= threshold {
        return Ok((
            x,
            SolveStats {
                iterations: 0,
                final_residual: r_norm,
                residual_history: history,
                converged: true,
            },
        ));
    }

    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(ri, di)| ri * di).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z)?;
    let mut ap = vec![0.0; n];
    let mut best = (r_norm, x.clone());

    for iter in 1..=cfg.max_iterations {
        a.spmv_into(&p, &mut ap)?;
        let pap = dot(&p, &ap)?;
        if !(pap > 0.0) {
            // Breakdown: A is not positive definite along p (or p vanished).
            break;
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        r_norm = norm2(&r);
        history.push(r_norm);
        if r_norm < best.0 {
            best.0 = r_norm;
            best.1.copy_from_slice(&x);
        }
        if r_norm <= threshold {
            return Ok((
                x,
                SolveStats {
                    iterations: iter,
                    final_residual: r_norm,
                    residual_history: history,
                    converged: true,
                },
            ));
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z)?;
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }

    let iterations = history.len() - 1;
    Ok((
        best.1,
        SolveStats {
            iterations,
            final_residual: best.0,
            residual_history: history,
            converged: false,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use nalgebra::{DMatrix, DVector};

    fn laplacian_1d(n: usize) -> CsrMatrix {
        let mut entries = Vec::new();
        for i in 0..n {
            entries.push((i, i, 2.0));
            if i > 0 {
                entries.push((i, i - 1, -1.0));
            }
            if i + 1 < n {
                entries.push((i, i + 1, -1.0));
            }
        }
        CsrMatrix::from_triplets(n, n, &entries).unwrap()
    }

    #[test]
    fn identity_converges_in_one_iteration() {
        let (x, stats) = pcg(&CsrMatrix::identity(3), &[1.0, 2.0, 3.0], &PcgConfig::default()).unwrap();
        assert_eq!(x, vec![1.0, 2.0, 3.0]);
        assert_eq!(stats.iterations, 1);
        assert!(stats.converged);
    }

    #[test]
    fn zero_rhs_returns_zero_immediately() {
        let (x, stats) = pcg(&laplacian_1d(5), &[0.0; 5], &PcgConfig::default()).unwrap();
        assert_eq!(x, vec![0.0; 5]);
        assert_eq!(stats.iterations, 0);
        assert!(stats.converged);
    }

    #[test]
    fn laplacian_matches_dense_direct_solve() {
        let n = 50;
        let a = laplacian_1d(n);
        let x_star: Vec<f64> = (0..n).map(|i| ((i as f64) * 0.37).sin() + 0.1 * i as f64).collect();
        let b = a.spmv(&x_star).unwrap();

        let dense = DMatrix::from_fn(n, n, |i, j| a.get(i, j));
        let direct = dense.lu().solve(&DVector::from_vec(b.clone())).unwrap();
        for i in 0..n {
            assert!((direct[i] - x_star[i]).abs() < 1e-10);
        }

        let (x, stats) = pcg(&a, &b, &PcgConfig::default()).unwrap();
        assert!(stats.converged);
        for i in 0..n {
            assert!((x[i] - direct[i]).abs() < 1e-8, "i={i}");
        }
        assert!(stats.final_residual <= 1e-10 * norm2(&b));
    }

    #[test]
    fn nonpositive_diagonal_is_rejected() {
        let a = CsrMatrix::from_triplets(2, 2, &[(0, 0, 1.0), (1, 1, 0.0)]).unwrap();
        assert!(matches!(
            pcg(&a, &[1.0, 1.0], &PcgConfig::default()),
            Err(LinalgError::NonPositiveDiagonal { row: 1, .. })
        ));
    }

    #[test]
    fn budget_exhaustion_reports_best_iterate() {
        let a = laplacian_1d(100);
        let b = vec![1.0; 100];
        let cfg = PcgConfig {
            tolerance: 1e-12,
            max_iterations: 5,
        };
        let (x, stats) = pcg(&a, &b, &cfg).unwrap();
        assert!(!stats.converged);
        assert_eq!(stats.iterations, 5);
        let r: Vec<f64> = a.spmv(&x).unwrap().iter().zip(&b).map(|(ax, bi)| bi - ax).collect();
        assert!((norm2(&r) - stats.final_residual).abs() < 1e-9);
        let min = stats.residual_history.iter().cloned().fold(f64::INFINITY, f64::min);
        assert_eq!(stats.final_residual, min);
    }

    #[test]
    fn invalid_config_is_rejected() {
        let a = CsrMatrix::identity(2);
        let bad = PcgConfig {
            tolerance: 0.0,
            max_iterations: 10,
        };
        assert!(pcg(&a, &[1.0, 1.0], &bad).is_err());
        let bad = PcgConfig {
            tolerance: 1e-8,
            max_iterations: 0,
        };
        assert!(pcg(&a, &[1.0, 1.0], &bad).is_err());
    }
}

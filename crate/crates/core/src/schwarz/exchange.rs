use super::{InterfaceOperator, InterfacePlane, SchwarzError};
use crate::linalg::DenseVector;

/// Robin data on one interface: `left` feeds the subdomain left of the
/// plane, `right` the one to its right.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceData {
    pub left: DenseVector,
    pub right: DenseVector,
}

impl InterfaceData {
    pub fn zeros(n: usize) -> Self {
        Self {
            left: vec![0.0; n],
            right: vec![0.0; n],
        }
    }
}

/// New Robin data from the traces of the latest local solves.
///
/// With `A1` the operator of the left subdomain and `A2` that of the right
/// one, each side receives what the neighbour's solution satisfies for the
/// receiving operator: `g1 = -g2 + (A1 + A2) u2`, `g2 = -g1 + (A1 + A2) u1`.
pub fn exchange_interface_data(
    plane: &InterfacePlane,
    left_operator: &InterfaceOperator,
    right_operator: &InterfaceOperator,
    current: &InterfaceData,
    left_trace: &[f64],
    right_trace: &[f64],
) -> Result<InterfaceData, SchwarzError> {
    let n = plane.len();
    for len in [current.left.len(), current.right.len(), left_trace.len(), right_trace.len()] {
        if len != n {
            return Err(SchwarzError::InterfaceSize {
                expected: n,
                found: len,
            });
        }
    }
    let sum = |trace: &[f64]| -> Result<DenseVector, SchwarzError> {
        let a = left_operator.apply(plane, trace)?;
        let b = right_operator.apply(plane, trace)?;
        Ok(a.iter().zip(&b).map(|(x, y)| x + y).collect())
    };
    let from_right = sum(right_trace)?;
    let from_left = sum(left_trace)?;
    Ok(InterfaceData {
        left: from_right.iter().zip(&current.right).map(|(a, g)| a - g).collect(),
        right: from_left.iter().zip(&current.left).map(|(a, g)| a - g).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn scalar_exchange() {
        let plane = InterfacePlane { dims: [1, 1], weights: [0.0, 0.0] };
        let a1 = InterfaceOperator::Robin { p: 2.0, q: 0.0 };
        let a2 = InterfaceOperator::Robin { p: 3.0, q: 0.0 };
        let current = InterfaceData { left: vec![1.0], right: vec![4.0] };
        let new = exchange_interface_data(&plane, &a1, &a2, &current, &[10.0], &[20.0]).unwrap();
        assert_eq!(new.left, vec![-4.0 + 5.0 * 20.0]);
        assert_eq!(new.right, vec![-1.0 + 5.0 * 10.0]);
    }

    #[test]
    fn consistent_traces_are_a_fixed_point() {
        // For a continuous solution with matching fluxes the data is
        // g1 = n·∇u + A1 u, g2 = -n·∇u + A2 u, and the exchange reproduces it.
        let plane = InterfacePlane { dims: [4, 1], weights: [9.0, 0.0] };
        let a1 = InterfaceOperator::Robin { p: 0.7, q: 0.1 };
        let a2 = InterfaceOperator::Robin { p: 1.3, q: 0.02 };
        let u = vec![0.3, -1.0, 2.0, 0.5];
        let flux = vec![1.0, 2.0, -0.5, 0.25];
        let au1 = a1.apply(&plane, &u).unwrap();
        let au2 = a2.apply(&plane, &u).unwrap();
        let current = InterfaceData {
            left: flux.iter().zip(&au1).map(|(f, a)| f + a).collect(),
            right: flux.iter().zip(&au2).map(|(f, a)| a - f).collect(),
        };
        let new = exchange_interface_data(&plane, &a1, &a2, &current, &u, &u).unwrap();
        for (a, b) in new.left.iter().zip(&current.left) {
            assert!((a - b).abs() < 1e-12);
        }
        for (a, b) in new.right.iter().zip(&current.right) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn size_mismatch() {
        let plane = InterfacePlane { dims: [2, 1], weights: [1.0, 0.0] };
        let a = InterfaceOperator::Robin { p: 1.0, q: 0.0 };
        let current = InterfaceData::zeros(2);
        assert!(exchange_interface_data(&plane, &a, &a, &current, &[1.0], &[1.0, 2.0]).is_err());
    }
}

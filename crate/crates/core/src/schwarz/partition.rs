use std::ops::Range;

use super::SchwarzError;
use crate::model::Grid;

/// Shared node plane between two adjacent slabs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Interface {
    pub left: usize,
    pub right: usize,
    /// Global x node index of the plane.
    pub x_node: usize,
}

/// Contiguous x-direction slabs of cells.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub slabs: Vec<Range<usize>>,
    pub interfaces: Vec<Interface>,
}

impl Partition {
    pub fn subdomain_count(&self) -> usize {
        self.slabs.len()
    }

    pub fn widths(&self) -> Vec<usize> {
        self.slabs.iter().map(|s| s.len()).collect()
    }

    /// Interface on the left of subdomain `s`, if any.
    pub fn left_interface(&self, s: usize) -> Option<usize> {
        (s > 0).then(|| s - 1)
    }

    /// Interface on the right of subdomain `s`, if any.
    pub fn right_interface(&self, s: usize) -> Option<usize> {
        (s + 1 < self.slabs.len()).then_some(s)
    }
}

/// Splits the `nx` cells into `nsub` slabs whose widths differ by at most
/// one, the wider slabs first.
pub fn partition_x(grid: &Grid, nsub: usize) -> Result<Partition, SchwarzError> {
    if nsub == 0 || nsub > grid.nx {
        return Err(SchwarzError::Partition(format!(
            "cannot split {} cells into {nsub} slabs",
            grid.nx
        )));
    }
    let base = grid.nx / nsub;
    let rem = grid.nx % nsub;
    let mut slabs = Vec::with_capacity(nsub);
    let mut start = 0;
    for s in 0..nsub {
        let width = base + usize::from(s < rem);
        slabs.push(start..start + width);
        start += width;
    }
    let interfaces = (1..nsub)
        .map(|s| Interface {
            left: s - 1,
            right: s,
            x_node: slabs[s].start,
        })
        .collect();
    Ok(Partition { slabs, interfaces })
}

use rayon::prelude::*;

use super::{
    assemble_subdomain, assemble_with_operators, exact_dtn_transmission, exchange_interface_data,
    InterfaceData, InterfaceOperator, Partition, SchwarzError, SubdomainSystem,
};
use crate::linalg::{norm2, pcg_with_guess, DenseVector, PcgConfig};
use crate::model::{NodalField, PoissonProblem};
use crate::rate::TransmissionParams;

/// Interface conditions used between the slabs.
#[derive(Debug, Clone, PartialEq)]
pub enum Transmission {
    Robin(TransmissionParams),
    /// Each side uses the discrete Dirichlet-to-Neumann map of its neighbour.
    /// Two subdomains only.
    ExactDtn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchwarzConfig {
    /// Stop once the global relative residual is at or below this.
    pub outer_tolerance: f64,
    pub max_outer_iterations: usize,
    pub inner: PcgConfig,
    /// Stop when the interface data changes by less than this, relative.
    pub stagnation_tolerance: f64,
    /// Consecutive residual increases reported as divergence.
    pub divergence_window: usize,
}

impl Default for SchwarzConfig {
    fn default() -> Self {
        Self {
            outer_tolerance: 1e-6,
            max_outer_iterations: 1000,
            inner: PcgConfig::default(),
            stagnation_tolerance: 1e-13,
            divergence_window: 10,
        }
    }
}

impl SchwarzConfig {
    pub fn validate(&self) -> Result<(), SchwarzError> {
        self.inner.validate()?;
        if !(self.outer_tolerance > 0.0) || !(self.stagnation_tolerance >= 0.0) {
            return Err(SchwarzError::InvalidConfig("tolerances must be positive".into()));
        }
        if self.max_outer_iterations == 0 || self.divergence_window == 0 {
            return Err(SchwarzError::InvalidConfig(
                "iteration limits must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SubdomainStats {
    pub index: usize,
    pub unknowns: usize,
    pub solves: usize,
    pub inner_iterations: usize,
    /// Relative residual of the last local solve.
    pub last_relative_residual: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OuterStop {
    Converged,
    Stagnated,
    MaxIterations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchwarzReport {
    pub outer_iterations: usize,
    /// Monolithic residual restricted to the interface planes, relative to
    /// the norm of the right-hand side, after each round.
    pub interface_residuals: Vec<f64>,
    /// Relative monolithic residual after each round.
    pub global_residuals: Vec<f64>,
    pub cumulative_inner_iterations: Vec<usize>,
    pub subdomains: Vec<SubdomainStats>,
    pub converged: bool,
    pub stop: OuterStop,
}

impl SchwarzReport {
    pub fn history_csv(&self) -> String {
        let mut out = String::from(
            "outer_iteration,interface_residual,global_residual,cumulative_inner_iterations\n",
        );
        for (i, ((ri, rg), c)) in self
            .interface_residuals
            .iter()
            .zip(&self.global_residuals)
            .zip(&self.cumulative_inner_iterations)
            .enumerate()
        {
            out.push_str(&format!("{},{ri:.6e},{rg:.6e},{c}\n", i + 1));
        }
        out
    }

    pub fn total_inner_iterations(&self) -> usize {
        self.cumulative_inner_iterations.last().copied().unwrap_or(0)
    }
}

/// Local systems for every slab under the chosen transmission conditions.
pub fn build_subdomains(
    problem: &PoissonProblem,
    partition: &Partition,
    transmission: &Transmission,
) -> Result<Vec<SubdomainSystem>, SchwarzError> {
    let n = partition.subdomain_count();
    match transmission {
        Transmission::Robin(tp) => (0..n)
            .map(|s| assemble_subdomain(problem, partition, s, tp))
            .collect(),
        Transmission::ExactDtn => {
            if n != 2 {
                return Err(SchwarzError::Unsupported(format!(
                    "exact DtN transmission needs 2 subdomains, got {n}"
                )));
            }
            let zero = || Some(InterfaceOperator::Robin { p: 0.0, q: 0.0 });
            let left = assemble_with_operators(problem, partition, 0, None, zero())?;
            let right = assemble_with_operators(problem, partition, 1, zero(), None)?;
            let (to_left, to_right) = rayon::join(
                || exact_dtn_transmission(&right),
                || exact_dtn_transmission(&left),
            );
            Ok(vec![
                assemble_with_operators(
                    problem,
                    partition,
                    0,
                    None,
                    Some(InterfaceOperator::Dense(to_left?)),
                )?,
                assemble_with_operators(
                    problem,
                    partition,
                    1,
                    Some(InterfaceOperator::Dense(to_right?)),
                    None,
                )?,
            ])
        }
    }
}

/// Non-overlapping parallel Schwarz iteration: all slabs are solved
/// concurrently from the previous round's interface data, then the data is
/// exchanged.
pub fn schwarz_solve(
    problem: &PoissonProblem,
    partition: &Partition,
    transmission: &Transmission,
    cfg: &SchwarzConfig,
) -> Result<(NodalField, SchwarzReport), SchwarzError> {
    cfg.validate()?;
    if partition.slabs.last().map(|s| s.end) != Some(problem.grid().nx) {
        return Err(SchwarzError::Partition(
            "partition does not match the grid".into(),
        ));
    }
    let subs = build_subdomains(problem, partition, transmission)?;
    let mono = problem.system()?;
    let b_norm = norm2(&mono.rhs);
    let scale = if b_norm > 0.0 { 1.0 / b_norm } else { 1.0 };
    let plane = subs[0].plane;
    let interface_dofs: Vec<usize> = partition
        .interfaces
        .iter()
        .flat_map(|f| {
            subs[f.left]
                .right
                .as_ref()
                .expect("left subdomain owns the right side")
                .dofs
                .iter()
                .map(|&d| {
                    let sub = &subs[f.left];
                    global_dof(&mono.dofs, sub, d)
                })
                .collect::<Vec<_>>()
        })
        .collect();

    let mut data: Vec<InterfaceData> = partition
        .interfaces
        .iter()
        .map(|_| InterfaceData::zeros(plane.len()))
        .collect();
    let mut local: Vec<DenseVector> = subs.iter().map(|s| vec![0.0; s.len()]).collect();
    let mut stats: Vec<SubdomainStats> = subs
        .iter()
        .map(|s| SubdomainStats {
            index: s.index,
            unknowns: s.len(),
            solves: 0,
            inner_iterations: 0,
            last_relative_residual: 0.0,
        })
        .collect();
    let mut report = SchwarzReport {
        outer_iterations: 0,
        interface_residuals: Vec::new(),
        global_residuals: Vec::new(),
        cumulative_inner_iterations: Vec::new(),
        subdomains: Vec::new(),
        converged: false,
        stop: OuterStop::MaxIterations,
    };
    let mut inner_total = 0;
    let mut increases = 0;
    let mut field = NodalField::zeros(*problem.grid());

    for it in 1..=cfg.max_outer_iterations {
        let solves = subs
            .par_iter()
            .zip(local.par_iter())
            .map(|(sub, guess)| {
                let left = sub.left.as_ref().map(|s| data[s.interface].right.as_slice());
                let right = sub.right.as_ref().map(|s| data[s.interface].left.as_slice());
                let rhs = sub.rhs(left, right);
                let (u, st) = pcg_with_guess(&sub.matrix, &rhs, Some(guess), &cfg.inner)?;
                let rhs_norm = norm2(&rhs);
                let rel = if rhs_norm > 0.0 { st.final_residual / rhs_norm } else { 0.0 };
                Ok((u, st.iterations, rel))
            })
            .collect::<Result<Vec<_>, SchwarzError>>()?;
        for ((s, (u, iters, rel)), slot) in solves.into_iter().enumerate().zip(local.iter_mut()) {
            *slot = u;
            stats[s].solves += 1;
            stats[s].inner_iterations += iters;
            stats[s].last_relative_residual = rel;
            inner_total += iters;
        }

        field = glue(problem, &subs, &local);
        let x = field.to_dofs(&mono.dofs);
        let ax = mono.matrix.spmv(&x)?;
        let r: DenseVector = mono.rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
        let global = norm2(&r) * scale;
        let iface = interface_dofs.iter().map(|&d| r[d] * r[d]).sum::<f64>().sqrt() * scale;
        if !global.is_finite() {
            return Err(SchwarzError::Diverged { iterations: it, residual: global });
        }
        if let Some(&prev) = report.global_residuals.last() {
            increases = if global > prev { increases + 1 } else { 0 };
        }
        report.outer_iterations = it;
        report.global_residuals.push(global);
        report.interface_residuals.push(iface);
        report.cumulative_inner_iterations.push(inner_total);

        if global <= cfg.outer_tolerance {
            report.converged = true;
            report.stop = OuterStop::Converged;
            break;
        }
        if increases >= cfg.divergence_window {
            return Err(SchwarzError::Diverged { iterations: it, residual: global });
        }

        let mut change = 0.0;
        let mut size = 0.0;
        for (f, d) in partition.interfaces.iter().zip(data.iter_mut()) {
            let (l, r) = (&subs[f.left], &subs[f.right]);
            let (ls, rs) = (l.right.as_ref().unwrap(), r.left.as_ref().unwrap());
            let new = exchange_interface_data(
                &plane,
                &ls.operator,
                &rs.operator,
                d,
                &l.trace(ls, &local[f.left]),
                &r.trace(rs, &local[f.right]),
            )?;
            for (a, b) in new.left.iter().chain(&new.right).zip(d.left.iter().chain(&d.right)) {
                change += (a - b) * (a - b);
                size += a * a;
            }
            *d = new;
        }
        if it > 1 && change.sqrt() <= cfg.stagnation_tolerance * size.sqrt() {
            report.stop = OuterStop::Stagnated;
            break;
        }
    }
    report.subdomains = stats;
    Ok((field, report))
}

fn global_dof(dofs: &crate::model::DofMap, sub: &SubdomainSystem, local: usize) -> usize {
    let [i, j, k] = node_of(sub, local);
    dofs.index(i, j, k).expect("subdomain node is an unknown")
}

fn node_of(sub: &SubdomainSystem, local: usize) -> [usize; 3] {
    let nxl = sub.x_nodes.len();
    let (xl, pi) = (local % nxl, local / nxl);
    let [ay, az] = [sub.grid.axes()[1], sub.grid.axes()[2]];
    let my = sub.plane.dims[0];
    [
        sub.x_nodes[xl],
        pi % my + ay.interior_nodes().start,
        pi / my + az.interior_nodes().start,
    ]
}

/// Global nodal field from the local solutions; duplicated interface nodes
/// take the mean of their copies.
fn glue(problem: &PoissonProblem, subs: &[SubdomainSystem], local: &[DenseVector]) -> NodalField {
    let grid = *problem.grid();
    let mut sum = NodalField::zeros(grid);
    let mut count = vec![0u8; grid.node_count()];
    for (sub, u) in subs.iter().zip(local) {
        for (d, v) in u.iter().enumerate() {
            let [i, j, k] = node_of(sub, d);
            sum.set(i, j, k, sum.get(i, j, k) + v);
            count[grid.node_index(i, j, k)] += 1;
        }
    }
    let [mx, my, mz] = grid.node_dims();
    for k in 0..mz {
        for j in 0..my {
            for i in 0..mx {
                let c = count[grid.node_index(i, j, k)];
                if c > 1 {
                    sum.set(i, j, k, sum.get(i, j, k) / f64::from(c));
                }
            }
        }
    }
    sum
}

//! Textbook LP-based branch-and-bound.
//!
//! Nodes are explored best-bound first (ties in insertion order), branching on
//! the most fractional integer variable with the lowest index winning ties.
//! Each node stores only the bounds it tightened; both children are solved as
//! soon as their parent is branched, so every queued node carries its own
//! relaxation value. No primal heuristic seeds the incumbent. When the dual
//! engine solved the parent, its children restart from the parent's basis.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::rc::Rc;

use log::debug;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{solve_with_bounds_warm, LpError, LpProblem, SolverOptions, Status, WarmStart};

/// Relaxations within this margin of the incumbent are pruned.
pub const PRUNE_MARGIN: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum MilpStatus {
    Optimal,
    Infeasible,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MilpSolution {
    pub status: MilpStatus,
    /// `None` when infeasible. Integer coordinates are rounded.
    pub point: Option<Vec<f64>>,
    pub objective: f64,
    /// Relaxations solved, the root included.
    pub nodes_explored: usize,
    pub root_objective: f64,
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum BnbError {
    #[error("node limit of {limit} reached")]
    NodeLimit { limit: usize, incumbent: Option<Box<MilpSolution>> },
    #[error("the relaxation is unbounded")]
    Unbounded,
    #[error("integer variable {index} is out of range for {num_vars} variables")]
    BadIndex { index: usize, num_vars: usize },
    #[error(transparent)]
    Lp(#[from] LpError),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BnbOptions {
    pub lp: SolverOptions,
    pub max_nodes: usize,
    pub integrality_tolerance: f64,
}

impl Default for BnbOptions {
    fn default() -> Self {
        Self {
            lp: SolverOptions::default(),
            max_nodes: 100_000,
            integrality_tolerance: crate::lp::DEFAULT_INTEGRALITY_TOLERANCE,
        }
    }
}

struct Node {
    bound: f64,
    seq: usize,
    /// `(var, lower, upper)` overriding the root bounds.
    fixings: Vec<(usize, f64, f64)>,
    point: Vec<f64>,
    warm: Option<Rc<WarmStart>>,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    // Reversed so the max-heap pops the smallest bound, then the oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then(other.seq.cmp(&self.seq))
    }
}

/// Most fractional integer variable, lowest index on ties.
fn branching_variable(point: &[f64], integer_vars: &[usize], tol: f64) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in integer_vars {
        let frac = (point[j] - point[j].floor()).min(point[j].ceil() - point[j]);
        if frac > tol && best.is_none_or(|(b, f)| frac > f || (frac == f && j < b)) {
            best = Some((j, frac));
        }
    }
    best.map(|(j, _)| j)
}

/// Minimises `problem` with the listed variables restricted to integers.
pub fn solve_bnb(problem: &LpProblem, integer_vars: &[usize], opts: &BnbOptions) -> Result<MilpSolution, BnbError> {
    let n = problem.num_vars();
    if let Some(&index) = integer_vars.iter().find(|&&j| j >= n) {
        return Err(BnbError::BadIndex { index, num_vars: n });
    }
    let mut integer_vars = integer_vars.to_vec();
    integer_vars.sort_unstable();
    integer_vars.dedup();

    let root_lower = problem.lower_bounds().to_vec();
    let root_upper = problem.upper_bounds().to_vec();
    let mut lower = root_lower.clone();
    let mut upper = root_upper.clone();

    let (root, root_warm) = solve_with_bounds_warm(problem, &lower, &upper, &opts.lp, None)?;
    let mut nodes = 1;
    let root_objective = root.objective;
    match root.status {
        Status::Infeasible => {
            return Ok(MilpSolution {
                status: MilpStatus::Infeasible,
                point: None,
                objective: f64::INFINITY,
                nodes_explored: nodes,
                root_objective,
            })
        }
        Status::Unbounded => return Err(BnbError::Unbounded),
        Status::Optimal => {}
    }

    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut heap = BinaryHeap::new();
    let mut seq = 0;
    heap.push(Node {
        bound: root.objective,
        seq,
        fixings: Vec::new(),
        point: root.point.expect("optimal point"),
        warm: root_warm.map(Rc::new),
    });

    let finish = |incumbent: Option<(f64, Vec<f64>)>, nodes: usize| match incumbent {
        Some((objective, point)) => MilpSolution {
            status: MilpStatus::Optimal,
            point: Some(point),
            objective,
            nodes_explored: nodes,
            root_objective,
        },
        None => MilpSolution {
            status: MilpStatus::Infeasible,
            point: None,
            objective: f64::INFINITY,
            nodes_explored: nodes,
            root_objective,
        },
    };

    while let Some(node) = heap.pop() {
        if let Some((best, _)) = &incumbent {
            if node.bound >= best - PRUNE_MARGIN {
                continue;
            }
        }
        let Some(var) = branching_variable(&node.point, &integer_vars, opts.integrality_tolerance) else {
            let mut point = node.point;
            for &j in &integer_vars {
                point[j] = point[j].round();
            }
            let objective = problem.objective_value(&point);
            debug!("incumbent {objective} after {nodes} nodes");
            incumbent = Some((objective, point));
            continue;
        };

        let value = node.point[var];
        let (lo, hi) = node
            .fixings
            .iter()
            .rev()
            .find(|f| f.0 == var)
            .map_or((root_lower[var], root_upper[var]), |f| (f.1, f.2));
        for (child_lo, child_hi) in [(lo, value.floor()), (value.ceil(), hi)] {
            if child_lo > child_hi {
                continue;
            }
            if nodes >= opts.max_nodes {
                let incumbent = incumbent.is_some().then(|| Box::new(finish(incumbent.clone(), nodes)));
                return Err(BnbError::NodeLimit { limit: opts.max_nodes, incumbent });
            }
            let mut fixings = node.fixings.clone();
            fixings.push((var, child_lo, child_hi));
            for &(j, l, u) in &fixings {
                lower[j] = l;
                upper[j] = u;
            }
            let sol = solve_with_bounds_warm(problem, &lower, &upper, &opts.lp, node.warm.as_deref());
            for &(j, _, _) in &fixings {
                lower[j] = root_lower[j];
                upper[j] = root_upper[j];
            }
            let (sol, warm) = sol?;
            nodes += 1;
            match sol.status {
                Status::Infeasible => continue,
                Status::Unbounded => return Err(BnbError::Unbounded),
                Status::Optimal => {}
            }
            if incumbent.as_ref().is_some_and(|(best, _)| sol.objective >= best - PRUNE_MARGIN) {
                continue;
            }
            seq += 1;
            let point = sol.point.expect("optimal point");
            heap.push(Node { bound: sol.objective, seq, fixings, point, warm: warm.map(Rc::new) });
        }
    }
    Ok(finish(incumbent, nodes))
}

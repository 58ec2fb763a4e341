//! Brute-force reference answers for small instances.
//!
//! None of these touch the LP code. Work limits are explicit and exceeding one
//! is an error.

use thiserror::Error;

use crate::models::{Allocation, KMedoidInstance, NonExpendableInstance, TransportInstance};
use crate::tu::{binomial, next_combination};

pub const DEFAULT_TRANSPORT_BUDGET: u64 = 50_000_000;
pub const DEFAULT_KMEDOID_BUDGET: u128 = 5_000_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OracleError {
    #[error("search needs more than {budget} steps")]
    Budget { budget: u128 },
    #[error("no feasible allocation exists")]
    Infeasible,
    #[error("destination {destination} cannot receive its demand")]
    UnreachableDemand { destination: usize },
    #[error("instance shape is inconsistent: {0}")]
    Shape(String),
    #[error("k = {k} is not in 1..={n}")]
    InvalidK { k: usize, n: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleSolution {
    pub objective: f64,
    pub allocation: Allocation,
}

fn check_grid_shape(rows: usize, demands: &[u64], costs: &[Vec<f64>]) -> Result<(), OracleError> {
    if costs.len() != rows || costs.iter().any(|r| r.len() != demands.len()) {
        return Err(OracleError::Shape(format!("expected a {rows}x{} cost grid", demands.len())));
    }
    Ok(())
}

struct TransportSearch<'a> {
    inst: &'a TransportInstance,
    cap: u64,
    grid: Vec<Vec<u64>>,
    row_used: Vec<u64>,
    best: Option<(f64, Vec<Vec<u64>>)>,
    steps: u64,
    budget: u64,
}

impl TransportSearch<'_> {
    /// Cells are visited column by column so each demand can be checked as
    /// soon as its column is complete.
    fn visit(&mut self, cell: usize, cost: f64, col_sum: u64) -> Result<(), OracleError> {
        self.steps += 1;
        if self.steps > self.budget {
            return Err(OracleError::Budget { budget: self.budget as u128 });
        }
        if self.best.as_ref().is_some_and(|(b, _)| cost >= *b) {
            return Ok(());
        }
        let m = self.inst.supplies.len();
        let n = self.inst.demands.len();
        if cell == m * n {
            self.best = Some((cost, self.grid.clone()));
            return Ok(());
        }
        let (j, i) = (cell / m, cell % m);
        let spare: u64 = (i..m).map(|r| self.inst.supplies[r] - self.row_used[r]).sum();
        if col_sum + spare < self.inst.demands[j] {
            return Ok(());
        }
        let most = self.cap.min(self.inst.supplies[i] - self.row_used[i]);
        for x in 0..=most {
            let sum = col_sum + x;
            if i + 1 == m && sum < self.inst.demands[j] {
                continue;
            }
            self.grid[i][j] = x;
            self.row_used[i] += x;
            let next_sum = if i + 1 == m { 0 } else { sum };
            let r = self.visit(cell + 1, cost + self.inst.costs[i][j] * x as f64, next_sum);
            self.row_used[i] -= x;
            self.grid[i][j] = 0;
            r?;
        }
        Ok(())
    }
}

/// Minimum-cost integer shipment grid by exhaustive search. Each cell ranges
/// over `0..=min(s_i, total demand)`; branches that already cost at least the
/// best grid found, or can no longer meet a demand, are cut. Costs must be
/// non-negative.
pub fn oracle_transport(inst: &TransportInstance, budget: u64) -> Result<OracleSolution, OracleError> {
    let m = inst.supplies.len();
    check_grid_shape(m, &inst.demands, &inst.costs)?;
    if inst.costs.iter().flatten().any(|&c| c.is_nan() || c < 0.0) {
        return Err(OracleError::Shape("costs must be non-negative".into()));
    }
    let mut search = TransportSearch {
        inst,
        cap: inst.demands.iter().sum(),
        grid: vec![vec![0; inst.demands.len()]; m],
        row_used: vec![0; m],
        best: None,
        steps: 0,
        budget,
    };
    search.visit(0, 0.0, 0)?;
    let (objective, grid) = search.best.ok_or(OracleError::Infeasible)?;
    Ok(OracleSolution { objective, allocation: Allocation::Transport { grid } })
}

/// Destinations share no constraints, so each column is filled from its
/// cheapest sources first, up to each source's capacity.
pub fn oracle_nonexpendable(inst: &NonExpendableInstance) -> Result<OracleSolution, OracleError> {
    let m = inst.capacities.len();
    check_grid_shape(m, &inst.demands, &inst.costs)?;
    let mut grid = vec![vec![0u64; inst.demands.len()]; m];
    let mut objective = 0.0;
    for (j, &demand) in inst.demands.iter().enumerate() {
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&a, &b| inst.costs[a][j].total_cmp(&inst.costs[b][j]).then(a.cmp(&b)));
        let mut left = demand;
        for i in order {
            if left == 0 {
                break;
            }
            let take = left.min(inst.capacities[i]);
            grid[i][j] = take;
            objective += inst.costs[i][j] * take as f64;
            left -= take;
        }
        if left > 0 {
            return Err(OracleError::UnreachableDemand { destination: j });
        }
    }
    Ok(OracleSolution { objective, allocation: Allocation::Transport { grid } })
}

/// Tries every medoid set and assigns each point to its nearest medoid.
/// Ties go to the lexicographically smallest medoid set and, within a set, to
/// the lowest-indexed medoid.
pub fn oracle_kmedoid(inst: &KMedoidInstance, budget: u128) -> Result<OracleSolution, OracleError> {
    let n = inst.distances.len();
    let k = inst.k;
    if k == 0 || k > n {
        return Err(OracleError::InvalidK { k, n });
    }
    if inst.distances.iter().any(|r| r.len() != n) {
        return Err(OracleError::Shape("distance matrix is not square".into()));
    }
    if binomial(n, k) > budget {
        return Err(OracleError::Budget { budget });
    }
    let d = &inst.distances;
    let cost_of = |set: &[usize]| -> f64 {
        (0..n).map(|j| set.iter().map(|&i| d[i][j]).fold(f64::INFINITY, f64::min)).sum()
    };
    let mut set: Vec<usize> = (0..k).collect();
    let mut best = (cost_of(&set), set.clone());
    while next_combination(&mut set, n) {
        let c = cost_of(&set);
        if c < best.0 {
            best = (c, set.clone());
        }
    }
    let (objective, medoids) = best;
    let assignment = (0..n)
        .map(|j| {
            medoids
                .iter()
                .copied()
                .min_by(|&a, &b| d[a][j].total_cmp(&d[b][j]).then(a.cmp(&b)))
                .expect("k >= 1")
        })
        .collect();
    Ok(OracleSolution { objective, allocation: Allocation::KMedoid { medoids, assignment } })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn transport(s: Vec<u64>, d: Vec<u64>, c: Vec<Vec<f64>>) -> TransportInstance {
        TransportInstance { supplies: s, demands: d, costs: c }
    }

    #[test]
    fn two_by_two_transport() {
        let inst = transport(vec![3, 2], vec![2, 3], vec![vec![1.0, 2.0], vec![3.0, 1.0]]);
        let sol = oracle_transport(&inst, DEFAULT_TRANSPORT_BUDGET).unwrap();
        assert_eq!(sol.objective, 6.0);
        assert_eq!(sol.allocation, Allocation::Transport { grid: vec![vec![2, 1], vec![0, 2]] });
    }

    #[test]
    fn zero_demand_and_no_supply() {
        let inst = transport(vec![4, 1], vec![0, 0, 0], vec![vec![1.0; 3]; 2]);
        assert_eq!(oracle_transport(&inst, DEFAULT_TRANSPORT_BUDGET).unwrap().objective, 0.0);
        let inst = transport(vec![0], vec![1], vec![vec![1.0]]);
        assert_eq!(oracle_transport(&inst, DEFAULT_TRANSPORT_BUDGET), Err(OracleError::Infeasible));
    }

    #[test]
    fn transport_budget_is_enforced() {
        let inst = transport(vec![5; 4], vec![5; 4], vec![vec![1.0; 4]; 4]);
        assert_eq!(oracle_transport(&inst, 10), Err(OracleError::Budget { budget: 10 }));
    }

    #[test]
    fn greedy_columns() {
        let inst = NonExpendableInstance { capacities: vec![2, 1], demands: vec![3, 2], costs: vec![vec![1.0, 4.0], vec![2.0, 3.0]] };
        let sol = oracle_nonexpendable(&inst).unwrap();
        assert_eq!(sol.objective, 11.0);
        assert_eq!(sol.allocation, Allocation::Transport { grid: vec![vec![2, 1], vec![1, 1]] });

        let single = NonExpendableInstance { capacities: vec![7], demands: vec![4], costs: vec![vec![2.5]] };
        assert_eq!(oracle_nonexpendable(&single).unwrap().objective, 10.0);

        let short = NonExpendableInstance { capacities: vec![1, 1], demands: vec![1, 3], costs: vec![vec![1.0; 2]; 2] };
        assert_eq!(oracle_nonexpendable(&short), Err(OracleError::UnreachableDemand { destination: 1 }));
    }

    /// Every grid with cells up to the column demand, checked directly.
    fn enumerate_nonexpendable(inst: &NonExpendableInstance) -> f64 {
        let m = inst.capacities.len();
        let n = inst.demands.len();
        let mut best = f64::INFINITY;
        let mut x = vec![0u64; m * n];
        loop {
            let ok = (0..n).all(|j| (0..m).map(|i| x[i * n + j]).sum::<u64>() >= inst.demands[j])
                && (0..m * n).all(|c| x[c] <= inst.capacities[c / n]);
            if ok {
                let cost: f64 = (0..m * n).map(|c| inst.costs[c / n][c % n] * x[c] as f64).sum();
                best = best.min(cost);
            }
            let mut c = 0;
            while c < m * n {
                if x[c] < inst.demands[c % n] {
                    x[c] += 1;
                    break;
                }
                x[c] = 0;
                c += 1;
            }
            if c == m * n {
                return best;
            }
        }
    }

    #[test]
    fn greedy_matches_enumeration() {
        let inst = NonExpendableInstance { capacities: vec![2, 1], demands: vec![3, 2], costs: vec![vec![1.0, 4.0], vec![2.0, 3.0]] };
        assert_eq!(enumerate_nonexpendable(&inst), 11.0);
        let inst = NonExpendableInstance {
            capacities: vec![1, 3, 2],
            demands: vec![2, 4, 1],
            costs: vec![vec![0.5, 2.0, 1.0], vec![1.5, 1.0, 3.0], vec![0.25, 4.0, 0.75]],
        };
        assert_eq!(oracle_nonexpendable(&inst).unwrap().objective, enumerate_nonexpendable(&inst));
    }

    #[test]
    fn line_points() {
        let pts: Vec<(f64, f64)> = [0.0, 1.0, 2.0, 10.0].iter().map(|&x| (x, 0.0)).collect();
        let inst = KMedoidInstance::from_points(&pts, 2).unwrap();
        let sol = oracle_kmedoid(&inst, DEFAULT_KMEDOID_BUDGET).unwrap();
        assert_eq!(sol.objective, 2.0);
        assert_eq!(sol.allocation, Allocation::KMedoid { medoids: vec![1, 3], assignment: vec![1, 1, 1, 3] });
    }

    #[test]
    fn all_points_medoids_and_single_medoid() {
        let inst = KMedoidInstance::from_points(&[(0.0, 0.0), (3.0, 1.0), (-2.0, 5.0)], 3).unwrap();
        assert_eq!(oracle_kmedoid(&inst, DEFAULT_KMEDOID_BUDGET).unwrap().objective, 0.0);
        let d = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let sol = oracle_kmedoid(&KMedoidInstance::new(d, 1).unwrap(), DEFAULT_KMEDOID_BUDGET).unwrap();
        assert_eq!(sol.objective, 2.0);
        assert_eq!(sol.allocation, Allocation::KMedoid { medoids: vec![1], assignment: vec![1, 1, 1] });
    }

    #[test]
    fn kmedoid_budget_and_k() {
        let inst = KMedoidInstance { distances: vec![vec![0.0; 30]; 30], k: 15 };
        assert!(matches!(oracle_kmedoid(&inst, DEFAULT_KMEDOID_BUDGET), Err(OracleError::Budget { .. })));
        let inst = KMedoidInstance { distances: vec![vec![0.0; 3]; 3], k: 0 };
        assert_eq!(oracle_kmedoid(&inst, 10), Err(OracleError::InvalidK { k: 0, n: 3 }));
    }

    #[test]
    fn ties_pick_smallest_medoid_set() {
        // Four corners of a square: every pair of opposite corners costs the same.
        let pts = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)];
        let sol = oracle_kmedoid(&KMedoidInstance::from_points(&pts, 2).unwrap(), 100).unwrap();
        match sol.allocation {
            Allocation::KMedoid { medoids, .. } => assert_eq!(medoids, vec![0, 1]),
            a => panic!("{a:?}"),
        }
    }
}

//! Relief allocation and relief-centre location models.
//!
//! Decision variables are laid out row-major: `x_ij` sits at `i * n + j`, and
//! for k-medoid the selection variables `y_i` follow the `n * n` assignment
//! block. Indices are 0-based throughout.

mod instances;
mod kmedoid;
mod transport;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lp::{check_integrality, IntegralityReport, LpError, LpProblem, SimplexSolution, Status, DEFAULT_INTEGRALITY_TOLERANCE};

pub use instances::{KMedoidInstance, NonExpendableInstance, TransportInstance};
pub use kmedoid::{build_kmedoid, build_kmedoid_block_c, build_kmedoid_reduced_matrix};
pub use transport::{build_expendable, build_expendable_matrix, build_nonexpendable, build_nonexpendable_matrix};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("instance has no {0}")]
    Empty(&'static str),
    #[error("cost grid must be {rows}x{cols}; row {row} has {got} entries")]
    CostShape { rows: usize, cols: usize, row: usize, got: usize },
    #[error("cost c[{i}][{j}] = {value} must be finite and non-negative")]
    BadCost { i: usize, j: usize, value: f64 },
    #[error("total supply {supply} is below total demand {demand}")]
    InsufficientSupply { supply: u64, demand: u64 },
    #[error("demand {demand} at destination {destination} exceeds combined capacity {capacity}")]
    DemandExceedsCapacity { destination: usize, demand: u64, capacity: u64 },
    #[error("distance matrix must be {n}x{n}; row {row} has {got} entries")]
    DistanceShape { n: usize, row: usize, got: usize },
    #[error("distance d[{i}][{j}] = {value} must be finite and non-negative")]
    BadDistance { i: usize, j: usize, value: f64 },
    #[error("diagonal entry d[{i}][{i}] = {value} is not zero")]
    NonZeroDiagonal { i: usize, value: f64 },
    #[error("distances are asymmetric at ({i}, {j})")]
    Asymmetric { i: usize, j: usize },
    #[error("k = {k} must lie in [1, {n}]")]
    InvalidK { k: usize, n: usize },
    #[error("solution status is {0:?}, not optimal")]
    NotOptimal(Status),
    #[error("point has {got} coordinates, model expects {expected}")]
    PointLength { expected: usize, got: usize },
    #[error("point is fractional (max deviation {:.3e} over {} coordinates)", .0.max_fractional_deviation, .0.fractional_indices.len())]
    Fractional(IntegralityReport),
    #[error("decoded allocation is invalid: {0}")]
    InvalidAllocation(String),
    #[error(transparent)]
    Lp(#[from] LpError),
}

/// One of the three models together with its data.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case")]
pub enum Model {
    Expendable(TransportInstance),
    NonExpendable(NonExpendableInstance),
    KMedoid(KMedoidInstance),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Expendable,
    NonExpendable,
    KMedoid,
}

impl Model {
    pub fn kind(&self) -> ModelKind {
        match self {
            Model::Expendable(_) => ModelKind::Expendable,
            Model::NonExpendable(_) => ModelKind::NonExpendable,
            Model::KMedoid(_) => ModelKind::KMedoid,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        match self {
            Model::Expendable(inst) => inst.validate(),
            Model::NonExpendable(inst) => inst.validate(),
            Model::KMedoid(inst) => inst.validate(),
        }
    }

    pub fn build(&self) -> Result<LpProblem, ModelError> {
        match self {
            Model::Expendable(inst) => build_expendable(inst),
            Model::NonExpendable(inst) => build_nonexpendable(inst),
            Model::KMedoid(inst) => build_kmedoid(inst),
        }
    }

    pub fn num_vars(&self) -> usize {
        match self {
            Model::Expendable(inst) => inst.num_sources() * inst.num_destinations(),
            Model::NonExpendable(inst) => inst.num_sources() * inst.num_destinations(),
            Model::KMedoid(inst) => inst.n() * inst.n() + inst.n(),
        }
    }

    /// Rounds an integral point and decodes it, checking every model invariant.
    pub fn decode(&self, point: &[f64]) -> Result<Allocation, ModelError> {
        if point.len() != self.num_vars() {
            return Err(ModelError::PointLength { expected: self.num_vars(), got: point.len() });
        }
        let report = check_integrality(point, DEFAULT_INTEGRALITY_TOLERANCE);
        if !report.is_integral {
            return Err(ModelError::Fractional(report));
        }
        let rounded: Vec<i64> = point.iter().map(|v| v.round() as i64).collect();
        if let Some(j) = rounded.iter().position(|&v| v < 0) {
            return Err(ModelError::InvalidAllocation(format!("coordinate {j} is negative")));
        }
        let alloc = match self {
            Model::Expendable(inst) => {
                Allocation::Transport { grid: to_grid(&rounded, inst.num_sources(), inst.num_destinations()) }
            }
            Model::NonExpendable(inst) => {
                Allocation::Transport { grid: to_grid(&rounded, inst.num_sources(), inst.num_destinations()) }
            }
            Model::KMedoid(inst) => kmedoid::decode(inst, &rounded)?,
        };
        self.check_allocation(&alloc)?;
        Ok(alloc)
    }

    pub fn check_allocation(&self, alloc: &Allocation) -> Result<(), ModelError> {
        let bad = |msg: String| Err(ModelError::InvalidAllocation(msg));
        match (self, alloc) {
            (Model::Expendable(inst), Allocation::Transport { grid }) => {
                transport::check_grid(grid, &inst.demands, inst.num_sources())?;
                for (i, row) in grid.iter().enumerate() {
                    let shipped: u64 = row.iter().sum();
                    if shipped > inst.supplies[i] {
                        return bad(format!("centre {i} ships {shipped} > supply {}", inst.supplies[i]));
                    }
                }
                Ok(())
            }
            (Model::NonExpendable(inst), Allocation::Transport { grid }) => {
                transport::check_grid(grid, &inst.demands, inst.num_sources())?;
                for (i, row) in grid.iter().enumerate() {
                    if let Some(j) = row.iter().position(|&x| x > inst.capacities[i]) {
                        return bad(format!("x[{i}][{j}] = {} exceeds capacity {}", row[j], inst.capacities[i]));
                    }
                }
                Ok(())
            }
            (Model::KMedoid(inst), Allocation::KMedoid { medoids, assignment }) => {
                kmedoid::check(inst, medoids, assignment)
            }
            _ => bad("allocation does not match the model".into()),
        }
    }

    pub fn allocation_cost(&self, alloc: &Allocation) -> f64 {
        match (self, alloc) {
            (Model::Expendable(TransportInstance { costs, .. }), Allocation::Transport { grid })
            | (Model::NonExpendable(NonExpendableInstance { costs, .. }), Allocation::Transport { grid }) => grid
                .iter()
                .zip(costs)
                .flat_map(|(g, c)| g.iter().zip(c).map(|(&x, &cij)| x as f64 * cij))
                .sum(),
            (Model::KMedoid(inst), Allocation::KMedoid { assignment, .. }) => {
                assignment.iter().enumerate().map(|(j, &i)| inst.distances[i][j]).sum()
            }
            _ => f64::NAN,
        }
    }
}

fn to_grid(values: &[i64], m: usize, n: usize) -> Vec<Vec<u64>> {
    (0..m).map(|i| values[i * n..(i + 1) * n].iter().map(|&v| v as u64).collect()).collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Allocation {
    /// `grid[i][j]` units shipped from centre `i` to destination `j`.
    Transport { grid: Vec<Vec<u64>> },
    /// `assignment[j]` is the medoid serving point `j`; `medoids` is sorted.
    KMedoid { medoids: Vec<usize>, assignment: Vec<usize> },
}

/// Decodes an optimal simplex solution. Fractional points are reported, never
/// rounded away.
pub fn extract_allocation(solution: &SimplexSolution, model: &Model) -> Result<Allocation, ModelError> {
    if solution.status != Status::Optimal {
        return Err(ModelError::NotOptimal(solution.status));
    }
    let point = solution.point.as_deref().ok_or(ModelError::NotOptimal(solution.status))?;
    model.decode(point)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_simplex, SolverOptions};

    fn small_transport() -> TransportInstance {
        TransportInstance::new(vec![3, 2], vec![2, 3], vec![vec![1.0, 2.0], vec![3.0, 1.0]]).unwrap()
    }

    #[test]
    fn transport_example_decodes_to_expected_grid() {
        let model = Model::Expendable(small_transport());
        let sol = solve_simplex(&model.build().unwrap(), &SolverOptions::default()).unwrap();
        assert!((sol.objective - 6.0).abs() < 1e-9);
        let alloc = extract_allocation(&sol, &model).unwrap();
        assert_eq!(alloc, Allocation::Transport { grid: vec![vec![2, 1], vec![0, 2]] });
        assert_eq!(model.allocation_cost(&alloc), 6.0);
    }

    #[test]
    fn kmedoid_all_points_selected() {
        let d = vec![vec![0.0, 1.0, 2.0], vec![1.0, 0.0, 1.0], vec![2.0, 1.0, 0.0]];
        let model = Model::KMedoid(KMedoidInstance::new(d, 3).unwrap());
        let sol = solve_simplex(&model.build().unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        let alloc = extract_allocation(&sol, &model).unwrap();
        assert_eq!(alloc, Allocation::KMedoid { medoids: vec![0, 1, 2], assignment: vec![0, 1, 2] });
    }

    #[test]
    fn half_integral_point_is_an_error() {
        let model = Model::Expendable(small_transport());
        let err = model.decode(&[0.5, 1.0, 1.0, 2.0]).unwrap_err();
        match err {
            ModelError::Fractional(r) => assert_eq!(r.fractional_indices, vec![0]),
            e => panic!("unexpected {e}"),
        }
    }

    #[test]
    fn non_optimal_solution_is_rejected() {
        let model = Model::Expendable(small_transport());
        let sol = SimplexSolution {
            status: Status::Infeasible,
            point: None,
            objective: f64::INFINITY,
            basis: vec![],
            iterations: 0,
            engine: crate::lp::Engine::Tableau,
        };
        assert_eq!(extract_allocation(&sol, &model), Err(ModelError::NotOptimal(Status::Infeasible)));
    }

    #[test]
    fn invariant_violations_are_caught() {
        let model = Model::Expendable(small_transport());
        // Demand of destination 1 left uncovered.
        assert!(matches!(model.decode(&[2.0, 0.0, 0.0, 2.0]), Err(ModelError::InvalidAllocation(_))));
        // Centre 1 ships more than it holds.
        assert!(matches!(model.decode(&[0.0, 0.0, 2.0, 3.0]), Err(ModelError::InvalidAllocation(_))));
        assert!(matches!(model.decode(&[1.0]), Err(ModelError::PointLength { expected: 4, got: 1 })));
    }

    #[test]
    fn model_json_is_tagged() {
        let model = Model::Expendable(small_transport());
        let json = serde_json::to_value(&model).unwrap();
        assert_eq!(json["model"], "expendable");
        assert_eq!(serde_json::from_value::<Model>(json).unwrap(), model);
    }
}

use super::{ModelError, NonExpendableInstance, TransportInstance};
use crate::lp::{LpProblem, Sense};
use crate::tu::SignMatrix;

fn objective(costs: &[Vec<f64>]) -> Vec<f64> {
    costs.iter().flatten().copied().collect()
}

fn add_demand_rows(lp: &mut LpProblem, m: usize, demands: &[u64]) -> Result<(), ModelError> {
    let n = demands.len();
    for (j, &d) in demands.iter().enumerate() {
        lp.add_constraint((0..m).map(|i| (i * n + j, 1.0)), Sense::Ge, d as f64)?;
    }
    Ok(())
}

/// Expendable allocation as a transportation problem.
///
/// Rows: `n` demand rows `sum_i x_ij >= d_j`, then `m` supply rows
/// `sum_j x_ij <= s_i`. Negating the demand rows gives exactly
/// [`build_expendable_matrix`].
pub fn build_expendable(inst: &TransportInstance) -> Result<LpProblem, ModelError> {
    inst.validate()?;
    let (m, n) = (inst.num_sources(), inst.num_destinations());
    let mut lp = LpProblem::new(objective(&inst.costs));
    add_demand_rows(&mut lp, m, &inst.demands)?;
    for (i, &s) in inst.supplies.iter().enumerate() {
        lp.add_constraint((0..n).map(|j| (i * n + j, 1.0)), Sense::Le, s as f64)?;
    }
    Ok(lp)
}

/// `(n + m) x mn`: `m` side-by-side copies of `-I_n` over a block-diagonal
/// of all-ones rows.
pub fn build_expendable_matrix(m: usize, n: usize) -> SignMatrix {
    let mut a = SignMatrix::zeros(n + m, m * n);
    for i in 0..m {
        for j in 0..n {
            a.set(j, i * n + j, -1);
            a.set(n + i, i * n + j, 1);
        }
    }
    a
}

/// Non-expendable allocation. Rows: `n` demand rows, then one capacity row
/// `x_ij <= s_i` per cell in row-major order.
pub fn build_nonexpendable(inst: &NonExpendableInstance) -> Result<LpProblem, ModelError> {
    inst.validate()?;
    let (m, n) = (inst.num_sources(), inst.num_destinations());
    let mut lp = LpProblem::new(objective(&inst.costs));
    add_demand_rows(&mut lp, m, &inst.demands)?;
    for (i, &s) in inst.capacities.iter().enumerate() {
        for j in 0..n {
            lp.add_constraint([(i * n + j, 1.0)], Sense::Le, s as f64)?;
        }
    }
    Ok(lp)
}

/// `n(m + 1) x mn`: `m` copies of `-I_n` stacked over `I_mn`.
pub fn build_nonexpendable_matrix(m: usize, n: usize) -> SignMatrix {
    let mut a = SignMatrix::zeros(n * (m + 1), m * n);
    for i in 0..m {
        for j in 0..n {
            a.set(j, i * n + j, -1);
        }
    }
    for c in 0..m * n {
        a.set(n + c, c, 1);
    }
    a
}

pub(super) fn check_grid(grid: &[Vec<u64>], demands: &[u64], m: usize) -> Result<(), ModelError> {
    if grid.len() != m || grid.iter().any(|r| r.len() != demands.len()) {
        return Err(ModelError::InvalidAllocation("grid shape does not match the instance".into()));
    }
    for (j, &d) in demands.iter().enumerate() {
        let received: u64 = grid.iter().map(|r| r[j]).sum();
        if received < d {
            return Err(ModelError::InvalidAllocation(format!("destination {j} receives {received} < demand {d}")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_simplex, SolverOptions};

    fn sign_rows(lp: &LpProblem) -> Vec<Vec<i64>> {
        lp.constraints()
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let flip = if c.sense == Sense::Ge { -1.0 } else { 1.0 };
                lp.dense_row(i).iter().map(|v| (v * flip) as i64).collect()
            })
            .collect()
    }

    #[test]
    fn expendable_dimensions() {
        let inst = TransportInstance::new(vec![3, 3], vec![1, 2, 3], vec![vec![1.0; 3]; 2]).unwrap();
        let lp = build_expendable(&inst).unwrap();
        assert_eq!(lp.num_vars(), 6);
        assert_eq!(lp.num_constraints(), 5);
    }

    #[test]
    fn expendable_matrix_small_cases() {
        assert_eq!(build_expendable_matrix(1, 1).to_rows(), vec![vec![-1], vec![1]]);
        assert_eq!(
            build_expendable_matrix(2, 2).to_rows(),
            vec![vec![-1, 0, -1, 0], vec![0, -1, 0, -1], vec![1, 1, 0, 0], vec![0, 0, 1, 1]]
        );
    }

    #[test]
    fn problems_match_their_matrices() {
        let inst = TransportInstance::new(vec![4, 4, 4], vec![1, 2], vec![vec![1.0; 2]; 3]).unwrap();
        let lp = build_expendable(&inst).unwrap();
        assert_eq!(sign_rows(&lp), build_expendable_matrix(3, 2).to_rows());
        let lp = build_nonexpendable(&inst.into()).unwrap();
        assert_eq!(sign_rows(&lp), build_nonexpendable_matrix(3, 2).to_rows());
    }

    #[test]
    fn zero_demand_costs_nothing() {
        let inst = TransportInstance::new(vec![2, 2], vec![0, 0], vec![vec![5.0, 1.0], vec![2.0, 3.0]]).unwrap();
        let sol = solve_simplex(&build_expendable(&inst).unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
        assert!(sol.point.unwrap().iter().all(|&x| x == 0.0));
        let sol = solve_simplex(&build_nonexpendable(&inst.into()).unwrap(), &SolverOptions::default()).unwrap();
        assert_eq!(sol.objective, 0.0);
    }

    #[test]
    fn nonexpendable_example() {
        let inst = NonExpendableInstance::new(vec![2, 1], vec![3, 2], vec![vec![1.0, 4.0], vec![2.0, 3.0]]).unwrap();
        let lp = build_nonexpendable(&inst).unwrap();
        assert_eq!(lp.num_constraints(), 2 + 4);
        let sol = solve_simplex(&lp, &SolverOptions::default()).unwrap();
        assert!((sol.objective - 11.0).abs() < 1e-9);
    }

    #[test]
    fn nonexpendable_matrix_shape() {
        let a = build_nonexpendable_matrix(2, 2);
        assert_eq!(
            a.to_rows(),
            vec![
                vec![-1, 0, -1, 0],
                vec![0, -1, 0, -1],
                vec![1, 0, 0, 0],
                vec![0, 1, 0, 0],
                vec![0, 0, 1, 0],
                vec![0, 0, 0, 1]
            ]
        );
    }
}

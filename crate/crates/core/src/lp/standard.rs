use serde::{Deserialize, Serialize};

use super::problem::{validate_bounds, LpProblem, Sense};
use super::LpError;

/// How an original variable is recovered from standardised columns.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum VarMap {
    /// `x = offset + column`
    Shifted { col: usize, offset: f64 },
    /// `x = offset - column`, used when only the upper bound is finite.
    Reflected { col: usize, offset: f64 },
    /// `x = pos - neg` for free variables.
    Split { pos: usize, neg: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum ColumnKind {
    Structural { var: usize },
    /// Negative part of a split free variable.
    StructuralNeg { var: usize },
    Slack { row: usize },
    Surplus { row: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum RowOrigin {
    Constraint(usize),
    UpperBound(usize),
}

/// `min c^T z + offset  s.t.  A z = b,  z >= 0,  b >= 0`
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StandardForm {
    pub a: Vec<Vec<f64>>,
    pub b: Vec<f64>,
    pub c: Vec<f64>,
    pub objective_offset: f64,
    pub columns: Vec<ColumnKind>,
    pub rows: Vec<RowOrigin>,
    pub var_map: Vec<VarMap>,
}

impl StandardForm {
    pub fn num_rows(&self) -> usize {
        self.b.len()
    }

    pub fn num_cols(&self) -> usize {
        self.c.len()
    }

    pub fn num_slack_columns(&self) -> usize {
        self.columns
            .iter()
            .filter(|k| matches!(k, ColumnKind::Slack { .. } | ColumnKind::Surplus { .. }))
            .count()
    }

    /// Maps a standardised point back to the original variables.
    pub fn recover(&self, z: &[f64]) -> Vec<f64> {
        self.var_map
            .iter()
            .map(|m| match *m {
                VarMap::Shifted { col, offset } => offset + z[col],
                VarMap::Reflected { col, offset } => offset - z[col],
                VarMap::Split { pos, neg } => z[pos] - z[neg],
            })
            .collect()
    }
}

/// Rewrites `problem` as an equality system over non-negative columns.
///
/// Inequality rows gain a slack (`<=`) or surplus (`>=`) column, finite upper
/// bounds become explicit `<=` rows, and rows are negated where needed so the
/// right-hand side is non-negative.
pub fn standardize(problem: &LpProblem) -> Result<StandardForm, LpError> {
    standardize_with_bounds(problem, problem.lower_bounds(), problem.upper_bounds())
}

pub(crate) fn standardize_with_bounds(
    problem: &LpProblem,
    lower: &[f64],
    upper: &[f64],
) -> Result<StandardForm, LpError> {
    validate_bounds(lower, upper)?;
    let n = problem.num_vars();

    let mut columns: Vec<ColumnKind> = (0..n).map(|var| ColumnKind::Structural { var }).collect();
    let mut var_map = Vec::with_capacity(n);
    let mut bound_rows = Vec::new();
    for j in 0..n {
        let (l, u) = (lower[j], upper[j]);
        if l.is_finite() {
            var_map.push(VarMap::Shifted { col: j, offset: l });
            if u.is_finite() {
                bound_rows.push((j, u - l));
            }
        } else if u.is_finite() {
            var_map.push(VarMap::Reflected { col: j, offset: u });
        } else {
            let neg = columns.len();
            columns.push(ColumnKind::StructuralNeg { var: j });
            var_map.push(VarMap::Split { pos: j, neg });
        }
    }
    let num_struct = columns.len();

    // Substitute the variable maps into each row: coefficients over the
    // structural columns plus a constant moved to the right-hand side.
    let mut rows: Vec<(Vec<f64>, Sense, f64, RowOrigin)> = Vec::new();
    for (i, con) in problem.constraints().iter().enumerate() {
        let mut row = vec![0.0; num_struct];
        let mut rhs = con.rhs;
        for &(j, a) in &con.coeffs {
            match var_map[j] {
                VarMap::Shifted { col, offset } => {
                    row[col] += a;
                    rhs -= a * offset;
                }
                VarMap::Reflected { col, offset } => {
                    row[col] -= a;
                    rhs -= a * offset;
                }
                VarMap::Split { pos, neg } => {
                    row[pos] += a;
                    row[neg] -= a;
                }
            }
        }
        rows.push((row, con.sense, rhs, RowOrigin::Constraint(i)));
    }
    for (j, width) in bound_rows {
        let mut row = vec![0.0; num_struct];
        row[j] = 1.0;
        rows.push((row, Sense::Le, width, RowOrigin::UpperBound(j)));
    }

    for (row, sense, rhs, _) in rows.iter_mut() {
        if *rhs < 0.0 {
            row.iter_mut().for_each(|a| *a = -*a);
            *rhs = -*rhs;
            *sense = match *sense {
                Sense::Le => Sense::Ge,
                Sense::Ge => Sense::Le,
                Sense::Eq => Sense::Eq,
            };
        }
    }

    for (r, (_, sense, _, _)) in rows.iter().enumerate() {
        match sense {
            Sense::Le => columns.push(ColumnKind::Slack { row: r }),
            Sense::Ge => columns.push(ColumnKind::Surplus { row: r }),
            Sense::Eq => {}
        }
    }
    let num_cols = columns.len();

    let mut a = Vec::with_capacity(rows.len());
    let mut b = Vec::with_capacity(rows.len());
    let mut origins = Vec::with_capacity(rows.len());
    for (mut row, _, rhs, origin) in rows {
        row.resize(num_cols, 0.0);
        a.push(row);
        b.push(rhs);
        origins.push(origin);
    }
    for (col, kind) in columns.iter().enumerate().skip(num_struct) {
        match *kind {
            ColumnKind::Slack { row } => a[row][col] = 1.0,
            ColumnKind::Surplus { row } => a[row][col] = -1.0,
            _ => unreachable!(),
        }
    }

    let mut c = vec![0.0; num_cols];
    let mut objective_offset = 0.0;
    for (j, &cj) in problem.objective().iter().enumerate() {
        match var_map[j] {
            VarMap::Shifted { col, offset } => {
                c[col] += cj;
                objective_offset += cj * offset;
            }
            VarMap::Reflected { col, offset } => {
                c[col] -= cj;
                objective_offset += cj * offset;
            }
            VarMap::Split { pos, neg } => {
                c[pos] += cj;
                c[neg] -= cj;
            }
        }
    }

    Ok(StandardForm { a, b, c, objective_offset, columns, rows: origins, var_map })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_covering_row_gets_a_surplus() {
        let mut lp = LpProblem::new(vec![1.0]);
        lp.add_constraint([(0, 1.0)], Sense::Ge, 1.0).unwrap();
        let std = standardize(&lp).unwrap();
        assert_eq!(std.num_rows(), 1);
        assert_eq!(std.columns, vec![ColumnKind::Structural { var: 0 }, ColumnKind::Surplus { row: 0 }]);
        assert_eq!(std.a, vec![vec![1.0, -1.0]]);
    }

    #[test]
    fn transportation_two_by_two_counts() {
        let mut lp = LpProblem::new(vec![1.0, 2.0, 3.0, 1.0]);
        lp.add_constraint([(0, 1.0), (1, 1.0)], Sense::Le, 3.0).unwrap();
        lp.add_constraint([(2, 1.0), (3, 1.0)], Sense::Le, 2.0).unwrap();
        lp.add_constraint([(0, 1.0), (2, 1.0)], Sense::Ge, 2.0).unwrap();
        lp.add_constraint([(1, 1.0), (3, 1.0)], Sense::Ge, 3.0).unwrap();
        let std = standardize(&lp).unwrap();
        assert_eq!(std.num_rows(), 4);
        assert_eq!(std.num_cols(), 8);
        assert_eq!(std.num_slack_columns(), 4);
    }

    #[test]
    fn empty_constraint_list_is_identity_map() {
        let lp = LpProblem::new(vec![1.0, 2.0, 3.0]);
        let std = standardize(&lp).unwrap();
        assert_eq!(std.num_rows(), 0);
        assert_eq!(std.num_cols(), 3);
        let z = [4.0, 5.0, 6.0];
        assert_eq!(std.recover(&z), z.to_vec());
    }

    #[test]
    fn negative_rhs_flips_the_row() {
        let mut lp = LpProblem::new(vec![1.0]);
        lp.add_constraint([(0, -1.0)], Sense::Le, -2.0).unwrap();
        let std = standardize(&lp).unwrap();
        assert_eq!(std.b, vec![2.0]);
        assert_eq!(std.a, vec![vec![1.0, -1.0]]);
    }

    #[test]
    fn finite_bounds_shift_and_add_rows() {
        let mut lp = LpProblem::new(vec![1.0, 1.0, 1.0]);
        lp.set_bounds(0, 2.0, 5.0).unwrap();
        lp.set_bounds(1, f64::NEG_INFINITY, 3.0).unwrap();
        lp.set_bounds(2, f64::NEG_INFINITY, f64::INFINITY).unwrap();
        let std = standardize(&lp).unwrap();
        assert_eq!(std.rows, vec![RowOrigin::UpperBound(0)]);
        assert_eq!(std.b, vec![3.0]);
        assert_eq!(std.var_map[0], VarMap::Shifted { col: 0, offset: 2.0 });
        assert_eq!(std.var_map[1], VarMap::Reflected { col: 1, offset: 3.0 });
        assert_eq!(std.var_map[2], VarMap::Split { pos: 2, neg: 3 });
        assert_eq!(std.objective_offset, 5.0);
        assert_eq!(std.c, vec![1.0, -1.0, 1.0, -1.0, 0.0]);
    }

    #[test]
    fn inconsistent_bounds_are_rejected() {
        let mut lp = LpProblem::new(vec![1.0]);
        lp.set_bounds(0, 1.0, -1.0).unwrap();
        assert!(matches!(standardize(&lp), Err(LpError::Malformed(_))));
    }
}

use std::fmt;

use serde::{Deserialize, Serialize};

use super::LpError;

/// Relation between a constraint's left-hand side and its right-hand side.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

impl fmt::Display for Sense {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sense::Le => "<=",
            Sense::Ge => ">=",
            Sense::Eq => "=",
        })
    }
}

/// A single linear constraint `sum(coeffs) <sense> rhs`.
///
/// Coefficients are stored sparsely, sorted by variable index, without
/// duplicates and without explicit zeros.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Constraint {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl Constraint {
    pub fn activity(&self, x: &[f64]) -> f64 {
        self.coeffs.iter().map(|&(j, a)| a * x[j]).sum()
    }

    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|&(_, a)| a * a).sum::<f64>().sqrt()
    }

    /// Amount by which `x` violates the constraint (zero when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.activity(x);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

/// A linear program in minimisation form:
///
/// ```text
/// min  c^T x
/// s.t. a_i^T x  (<= | >= | =)  b_i
///      lower_j <= x_j <= upper_j
/// ```
///
/// Bounds default to `[0, +inf)`. An infinite lower bound makes a variable
/// free below.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpProblem {
    objective: Vec<f64>,
    constraints: Vec<Constraint>,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl LpProblem {
    /// Creates a problem with one non-negative variable per objective entry.
    pub fn new(objective: Vec<f64>) -> Self {
        let n = objective.len();
        Self {
            objective,
            constraints: Vec::new(),
            lower: vec![0.0; n],
            upper: vec![f64::INFINITY; n],
        }
    }

    pub fn num_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    pub fn objective(&self) -> &[f64] {
        &self.objective
    }

    pub fn constraints(&self) -> &[Constraint] {
        &self.constraints
    }

    pub fn lower_bounds(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper_bounds(&self) -> &[f64] {
        &self.upper
    }

    /// Adds a sparse constraint. Repeated indices are summed and zeros dropped.
    pub fn add_constraint<I>(&mut self, coeffs: I, sense: Sense, rhs: f64) -> Result<usize, LpError>
    where
        I: IntoIterator<Item = (usize, f64)>,
    {
        let mut row: Vec<(usize, f64)> = coeffs.into_iter().collect();
        for &(j, a) in &row {
            if j >= self.num_vars() {
                return Err(LpError::Malformed(format!(
                    "constraint {} references variable {j} but the problem has {} variables",
                    self.constraints.len(),
                    self.num_vars()
                )));
            }
            if !a.is_finite() {
                return Err(LpError::Malformed(format!("non-finite coefficient on variable {j}")));
            }
        }
        if !rhs.is_finite() {
            return Err(LpError::Malformed("non-finite right-hand side".into()));
        }
        row.sort_by_key(|&(j, _)| j);
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.len());
        for (j, a) in row {
            match merged.last_mut() {
                Some(last) if last.0 == j => last.1 += a,
                _ => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint { coeffs: merged, sense, rhs });
        Ok(self.constraints.len() - 1)
    }

    /// Adds a constraint given as a dense row of exactly `num_vars` entries.
    pub fn add_dense_constraint(&mut self, row: &[f64], sense: Sense, rhs: f64) -> Result<usize, LpError> {
        if row.len() != self.num_vars() {
            return Err(LpError::Malformed(format!(
                "dense row has {} entries, expected {}",
                row.len(),
                self.num_vars()
            )));
        }
        self.add_constraint(row.iter().copied().enumerate(), sense, rhs)
    }

    /// Sets both bounds of a variable. Consistency (`lower <= upper`) is
    /// checked by [`LpProblem::validate`] so that malformed problems can still
    /// be represented and reported.
    pub fn set_bounds(&mut self, var: usize, lower: f64, upper: f64) -> Result<(), LpError> {
        if var >= self.num_vars() {
            return Err(LpError::Malformed(format!("no variable {var}")));
        }
        self.lower[var] = lower;
        self.upper[var] = upper;
        Ok(())
    }

    pub fn set_all_bounds(&mut self, lower: f64, upper: f64) {
        self.lower.iter_mut().for_each(|l| *l = lower);
        self.upper.iter_mut().for_each(|u| *u = upper);
    }

    pub fn validate(&self) -> Result<(), LpError> {
        validate_bounds(&self.lower, &self.upper)?;
        if let Some(j) = self.objective.iter().position(|c| !c.is_finite()) {
            return Err(LpError::Malformed(format!("non-finite objective coefficient on variable {j}")));
        }
        Ok(())
    }

    pub fn dense_row(&self, i: usize) -> Vec<f64> {
        let mut row = vec![0.0; self.num_vars()];
        for &(j, a) in &self.constraints[i].coeffs {
            row[j] = a;
        }
        row
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest constraint or bound violation of `x`, with each row's violation
    /// divided by `max(1, ||a_i||)`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let rows = self
            .constraints
            .iter()
            .map(|c| c.violation(x) / c.norm().max(1.0))
            .fold(0.0, f64::max);
        let bounds = x
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(&v, (&l, &u))| (l - v).max(v - u).max(0.0))
            .fold(0.0, f64::max);
        rows.max(bounds)
    }

    pub fn is_feasible(&self, x: &[f64], tolerance: f64) -> bool {
        x.len() == self.num_vars() && self.max_violation(x) <= tolerance
    }

    /// Returns a copy whose objective is multiplied by `factor`.
    pub fn with_scaled_objective(&self, factor: f64) -> Self {
        let mut scaled = self.clone();
        scaled.objective.iter_mut().for_each(|c| *c *= factor);
        scaled
    }
}

pub(crate) fn validate_bounds(lower: &[f64], upper: &[f64]) -> Result<(), LpError> {
    for (j, (&l, &u)) in lower.iter().zip(upper).enumerate() {
        if l.is_nan() || u.is_nan() || l == f64::INFINITY || u == f64::NEG_INFINITY {
            return Err(LpError::Malformed(format!("variable {j} has invalid bounds [{l}, {u}]")));
        }
        if l > u {
            return Err(LpError::Malformed(format!(
                "variable {j} has lower bound {l} above upper bound {u}"
            )));
        }
    }
    Ok(())
}

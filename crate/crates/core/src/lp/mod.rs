//! Linear programs and a vertex-terminating primal simplex method.
//!
//! Two engines implement the same two-phase method (artificial variables in
//! phase one, original costs in phase two):
//!
//! * [`Engine::Tableau`] works on the dense equality form produced by
//!   [`standardize`], with every finite upper bound written as an explicit row.
//! * [`Engine::Revised`] keeps the constraint matrix sparse, handles bounds
//!   implicitly and factorises the basis, which is what makes the larger
//!   location models tractable.
//!
//! * [`Engine::Dual`] runs a bounded dual simplex on the same sparse data. It
//!   needs a dual feasible starting basis, which every model in this crate
//!   provides, and takes far fewer pivots on large location models. When the
//!   start is not dual feasible the revised engine is used instead.
//!
//! All of them return basic feasible solutions, so an optimal point is always a vertex
//! of the feasible polyhedron.

mod dual;
mod factor;
mod integrality;
mod problem;
mod revised;
mod sparse_lu;
mod standard;
mod tableau;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use dual::WarmStart;
pub use integrality::{check_integrality, IntegralityReport, DEFAULT_INTEGRALITY_TOLERANCE};
pub use problem::{Constraint, LpProblem, Sense};
pub use standard::{standardize, ColumnKind, RowOrigin, StandardForm, VarMap};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("malformed problem: {0}")]
    Malformed(String),
    #[error("iteration limit of {limit} pivots exceeded")]
    IterationLimit { limit: usize },
    #[error("numerical trouble: {0}")]
    Numerical(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Status {
    Optimal,
    Infeasible,
    Unbounded,
}

/// Entering/leaving variable selection.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum PivotRule {
    /// Lowest eligible index enters; ties in the ratio test leave by lowest
    /// index. Cannot cycle.
    Bland,
    /// Most negative reduced cost enters. After a run of degenerate pivots the
    /// solver switches to Bland's rule until the objective moves again, so it
    /// still terminates. The dual engine reads this as dual steepest-edge
    /// pricing of the leaving row.
    Dantzig,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Engine {
    /// Dense tableau for small problems, otherwise dual with a revised
    /// fallback.
    Auto,
    Tableau,
    Revised,
    Dual,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SolverOptions {
    pub pivot_rule: PivotRule,
    pub engine: Engine,
    /// Pivot cap; `None` means `50 * (rows + cols)` of the standardised system.
    pub max_iterations: Option<usize>,
    pub pivot_tolerance: f64,
    pub feasibility_tolerance: f64,
    pub optimality_tolerance: f64,
}

impl Default for SolverOptions {
    fn default() -> Self {
        Self {
            pivot_rule: PivotRule::Bland,
            engine: Engine::Auto,
            max_iterations: None,
            pivot_tolerance: 1e-9,
            feasibility_tolerance: 1e-7,
            optimality_tolerance: 1e-9,
        }
    }
}

impl SolverOptions {
    pub fn with_pivot_rule(mut self, rule: PivotRule) -> Self {
        self.pivot_rule = rule;
        self
    }

    pub fn with_engine(mut self, engine: Engine) -> Self {
        self.engine = engine;
        self
    }

    pub fn with_max_iterations(mut self, limit: usize) -> Self {
        self.max_iterations = Some(limit);
        self
    }

    fn iteration_cap(&self, rows: usize, cols: usize) -> usize {
        self.max_iterations.unwrap_or(50 * (rows + cols))
    }
}

/// Result of a simplex run.
///
/// `basis` lists the basic columns of the engine's standardised system: for
/// the tableau these index [`StandardForm`] columns, for the revised engine
/// index `j < num_vars` is structural variable `j` and `num_vars + i` is the
/// slack of constraint `i`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimplexSolution {
    pub status: Status,
    pub point: Option<Vec<f64>>,
    pub objective: f64,
    pub basis: Vec<usize>,
    pub iterations: usize,
    pub engine: Engine,
}

impl SimplexSolution {
    pub fn is_optimal(&self) -> bool {
        self.status == Status::Optimal
    }

    fn without_point(status: Status, iterations: usize, engine: Engine) -> Self {
        let objective = match status {
            Status::Infeasible => f64::INFINITY,
            Status::Unbounded => f64::NEG_INFINITY,
            Status::Optimal => unreachable!("optimal solutions carry a point"),
        };
        Self { status, point: None, objective, basis: Vec::new(), iterations, engine }
    }
}

/// Dense tableaus above this many entries go to the dual engine.
const TABLEAU_ENTRY_LIMIT: usize = 1_500_000;

/// Solves `problem` to a vertex optimum, or proves it infeasible or unbounded.
pub fn solve_simplex(problem: &LpProblem, opts: &SolverOptions) -> Result<SimplexSolution, LpError> {
    solve_with_bounds(problem, problem.lower_bounds(), problem.upper_bounds(), opts)
}

/// Like [`solve_simplex`] but with variable bounds overriding those stored in
/// the problem. Branch-and-bound uses this to avoid copying the constraints.
pub fn solve_with_bounds(
    problem: &LpProblem,
    lower: &[f64],
    upper: &[f64],
    opts: &SolverOptions,
) -> Result<SimplexSolution, LpError> {
    if lower.len() != problem.num_vars() || upper.len() != problem.num_vars() {
        return Err(LpError::Malformed("bound vectors do not match the variable count".into()));
    }
    problem.validate()?;
    problem::validate_bounds(lower, upper)?;
    match resolve_engine(problem, upper, opts) {
        Engine::Tableau => {
            let std = standard::standardize_with_bounds(problem, lower, upper)?;
            tableau::solve(problem, &std, opts)
        }
        Engine::Dual => match dual::solve(problem, lower, upper, opts)? {
            Some(sol) => Ok(sol),
            None => revised::solve(problem, lower, upper, opts),
        },
        _ => revised::solve(problem, lower, upper, opts),
    }
}

fn resolve_engine(problem: &LpProblem, upper: &[f64], opts: &SolverOptions) -> Engine {
    match opts.engine {
        Engine::Auto if tableau_entries(problem, upper) <= TABLEAU_ENTRY_LIMIT => Engine::Tableau,
        Engine::Auto => Engine::Dual,
        e => e,
    }
}

/// Like [`solve_with_bounds`], restarting the dual engine from `warm` when
/// one is given. The second value is the final basis when the dual engine
/// produced the optimum; other engines never return one. A warm basis that
/// does not fit the new bounds is dropped in favour of a cold start.
pub fn solve_with_bounds_warm(
    problem: &LpProblem,
    lower: &[f64],
    upper: &[f64],
    opts: &SolverOptions,
    warm: Option<&WarmStart>,
) -> Result<(SimplexSolution, Option<WarmStart>), LpError> {
    if lower.len() != problem.num_vars() || upper.len() != problem.num_vars() {
        return Err(LpError::Malformed("bound vectors do not match the variable count".into()));
    }
    problem.validate()?;
    problem::validate_bounds(lower, upper)?;
    if warm.is_some() || resolve_engine(problem, upper, opts) == Engine::Dual {
        for start in [warm, None] {
            if let Some(found) = dual::solve_from(problem, lower, upper, opts, start)? {
                return Ok(found);
            }
            if warm.is_none() {
                break;
            }
        }
    }
    Ok((solve_with_bounds(problem, lower, upper, opts)?, None))
}

fn tableau_entries(problem: &LpProblem, upper: &[f64]) -> usize {
    let bound_rows = upper.iter().filter(|u| u.is_finite()).count();
    let rows = problem.num_constraints() + bound_rows;
    let cols = 2 * problem.num_vars() + 2 * rows;
    rows.saturating_mul(cols)
}

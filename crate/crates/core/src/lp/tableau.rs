//! Dense two-phase tableau simplex over a [`StandardForm`].

use super::problem::LpProblem;
use super::standard::{ColumnKind, StandardForm};
use super::{Engine, LpError, PivotRule, SimplexSolution, SolverOptions, Status};

/// Consecutive degenerate pivots tolerated under Dantzig pricing before
/// falling back to Bland's rule.
pub(super) const DEGENERATE_STREAK_LIMIT: usize = 50;

struct Tableau {
    rows: usize,
    /// Total columns including artificials; the right-hand side sits at index `cols`.
    cols: usize,
    data: Vec<f64>,
    /// Reduced costs, followed by minus the objective value.
    reduced: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
}

impl Tableau {
    fn width(&self) -> usize {
        self.cols + 1
    }

    fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.width() + c]
    }

    fn rhs(&self, r: usize) -> f64 {
        self.at(r, self.cols)
    }

    fn price(&mut self, cost: &[f64]) {
        let w = self.width();
        self.reduced = cost.to_vec();
        self.reduced.push(0.0);
        for r in 0..self.rows {
            let cb = cost[self.basis[r]];
            if cb != 0.0 {
                let row = &self.data[r * w..(r + 1) * w];
                for (d, a) in self.reduced.iter_mut().zip(row) {
                    *d -= cb * a;
                }
            }
        }
    }

    fn pivot(&mut self, pr: usize, pc: usize) {
        let w = self.width();
        let p = self.at(pr, pc);
        let (before, rest) = self.data.split_at_mut(pr * w);
        let (prow, after) = rest.split_at_mut(w);
        prow.iter_mut().for_each(|v| *v /= p);
        prow[pc] = 1.0;
        for row in before.chunks_mut(w).chain(after.chunks_mut(w)) {
            let f = row[pc];
            if f != 0.0 {
                for (v, a) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * a;
                }
                row[pc] = 0.0;
            }
        }
        let f = self.reduced[pc];
        if f != 0.0 {
            for (v, a) in self.reduced.iter_mut().zip(prow.iter()) {
                *v -= f * a;
            }
            self.reduced[pc] = 0.0;
        }
        self.is_basic[self.basis[pr]] = false;
        self.is_basic[pc] = true;
        self.basis[pr] = pc;
    }

    fn remove_row(&mut self, r: usize) {
        let w = self.width();
        self.is_basic[self.basis[r]] = false;
        self.data.drain(r * w..(r + 1) * w);
        self.basis.remove(r);
        self.rows -= 1;
    }
}

enum PhaseEnd {
    Optimal,
    Unbounded,
}

struct Runner<'a> {
    opts: &'a SolverOptions,
    iterations: usize,
    cap: usize,
}

impl Runner<'_> {
    fn run(&mut self, t: &mut Tableau, eligible: &[bool]) -> Result<PhaseEnd, LpError> {
        let tol = self.opts.optimality_tolerance;
        let mut degenerate = 0usize;
        loop {
            let bland = self.opts.pivot_rule == PivotRule::Bland || degenerate >= DEGENERATE_STREAK_LIMIT;
            let candidates = (0..t.cols).filter(|&j| eligible[j] && !t.is_basic[j] && t.reduced[j] < -tol);
            let entering = if bland {
                candidates.into_iter().next()
            } else {
                candidates.min_by(|&a, &b| t.reduced[a].total_cmp(&t.reduced[b]))
            };
            let Some(q) = entering else {
                return Ok(PhaseEnd::Optimal);
            };

            let mut leave: Option<(usize, f64)> = None;
            for r in 0..t.rows {
                let a = t.at(r, q);
                if a <= self.opts.pivot_tolerance {
                    continue;
                }
                let ratio = t.rhs(r).max(0.0) / a;
                leave = match leave {
                    None => Some((r, ratio)),
                    Some((best, best_ratio)) => {
                        let slack = 1e-12 * best_ratio.abs().max(1.0);
                        if ratio < best_ratio - slack {
                            Some((r, ratio))
                        } else if ratio <= best_ratio + slack {
                            let better = if bland {
                                t.basis[r] < t.basis[best]
                            } else {
                                a > t.at(best, q)
                            };
                            if better {
                                Some((r, ratio))
                            } else {
                                Some((best, best_ratio))
                            }
                        } else {
                            Some((best, best_ratio))
                        }
                    }
                };
            }
            let Some((r, ratio)) = leave else {
                return Ok(PhaseEnd::Unbounded);
            };
            if self.iterations >= self.cap {
                return Err(LpError::IterationLimit { limit: self.cap });
            }
            self.iterations += 1;
            if ratio <= 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            t.pivot(r, q);
        }
    }
}

pub(super) fn solve(
    problem: &LpProblem,
    std: &StandardForm,
    opts: &SolverOptions,
) -> Result<SimplexSolution, LpError> {
    let m = std.num_rows();
    let n = std.num_cols();

    // A slack with coefficient +1 starts basic; every other row gets an artificial.
    let mut basis = vec![usize::MAX; m];
    for (col, kind) in std.columns.iter().enumerate() {
        if let ColumnKind::Slack { row } = *kind {
            basis[row] = col;
        }
    }
    let art_rows: Vec<usize> = (0..m).filter(|&r| basis[r] == usize::MAX).collect();
    let cols = n + art_rows.len();
    for (k, &r) in art_rows.iter().enumerate() {
        basis[r] = n + k;
    }

    let w = cols + 1;
    let mut data = vec![0.0; m * w];
    for r in 0..m {
        data[r * w..r * w + n].copy_from_slice(&std.a[r]);
        data[r * w + cols] = std.b[r];
    }
    for (k, &r) in art_rows.iter().enumerate() {
        data[r * w + n + k] = 1.0;
    }
    let mut is_basic = vec![false; cols];
    for &b in &basis {
        is_basic[b] = true;
    }
    let mut t = Tableau { rows: m, cols, data, reduced: Vec::new(), basis, is_basic };
    let mut runner = Runner { opts, iterations: 0, cap: opts.iteration_cap(m, n) };

    if !art_rows.is_empty() {
        let mut phase1_cost = vec![0.0; cols];
        phase1_cost[n..].iter_mut().for_each(|c| *c = 1.0);
        t.price(&phase1_cost);
        runner.run(&mut t, &vec![true; cols])?;
        let infeasibility: f64 = (0..t.rows).filter(|&r| t.basis[r] >= n).map(|r| t.rhs(r)).sum();
        let scale = std.b.iter().fold(1.0f64, |acc, b| acc.max(b.abs()));
        if infeasibility > opts.feasibility_tolerance * scale {
            return Ok(SimplexSolution::without_point(Status::Infeasible, runner.iterations, Engine::Tableau));
        }
        // Pivot remaining (zero-valued) artificials out; rows where that is
        // impossible are linear combinations of the others and are dropped.
        let mut r = 0;
        while r < t.rows {
            if t.basis[r] >= n {
                let replacement = (0..n).find(|&j| !t.is_basic[j] && t.at(r, j).abs() > opts.pivot_tolerance);
                match replacement {
                    Some(j) => {
                        t.pivot(r, j);
                        r += 1;
                    }
                    None => t.remove_row(r),
                }
            } else {
                r += 1;
            }
        }
    }

    let mut phase2_cost = std.c.clone();
    phase2_cost.resize(cols, 0.0);
    t.price(&phase2_cost);
    let mut eligible = vec![true; cols];
    eligible[n..].iter_mut().for_each(|e| *e = false);
    if let PhaseEnd::Unbounded = runner.run(&mut t, &eligible)? {
        return Ok(SimplexSolution::without_point(Status::Unbounded, runner.iterations, Engine::Tableau));
    }

    let mut z = vec![0.0; n];
    for r in 0..t.rows {
        z[t.basis[r]] = t.rhs(r);
    }
    let point = std.recover(&z);
    Ok(SimplexSolution {
        status: Status::Optimal,
        objective: problem.objective_value(&point),
        point: Some(point),
        basis: t.basis.clone(),
        iterations: runner.iterations,
        engine: Engine::Tableau,
    })
}

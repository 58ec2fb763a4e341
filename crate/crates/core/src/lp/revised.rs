//! Sparse two-phase revised simplex with implicit variable bounds.
//!
//! Columns `0..n` are the structural variables, `n..n+m` one logical per row
//! (`a_i x + s_i = b_i`, bounds chosen by the row sense) and anything beyond
//! is a phase-one artificial. Nonbasic variables always sit at a finite bound
//! (or at zero when free), so every basis defines a vertex.

use log::debug;

use super::factor::BasisFactor;
use super::problem::{LpProblem, Sense};
use super::tableau::DEGENERATE_STREAK_LIMIT;
use super::{Engine, LpError, PivotRule, SimplexSolution, SolverOptions, Status};

const REFACTOR_INTERVAL: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum State {
    Basic,
    AtLower,
    AtUpper,
    /// Nonbasic free variable resting at zero.
    Free,
}

struct Csc {
    start: Vec<usize>,
    row: Vec<usize>,
    val: Vec<f64>,
}

impl Csc {
    fn from_problem(problem: &LpProblem) -> Self {
        let n = problem.num_vars();
        let mut count = vec![0usize; n + 1];
        for con in problem.constraints() {
            for &(j, _) in &con.coeffs {
                count[j + 1] += 1;
            }
        }
        for j in 0..n {
            count[j + 1] += count[j];
        }
        let nnz = count[n];
        let mut next = count.clone();
        let mut row = vec![0; nnz];
        let mut val = vec![0.0; nnz];
        for (i, con) in problem.constraints().iter().enumerate() {
            for &(j, a) in &con.coeffs {
                row[next[j]] = i;
                val[next[j]] = a;
                next[j] += 1;
            }
        }
        Self { start: count, row, val }
    }
}

enum Step {
    Optimal,
    Unbounded,
}

struct Revised<'a> {
    opts: &'a SolverOptions,
    m: usize,
    n: usize,
    a: Csc,
    b: Vec<f64>,
    art: Vec<(usize, f64)>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    state: Vec<State>,
    basis: Vec<usize>,
    factor: BasisFactor,
    iterations: usize,
    cap: usize,
    price_cursor: usize,
}

impl<'a> Revised<'a> {
    fn num_vars(&self) -> usize {
        self.n + self.m + self.art.len()
    }

    fn for_each_entry(&self, var: usize, mut f: impl FnMut(usize, f64)) {
        if var < self.n {
            for t in self.a.start[var]..self.a.start[var + 1] {
                f(self.a.row[t], self.a.val[t]);
            }
        } else if var < self.n + self.m {
            f(var - self.n, 1.0);
        } else {
            let (r, s) = self.art[var - self.n - self.m];
            f(r, s);
        }
    }

    fn column_dot(&self, var: usize, pi: &[f64]) -> f64 {
        if var < self.n {
            (self.a.start[var]..self.a.start[var + 1]).map(|t| self.a.val[t] * pi[self.a.row[t]]).sum()
        } else if var < self.n + self.m {
            pi[var - self.n]
        } else {
            let (r, s) = self.art[var - self.n - self.m];
            s * pi[r]
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let basis = &self.basis;
        let this = &*self;
        let factor = BasisFactor::factorize(self.m, |p, buf| {
            this.for_each_entry(basis[p], |r, v| buf.push((r, v)));
        })
        .map_err(|_| LpError::Numerical("singular basis".into()))?;
        debug!("refactor: kernel {} of {} rows", factor.kernel_size(), self.m);
        self.factor = factor;

        // Recompute basic values from the nonbasic ones.
        let mut w = self.b.clone();
        for j in 0..self.num_vars() {
            if self.state[j] != State::Basic && self.x[j] != 0.0 {
                let xj = self.x[j];
                self.for_each_entry(j, |r, v| w[r] -= v * xj);
            }
        }
        let mut z = vec![0.0; self.m];
        self.factor.ftran(&mut w, &mut z);
        for (p, &v) in self.basis.iter().enumerate() {
            self.x[v] = z[p];
        }
        Ok(())
    }

    fn duals(&self) -> Vec<f64> {
        let mut y: Vec<f64> = self.basis.iter().map(|&v| self.cost[v]).collect();
        let mut pi = vec![0.0; self.m];
        self.factor.btran(&mut y, &mut pi);
        pi
    }

    /// Returns the direction (+1 or -1) in which `j` improves the objective.
    fn attractive(&self, j: usize, d: f64) -> Option<f64> {
        let tol = self.opts.optimality_tolerance;
        match self.state[j] {
            State::Basic => None,
            _ if self.lo[j] == self.hi[j] => None,
            State::AtLower if d < -tol => Some(1.0),
            State::AtUpper if d > tol => Some(-1.0),
            State::Free if d.abs() > tol => Some(-d.signum()),
            _ => None,
        }
    }

    fn choose_entering(&mut self, pi: &[f64], bland: bool) -> Option<(usize, f64)> {
        let total = self.num_vars();
        if bland {
            return (0..total).find_map(|j| {
                let d = self.cost[j] - self.column_dot(j, pi);
                self.attractive(j, d).map(|dir| (j, dir))
            });
        }
        // Partial Dantzig pricing: scan segments from a rotating cursor and
        // stop at the first segment holding an improving column.
        let segment = (total / 8).max(4096).min(total.max(1));
        let mut scanned = 0;
        let mut best: Option<(usize, f64, f64)> = None;
        while scanned < total {
            let begin = self.price_cursor;
            let len = segment.min(total - scanned);
            for k in 0..len {
                let j = (begin + k) % total;
                if self.state[j] == State::Basic {
                    continue;
                }
                let d = self.cost[j] - self.column_dot(j, pi);
                if let Some(dir) = self.attractive(j, d) {
                    if best.is_none_or(|(_, _, s)| d.abs() > s) {
                        best = Some((j, dir, d.abs()));
                    }
                }
            }
            scanned += len;
            self.price_cursor = (begin + len) % total;
            if best.is_some() {
                break;
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn run_phase(&mut self) -> Result<Step, LpError> {
        let mut degenerate = 0usize;
        loop {
            if self.factor.num_updates() >= REFACTOR_INTERVAL
                || self.factor.update_nnz() > 8 * self.m + 200_000
            {
                self.refactor()?;
            }
            let bland = self.opts.pivot_rule == PivotRule::Bland || degenerate >= DEGENERATE_STREAK_LIMIT;
            let pi = self.duals();
            let Some((q, dir)) = self.choose_entering(&pi, bland) else {
                return Ok(Step::Optimal);
            };

            let mut w = vec![0.0; self.m];
            self.for_each_entry(q, |r, v| w[r] += v);
            let mut alpha = vec![0.0; self.m];
            self.factor.ftran(&mut w, &mut alpha);

            // Ratio test. `None` as the leaving position means a bound flip.
            let mut best: Option<(Option<usize>, f64)> = None;
            let consider = |best: &mut Option<(Option<usize>, f64)>, cand: Option<usize>, ratio: f64, this: &Self| {
                let replace = match *best {
                    None => true,
                    Some((cur, cur_ratio)) => {
                        let slack = 1e-12 * cur_ratio.abs().max(1.0);
                        if ratio < cur_ratio - slack {
                            true
                        } else if ratio > cur_ratio + slack {
                            false
                        } else if bland {
                            let idx = |c: Option<usize>| c.map_or(q, |p| this.basis[p]);
                            idx(cand) < idx(cur)
                        } else {
                            let mag = |c: Option<usize>| c.map_or(f64::INFINITY, |p| alpha[p].abs());
                            mag(cand) > mag(cur)
                        }
                    }
                };
                if replace {
                    *best = Some((cand, ratio));
                }
            };
            if self.lo[q].is_finite() && self.hi[q].is_finite() {
                consider(&mut best, None, self.hi[q] - self.lo[q], self);
            }
            for p in 0..self.m {
                let ap = alpha[p];
                if ap.abs() <= self.opts.pivot_tolerance {
                    continue;
                }
                let v = self.basis[p];
                let rate = -dir * ap;
                let ratio = if rate < 0.0 {
                    if !self.lo[v].is_finite() {
                        continue;
                    }
                    (self.x[v] - self.lo[v]) / -rate
                } else {
                    if !self.hi[v].is_finite() {
                        continue;
                    }
                    (self.hi[v] - self.x[v]) / rate
                };
                consider(&mut best, Some(p), ratio.max(0.0), self);
            }
            let Some((leaving, step)) = best else {
                return Ok(Step::Unbounded);
            };

            if self.iterations >= self.cap {
                return Err(LpError::IterationLimit { limit: self.cap });
            }
            self.iterations += 1;
            degenerate = if step <= 1e-12 { degenerate + 1 } else { 0 };

            if step != 0.0 {
                self.x[q] += dir * step;
                for p in 0..self.m {
                    if alpha[p] != 0.0 {
                        let v = self.basis[p];
                        self.x[v] -= dir * step * alpha[p];
                    }
                }
            }
            match leaving {
                None => {
                    self.state[q] = if dir > 0.0 { State::AtUpper } else { State::AtLower };
                    self.x[q] = if dir > 0.0 { self.hi[q] } else { self.lo[q] };
                }
                Some(p) => {
                    let v = self.basis[p];
                    let rate = -dir * alpha[p];
                    if rate < 0.0 {
                        self.state[v] = State::AtLower;
                        self.x[v] = self.lo[v];
                    } else {
                        self.state[v] = State::AtUpper;
                        self.x[v] = self.hi[v];
                    }
                    if v >= self.n + self.m {
                        // Artificials never return once they leave.
                        self.hi[v] = 0.0;
                        self.state[v] = State::AtLower;
                        self.x[v] = 0.0;
                    }
                    self.state[q] = State::Basic;
                    self.basis[p] = q;
                    self.factor.update(p, &alpha);
                }
            }
        }
    }
}

pub(super) fn solve(
    problem: &LpProblem,
    lower: &[f64],
    upper: &[f64],
    opts: &SolverOptions,
) -> Result<SimplexSolution, LpError> {
    let n = problem.num_vars();
    let m = problem.num_constraints();
    let a = Csc::from_problem(problem);
    let b: Vec<f64> = problem.constraints().iter().map(|c| c.rhs).collect();

    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    let mut x = vec![0.0; n];
    let mut state = Vec::with_capacity(n + 2 * m);
    for j in 0..n {
        let (s, v) = if lo[j].is_finite() {
            (State::AtLower, lo[j])
        } else if hi[j].is_finite() {
            (State::AtUpper, hi[j])
        } else {
            (State::Free, 0.0)
        };
        state.push(s);
        x[j] = v;
    }

    let mut residual = b.clone();
    for j in 0..n {
        if x[j] != 0.0 {
            for t in a.start[j]..a.start[j + 1] {
                residual[a.row[t]] -= a.val[t] * x[j];
            }
        }
    }

    let mut basis = vec![usize::MAX; m];
    let mut art = Vec::new();
    for (i, con) in problem.constraints().iter().enumerate() {
        let (l, u, rest) = match con.sense {
            Sense::Le => (0.0, f64::INFINITY, State::AtLower),
            Sense::Ge => (f64::NEG_INFINITY, 0.0, State::AtUpper),
            Sense::Eq => (0.0, 0.0, State::AtLower),
        };
        lo.push(l);
        hi.push(u);
        let r = residual[i];
        if l <= r && r <= u {
            state.push(State::Basic);
            x.push(r);
            basis[i] = n + i;
        } else {
            state.push(rest);
            x.push(0.0);
            art.push((i, if r > 0.0 { 1.0 } else { -1.0 }));
        }
    }
    // Artificials take the basis positions of the rows they cover.
    let mut cost = vec![0.0; n + m];
    for (k, &(i, _)) in art.iter().enumerate() {
        lo.push(0.0);
        hi.push(f64::INFINITY);
        state.push(State::Basic);
        x.push(residual[i].abs());
        cost.push(1.0);
        basis[i] = n + m + k;
    }

    let mut solver = Revised {
        opts,
        m,
        n,
        a,
        b,
        art,
        lo,
        hi,
        cost,
        x,
        state,
        basis,
        factor: BasisFactor::default(),
        iterations: 0,
        cap: opts.iteration_cap(m, n + m),
        price_cursor: 0,
    };
    solver.refactor()?;

    if !solver.art.is_empty() {
        if let Step::Unbounded = solver.run_phase()? {
            return Err(LpError::Numerical("phase one reported an unbounded ray".into()));
        }
        let first_art = n + m;
        let infeasibility: f64 = (first_art..solver.num_vars()).map(|v| solver.x[v].max(0.0)).sum();
        let scale = solver.b.iter().fold(1.0f64, |acc, v| acc.max(v.abs()));
        if infeasibility > opts.feasibility_tolerance * scale {
            return Ok(SimplexSolution::without_point(Status::Infeasible, solver.iterations, Engine::Revised));
        }
        // A basic artificial at zero shares its column (up to sign) with its
        // row's logical, which is then necessarily nonbasic: swap them.
        for p in 0..m {
            let v = solver.basis[p];
            if v >= first_art {
                let (row, _) = solver.art[v - first_art];
                let logical = n + row;
                debug_assert_ne!(solver.state[logical], State::Basic);
                solver.basis[p] = logical;
                solver.state[logical] = State::Basic;
                solver.state[v] = State::AtLower;
            }
        }
        for v in first_art..solver.num_vars() {
            solver.x[v] = 0.0;
            solver.hi[v] = 0.0;
        }
        solver.refactor()?;
    }

    solver.cost.iter_mut().for_each(|c| *c = 0.0);
    solver.cost[..n].copy_from_slice(problem.objective());
    if let Step::Unbounded = solver.run_phase()? {
        return Ok(SimplexSolution::without_point(Status::Unbounded, solver.iterations, Engine::Revised));
    }

    let point = solver.x[..n].to_vec();
    let mut basis = solver.basis.clone();
    basis.sort_unstable();
    Ok(SimplexSolution {
        status: Status::Optimal,
        objective: problem.objective_value(&point),
        point: Some(point),
        basis,
        iterations: solver.iterations,
        engine: Engine::Revised,
    })
}

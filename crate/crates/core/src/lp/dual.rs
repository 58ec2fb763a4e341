//! Bounded dual simplex for problems whose slack basis is dual feasible.
//!
//! Every model in this crate minimises non-negative costs over variables with
//! finite lower bounds, so placing each structural at the bound its cost sign
//! prefers gives a dual feasible start and no phase one is needed.
//!
//! The basis is held in compact form. Logical columns are unit vectors, so if
//! `S` is the set of basic structurals and `R` the rows whose logical is
//! nonbasic, only the square block `B[R, S]` has to be factorised. Solves and
//! updates then cost time proportional to that block and to the nonzeros
//! touched, not to the total row count. Pricing uses dual steepest-edge
//! weights and the ratio test passes over breakpoints of boxed variables
//! (bound flipping) while the dual objective keeps improving.

use std::cmp::Reverse;
use std::collections::BinaryHeap;

use log::debug;

use super::problem::{LpProblem, Sense};
use super::sparse_lu::SparseLu;
use super::tableau::DEGENERATE_STREAK_LIMIT;
use super::{Engine, LpError, PivotRule, SimplexSolution, SolverOptions, Status};

const NONE: u32 = u32::MAX;
const REFACTOR_INTERVAL: usize = 50;
const MIN_WEIGHT: f64 = 1e-6;
const DROP: f64 = 1e-13;

/// Dense storage with a list of touched indices.
struct SparseVec {
    val: Vec<f64>,
    idx: Vec<usize>,
    mark: Vec<bool>,
}

impl SparseVec {
    fn new(n: usize) -> Self {
        Self { val: vec![0.0; n], idx: Vec::new(), mark: vec![false; n] }
    }

    fn add(&mut self, i: usize, v: f64) {
        if !self.mark[i] {
            self.mark[i] = true;
            self.idx.push(i);
        }
        self.val[i] += v;
    }

    fn clear(&mut self) {
        for &i in &self.idx {
            self.val[i] = 0.0;
            self.mark[i] = false;
        }
        self.idx.clear();
    }

    fn nonzeros(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.idx.iter().map(|&i| (i, self.val[i])).filter(|&(_, v)| v.abs() > DROP)
    }
}

struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

/// Factorisation of a basis in compact form plus product-form updates.
struct CompactBasis {
    lu: SparseLu,
    /// Base structurals by local column, with their basis positions.
    s_vars: Vec<usize>,
    s_pos: Vec<usize>,
    /// Base rows with a nonbasic logical, by local row.
    r_rows: Vec<usize>,
    local_row: Vec<u32>,
    local_var: Vec<u32>,
    /// Position of each base-basic logical, by row.
    logical_pos: Vec<u32>,
    /// Row of the base-basic logical at each position (`NONE` for structurals).
    pos_row: Vec<u32>,
    /// Local column of the base-basic structural at each position.
    pos_local: Vec<u32>,
    etas: Vec<Eta>,
    eta_nnz: usize,
    work_a: Vec<f64>,
    work_b: Vec<f64>,
}

struct Dual<'a> {
    opts: &'a SolverOptions,
    m: usize,
    n: usize,
    // Structural columns (CSC) and rows (CSR).
    col_start: Vec<usize>,
    col_row: Vec<usize>,
    col_val: Vec<f64>,
    row_start: Vec<usize>,
    row_col: Vec<usize>,
    row_val: Vec<f64>,
    b: Vec<f64>,
    lo: Vec<f64>,
    hi: Vec<f64>,
    cost: Vec<f64>,
    x: Vec<f64>,
    d: Vec<f64>,
    basis: Vec<usize>,
    pos_of: Vec<u32>,
    weight: Vec<f64>,
    infeasible: Vec<usize>,
    listed: Vec<bool>,
    factor: CompactBasis,
    iterations: usize,
    cap: usize,
    // Scratch vectors.
    rho: SparseVec,
    row_alpha: SparseVec,
    col_alpha: SparseVec,
    tau: SparseVec,
    flip_col: SparseVec,
    flip_delta: SparseVec,
    unit: SparseVec,
}

enum Outcome {
    Optimal,
    Infeasible,
}

impl<'a> Dual<'a> {
    fn for_column(&self, var: usize, mut f: impl FnMut(usize, f64)) {
        if var < self.n {
            for t in self.col_start[var]..self.col_start[var + 1] {
                f(self.col_row[t], self.col_val[t]);
            }
        } else {
            f(var - self.n, 1.0);
        }
    }

    fn refactor(&mut self) -> Result<(), LpError> {
        let m = self.m;
        let f = &mut self.factor;
        for &v in &f.s_vars {
            f.local_var[v] = NONE;
        }
        for &r in &f.r_rows {
            f.local_row[r] = NONE;
        }
        f.s_vars.clear();
        f.s_pos.clear();
        f.r_rows.clear();
        for p in 0..m {
            let v = self.basis[p];
            if v < self.n {
                f.local_var[v] = f.s_vars.len() as u32;
                f.pos_local[p] = f.s_vars.len() as u32;
                f.s_vars.push(v);
                f.s_pos.push(p);
                f.pos_row[p] = NONE;
            } else {
                f.pos_row[p] = (v - self.n) as u32;
                f.logical_pos[v - self.n] = p as u32;
            }
        }
        for r in 0..m {
            if self.pos_of[self.n + r] == NONE {
                f.local_row[r] = f.r_rows.len() as u32;
                f.r_rows.push(r);
            }
        }
        let k = f.s_vars.len();
        if f.r_rows.len() != k {
            return Err(LpError::Numerical("basis is not square".into()));
        }
        let mut cols = Vec::with_capacity(k);
        for &v in &f.s_vars {
            let mut col = Vec::new();
            for t in self.col_start[v]..self.col_start[v + 1] {
                let lr = f.local_row[self.col_row[t]];
                if lr != NONE {
                    col.push((lr as usize, self.col_val[t]));
                }
            }
            cols.push(col);
        }
        f.lu = SparseLu::factor(k, &cols).map_err(|_| LpError::Numerical("singular basis".into()))?;
        f.etas.clear();
        f.eta_nnz = 0;
        f.work_a = vec![0.0; k];
        f.work_b = vec![0.0; k];
        debug!("dual refactor at {}: compact dimension {k}, lu nnz {}", self.iterations, f.lu.nnz());
        self.recompute_primal();
        self.recompute_duals();
        self.rebuild_infeasible();
        Ok(())
    }

    /// Base solve `B0 z = w` for `w` indexed by row; `z` by position.
    fn base_ftran(&mut self, w: &SparseVec, z: &mut SparseVec) {
        let f = &mut self.factor;
        let k = f.s_vars.len();
        let mut any = false;
        for (r, v) in w.nonzeros() {
            let lr = f.local_row[r];
            if lr != NONE {
                f.work_a[lr as usize] = v;
                any = true;
            } else {
                z.add(f.logical_pos[r] as usize, v);
            }
        }
        if !any || k == 0 {
            return;
        }
        f.lu.solve(&mut f.work_a, &mut f.work_b);
        for t in 0..k {
            f.work_a[t] = 0.0;
            let zt = f.work_b[t];
            if zt.abs() <= DROP {
                continue;
            }
            z.add(f.s_pos[t], zt);
            let v = f.s_vars[t];
            for q in self.col_start[v]..self.col_start[v + 1] {
                let r = self.col_row[q];
                if f.local_row[r] == NONE {
                    z.add(f.logical_pos[r] as usize, -self.col_val[q] * zt);
                }
            }
        }
    }

    /// Base solve `B0^T pi = y` for `y` indexed by position; `pi` by row.
    fn base_btran(&mut self, y: &SparseVec, pi: &mut SparseVec) {
        let f = &mut self.factor;
        let k = f.s_vars.len();
        let mut any = false;
        for (p, v) in y.nonzeros() {
            let r = f.pos_row[p];
            if r != NONE {
                pi.add(r as usize, v);
            } else {
                f.work_a[f.pos_local[p] as usize] += v;
                any = true;
            }
        }
        // Subtract the contribution of logical-row duals.
        for i in 0..pi.idx.len() {
            let r = pi.idx[i];
            let pr = pi.val[r];
            if pr == 0.0 {
                continue;
            }
            for q in self.row_start[r]..self.row_start[r + 1] {
                let t = f.local_var[self.row_col[q]];
                if t != NONE {
                    f.work_a[t as usize] -= self.row_val[q] * pr;
                    any = true;
                }
            }
        }
        if !any || k == 0 {
            f.work_a.iter_mut().for_each(|v| *v = 0.0);
            return;
        }
        f.lu.solve_transpose(&mut f.work_a, &mut f.work_b);
        for t in 0..k {
            f.work_a[t] = 0.0;
            let v = f.work_b[t];
            if v.abs() > DROP {
                pi.add(f.r_rows[t], v);
            }
        }
    }

    fn ftran(&mut self, w: &SparseVec, z: &mut SparseVec) {
        self.base_ftran(w, z);
        for eta in &self.factor.etas {
            let zp = z.val[eta.pos];
            if zp == 0.0 {
                continue;
            }
            let zp = zp / eta.pivot;
            z.val[eta.pos] = zp;
            for &(i, a) in &eta.entries {
                z.add(i, -a * zp);
            }
        }
    }

    /// `y` is consumed.
    fn btran(&mut self, y: &mut SparseVec, pi: &mut SparseVec) {
        for eta in self.factor.etas.iter().rev() {
            let mut s = y.val[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * y.val[i];
            }
            let s = s / eta.pivot;
            if s != 0.0 || y.mark[eta.pos] {
                let old = y.val[eta.pos];
                y.add(eta.pos, s - old);
            }
        }
        self.base_btran(y, pi);
        y.clear();
    }

    fn recompute_primal(&mut self) {
        let (m, n) = (self.m, self.n);
        let mut w = self.b.clone();
        for j in 0..n + m {
            if self.pos_of[j] == NONE && self.x[j] != 0.0 {
                let xj = self.x[j];
                if j < n {
                    for t in self.col_start[j]..self.col_start[j + 1] {
                        w[self.col_row[t]] -= self.col_val[t] * xj;
                    }
                } else {
                    w[j - n] -= xj;
                }
            }
        }
        let f = &mut self.factor;
        let k = f.s_vars.len();
        for (t, &r) in f.r_rows.iter().enumerate() {
            f.work_a[t] = w[r];
        }
        if k > 0 {
            f.lu.solve(&mut f.work_a, &mut f.work_b);
        }
        for t in 0..k {
            f.work_a[t] = 0.0;
            let v = f.s_vars[t];
            let zt = f.work_b[t];
            self.x[v] = zt;
            for q in self.col_start[v]..self.col_start[v + 1] {
                let r = self.col_row[q];
                if f.local_row[r] == NONE {
                    w[r] -= self.col_val[q] * zt;
                }
            }
        }
        for r in 0..m {
            if f.local_row[r] == NONE {
                self.x[n + r] = w[r];
            }
        }
    }

    fn recompute_duals(&mut self) {
        let (m, n) = (self.m, self.n);
        let f = &mut self.factor;
        let k = f.s_vars.len();
        // Logical costs are zero, so only structural basics contribute.
        for t in 0..k {
            f.work_a[t] = self.cost[f.s_vars[t]];
        }
        let mut pi = vec![0.0; m];
        if k > 0 {
            f.lu.solve_transpose(&mut f.work_a, &mut f.work_b);
            for t in 0..k {
                f.work_a[t] = 0.0;
                pi[f.r_rows[t]] = f.work_b[t];
            }
        }
        for j in 0..n {
            self.d[j] = if self.pos_of[j] != NONE {
                0.0
            } else {
                let dot: f64 = (self.col_start[j]..self.col_start[j + 1]).map(|t| self.col_val[t] * pi[self.col_row[t]]).sum();
                self.cost[j] - dot
            };
        }
        for r in 0..m {
            self.d[n + r] = if self.pos_of[n + r] != NONE { 0.0 } else { -pi[r] };
        }
    }

    fn infeasibility(&self, p: usize) -> f64 {
        let v = self.basis[p];
        let x = self.x[v];
        let tol = self.opts.feasibility_tolerance;
        if x < self.lo[v] - tol {
            x - self.lo[v]
        } else if x > self.hi[v] + tol {
            x - self.hi[v]
        } else {
            0.0
        }
    }

    fn rebuild_infeasible(&mut self) {
        for &p in &self.infeasible {
            self.listed[p] = false;
        }
        self.infeasible.clear();
        for p in 0..self.m {
            if self.infeasibility(p) != 0.0 {
                self.listed[p] = true;
                self.infeasible.push(p);
            }
        }
    }

    fn note_changed(&mut self, p: usize) {
        if !self.listed[p] && self.infeasibility(p) != 0.0 {
            self.listed[p] = true;
            self.infeasible.push(p);
        }
    }

    /// Leaving position: largest squared infeasibility over its weight, or
    /// the lowest variable index under Bland's rule.
    fn choose_leaving(&mut self, bland: bool) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        let mut i = 0;
        while i < self.infeasible.len() {
            let p = self.infeasible[i];
            let inf = self.infeasibility(p);
            if inf == 0.0 {
                self.listed[p] = false;
                self.infeasible.swap_remove(i);
                continue;
            }
            let score = if bland { -(self.basis[p] as f64) } else { inf * inf / self.weight[p] };
            if best.is_none_or(|(_, s)| score > s) {
                best = Some((p, score));
            }
            i += 1;
        }
        best.map(|(p, _)| p)
    }

    fn nonbasic_dir_ok(&self, j: usize, abar: f64) -> bool {
        let tol = self.opts.pivot_tolerance;
        if self.lo[j] == self.hi[j] {
            return false;
        }
        let at_lower = self.lo[j].is_finite() && self.x[j] == self.lo[j];
        let at_upper = self.hi[j].is_finite() && self.x[j] == self.hi[j];
        if at_lower {
            abar > tol
        } else if at_upper {
            abar < -tol
        } else {
            abar.abs() > tol
        }
    }

    fn run(&mut self) -> Result<Outcome, LpError> {
        let mut degenerate = 0usize;
        let mut retried = false;
        loop {
            if self.factor.etas.len() >= REFACTOR_INTERVAL || self.factor.eta_nnz > 4 * self.m + 100_000 {
                self.refactor()?;
            }
            let bland = self.opts.pivot_rule == PivotRule::Bland || degenerate >= DEGENERATE_STREAK_LIMIT;
            let Some(p) = self.choose_leaving(bland) else {
                return Ok(Outcome::Optimal);
            };
            let leaving = self.basis[p];
            let delta = self.infeasibility(p);
            let s = delta.signum();

            // rho = e_p^T B^-1, then the pivot row over nonbasic columns.
            self.unit.add(p, 1.0);
            let mut unit = std::mem::replace(&mut self.unit, SparseVec::new(0));
            let mut rho = std::mem::replace(&mut self.rho, SparseVec::new(0));
            self.btran(&mut unit, &mut rho);
            self.unit = unit;
            let rho_norm2: f64 = rho.nonzeros().map(|(_, v)| v * v).sum();
            self.weight[p] = rho_norm2.max(MIN_WEIGHT);
            for (r, v) in rho.nonzeros() {
                if self.pos_of[self.n + r] == NONE {
                    self.row_alpha.add(self.n + r, v);
                }
                for q in self.row_start[r]..self.row_start[r + 1] {
                    let j = self.row_col[q];
                    if self.pos_of[j] == NONE {
                        self.row_alpha.add(j, v * self.row_val[q]);
                    }
                }
            }

            // Breakpoints of the dual ratio test.
            let mut cands: Vec<(usize, f64, f64)> = Vec::new();
            for (j, a) in self.row_alpha.nonzeros() {
                let abar = s * a;
                if self.nonbasic_dir_ok(j, abar) {
                    let ratio = (self.d[j] / abar).max(0.0);
                    cands.push((j, ratio, abar.abs()));
                }
            }
            if cands.is_empty() {
                self.rho = rho;
                self.rho.clear();
                self.row_alpha.clear();
                return Ok(Outcome::Infeasible);
            }
            let (q, flips) = if bland {
                let best = cands
                    .iter()
                    .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
                    .copied()
                    .expect("non-empty");
                (best.0, Vec::new())
            } else {
                self.bound_flipping_choice(cands, delta.abs())
            };
            let alpha_pq = self.row_alpha.val[q];
            let theta_d = self.d[q] / alpha_pq;

            // Entering column and DSE helper.
            let mut w = std::mem::replace(&mut self.flip_col, SparseVec::new(0));
            self.for_column(q, |r, a| w.add(r, a));
            let mut col = std::mem::replace(&mut self.col_alpha, SparseVec::new(0));
            self.ftran(&w, &mut col);
            w.clear();
            let alpha_p = col.val[p];
            if alpha_p.abs() <= self.opts.pivot_tolerance
                || (alpha_p - alpha_pq).abs() > 1e-7 * alpha_pq.abs().max(1.0)
            {
                col.clear();
                self.col_alpha = col;
                self.flip_col = w;
                self.rho = rho;
                self.rho.clear();
                self.row_alpha.clear();
                if retried || self.factor.etas.is_empty() {
                    return Err(LpError::Numerical(format!("unstable pivot {alpha_p:e} vs {alpha_pq:e}")));
                }
                retried = true;
                self.refactor()?;
                continue;
            }
            retried = false;
            let mut tau = std::mem::replace(&mut self.tau, SparseVec::new(0));
            self.ftran(&rho, &mut tau);

            if self.iterations >= self.cap {
                return Err(LpError::IterationLimit { limit: self.cap });
            }
            self.iterations += 1;

            // Dual update.
            for &j in &self.row_alpha.idx {
                self.d[j] -= theta_d * self.row_alpha.val[j];
            }
            self.d[q] = 0.0;
            self.d[leaving] = -theta_d;

            // Bound flips, then the primal step of the leaving variable.
            if !flips.is_empty() {
                for &j in &flips {
                    let to = if self.x[j] == self.lo[j] { self.hi[j] } else { self.lo[j] };
                    let dx = to - self.x[j];
                    self.x[j] = to;
                    self.for_column(j, |r, a| w.add(r, a * dx));
                }
                let mut dz = std::mem::replace(&mut self.flip_delta, SparseVec::new(0));
                self.ftran(&w, &mut dz);
                w.clear();
                for &i in &dz.idx {
                    self.x[self.basis[i]] -= dz.val[i];
                }
                for &i in &dz.idx {
                    self.note_changed(i);
                }
                dz.clear();
                self.flip_delta = dz;
            }
            self.flip_col = w;

            let target = if s < 0.0 { self.lo[leaving] } else { self.hi[leaving] };
            let theta_p = (self.x[leaving] - target) / alpha_p;
            if theta_p != 0.0 {
                for &i in &col.idx {
                    self.x[self.basis[i]] -= theta_p * col.val[i];
                }
                for &i in &col.idx {
                    self.note_changed(i);
                }
                self.x[q] += theta_p;
            }
            self.x[leaving] = target;
            degenerate = if (theta_d * delta).abs() <= 1e-12 { degenerate + 1 } else { 0 };

            // Dual steepest-edge weights.
            let wp = self.weight[p];
            for &i in &col.idx {
                if i == p {
                    continue;
                }
                let ratio = col.val[i] / alpha_p;
                let updated = self.weight[i] + ratio * (ratio * wp - 2.0 * tau.val[i]);
                self.weight[i] = updated.max(MIN_WEIGHT);
            }
            self.weight[p] = (wp / (alpha_p * alpha_p)).max(MIN_WEIGHT);

            // Basis change.
            self.basis[p] = q;
            self.pos_of[q] = p as u32;
            self.pos_of[leaving] = NONE;
            let entries: Vec<(usize, f64)> = col.nonzeros().filter(|&(i, _)| i != p).collect();
            self.factor.eta_nnz += entries.len() + 1;
            self.factor.etas.push(Eta { pos: p, pivot: alpha_p, entries });
            self.note_changed(p);

            col.clear();
            self.col_alpha = col;
            tau.clear();
            self.tau = tau;
            rho.clear();
            self.rho = rho;
            self.row_alpha.clear();
        }
    }

    /// Walks the breakpoints in increasing order, flipping boxed candidates
    /// while the slope of the dual objective stays positive. Returns the
    /// entering variable and the variables to flip.
    fn bound_flipping_choice(&self, cands: Vec<(usize, f64, f64)>, mut slope: f64) -> (usize, Vec<usize>) {
        // Ratios are non-negative, so their bit patterns sort like the values.
        let abar = |j: usize| self.row_alpha.val[j].abs();
        let mut heap: BinaryHeap<Reverse<(u64, usize)>> = cands.iter().map(|&(j, r, _)| Reverse((r.to_bits(), j))).collect();
        let mut flips = Vec::new();
        let (stop, mut best) = loop {
            let Reverse((r, j)) = heap.pop().expect("at least one candidate");
            let range = self.hi[j] - self.lo[j];
            let after = slope - abar(j) * range;
            if range.is_finite() && after > self.opts.feasibility_tolerance && !heap.is_empty() {
                slope = after;
                flips.push(j);
            } else {
                break (f64::from_bits(r), j);
            }
        };
        // Among near-ties at the stopping breakpoint prefer the largest pivot.
        let tie = stop + 1e-9 * stop.max(1.0);
        while let Some(&Reverse((r, j))) = heap.peek() {
            if f64::from_bits(r) > tie {
                break;
            }
            heap.pop();
            if abar(j) > abar(best) {
                best = j;
            }
        }
        (best, flips)
    }

    /// Restores the sign condition on small reduced-cost errors; large ones on
    /// boxed variables are fixed by moving to the other bound.
    fn repair_duals(&mut self) -> bool {
        let tol = self.opts.optimality_tolerance.max(1e-7);
        let mut ok = true;
        let mut moved = false;
        for j in 0..self.n + self.m {
            if self.pos_of[j] != NONE || self.lo[j] == self.hi[j] {
                continue;
            }
            let at_lower = self.lo[j].is_finite() && self.x[j] == self.lo[j];
            let at_upper = self.hi[j].is_finite() && self.x[j] == self.hi[j];
            let bad = (at_lower && self.d[j] < 0.0) || (at_upper && self.d[j] > 0.0) || (!at_lower && !at_upper && self.d[j] != 0.0);
            if !bad {
                continue;
            }
            if self.d[j].abs() <= tol {
                self.d[j] = 0.0;
            } else if self.lo[j].is_finite() && self.hi[j].is_finite() {
                self.x[j] = if at_lower { self.hi[j] } else { self.lo[j] };
                moved = true;
            } else {
                ok = false;
            }
        }
        if moved {
            self.recompute_primal();
            self.rebuild_infeasible();
        }
        ok
    }
}

/// Final basis of a dual run. Restarting from it after bound changes keeps
/// dual feasibility, so only the primal infeasibilities those changes create
/// have to be repaired.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WarmStart {
    basis: Vec<u32>,
    /// Nonbasic variables resting at their upper bound.
    at_upper: Vec<u32>,
}

/// Returns `None` when the slack basis is not dual feasible.
pub(super) fn solve(
    problem: &LpProblem,
    lower: &[f64],
    upper: &[f64],
    opts: &SolverOptions,
) -> Result<Option<SimplexSolution>, LpError> {
    Ok(solve_from(problem, lower, upper, opts, None)?.map(|(sol, _)| sol))
}

/// Like [`solve`], starting from `warm` when given. Also returns `None` when
/// the warm basis is singular or not dual feasible under the new bounds.
pub(super) fn solve_from(
    problem: &LpProblem,
    lower: &[f64],
    upper: &[f64],
    opts: &SolverOptions,
    warm: Option<&WarmStart>,
) -> Result<Option<(SimplexSolution, Option<WarmStart>)>, LpError> {
    let n = problem.num_vars();
    let m = problem.num_constraints();
    let c = problem.objective();

    let mut x = vec![0.0; n + m];
    if warm.is_none() {
        for j in 0..n {
            let (l, u) = (lower[j], upper[j]);
            x[j] = if c[j] > 0.0 {
                if !l.is_finite() {
                    return Ok(None);
                }
                l
            } else if c[j] < 0.0 {
                if !u.is_finite() {
                    return Ok(None);
                }
                u
            } else if l.is_finite() {
                l
            } else if u.is_finite() {
                u
            } else {
                0.0
            };
        }
    }

    // CSC and CSR copies of the structural matrix.
    let mut col_count = vec![0usize; n + 1];
    let mut row_start = vec![0usize; m + 1];
    for (i, con) in problem.constraints().iter().enumerate() {
        row_start[i + 1] = row_start[i] + con.coeffs.len();
        for &(j, _) in &con.coeffs {
            col_count[j + 1] += 1;
        }
    }
    for j in 0..n {
        col_count[j + 1] += col_count[j];
    }
    let nnz = row_start[m];
    let mut next = col_count.clone();
    let (mut col_row, mut col_val) = (vec![0; nnz], vec![0.0; nnz]);
    let (mut row_col, mut row_val) = (Vec::with_capacity(nnz), Vec::with_capacity(nnz));
    for (i, con) in problem.constraints().iter().enumerate() {
        for &(j, a) in &con.coeffs {
            col_row[next[j]] = i;
            col_val[next[j]] = a;
            next[j] += 1;
            row_col.push(j);
            row_val.push(a);
        }
    }

    let mut lo = lower.to_vec();
    let mut hi = upper.to_vec();
    for con in problem.constraints() {
        let (l, u) = match con.sense {
            Sense::Le => (0.0, f64::INFINITY),
            Sense::Ge => (f64::NEG_INFINITY, 0.0),
            Sense::Eq => (0.0, 0.0),
        };
        lo.push(l);
        hi.push(u);
    }
    let mut cost = c.to_vec();
    cost.resize(n + m, 0.0);
    let mut pos_of = vec![NONE; n + m];
    let basis: Vec<usize> = match warm {
        None => (n..n + m).collect(),
        Some(w) => {
            if w.basis.len() != m {
                return Err(LpError::Malformed("warm start basis does not match the row count".into()));
            }
            w.basis.iter().map(|&v| v as usize).collect()
        }
    };
    for (p, &v) in basis.iter().enumerate() {
        if v >= n + m || pos_of[v] != NONE {
            return Err(LpError::Malformed("warm start basis is not a set of columns".into()));
        }
        pos_of[v] = p as u32;
    }
    if let Some(w) = warm {
        for &v in &w.at_upper {
            x[v as usize] = f64::NAN;
        }
        for j in 0..n + m {
            if pos_of[j] != NONE {
                continue;
            }
            let up = x[j].is_nan();
            x[j] = match (lo[j].is_finite(), hi[j].is_finite()) {
                (_, true) if up => hi[j],
                (true, _) => lo[j],
                (false, true) => hi[j],
                (false, false) => 0.0,
            };
        }
    }

    let mut solver = Dual {
        opts,
        m,
        n,
        col_start: col_count,
        col_row,
        col_val,
        row_start,
        row_col,
        row_val,
        b: problem.constraints().iter().map(|c| c.rhs).collect(),
        lo,
        hi,
        cost,
        x,
        d: vec![0.0; n + m],
        basis,
        pos_of,
        weight: vec![1.0; m],
        infeasible: Vec::new(),
        listed: vec![false; m],
        factor: CompactBasis {
            lu: SparseLu::default(),
            s_vars: Vec::new(),
            s_pos: Vec::new(),
            r_rows: Vec::new(),
            local_row: vec![NONE; m],
            local_var: vec![NONE; n],
            logical_pos: vec![NONE; m],
            pos_row: vec![NONE; m],
            pos_local: vec![NONE; m],
            etas: Vec::new(),
            eta_nnz: 0,
            work_a: Vec::new(),
            work_b: Vec::new(),
        },
        iterations: 0,
        cap: opts.iteration_cap(m, n + m),
        rho: SparseVec::new(m),
        row_alpha: SparseVec::new(n + m),
        col_alpha: SparseVec::new(m),
        tau: SparseVec::new(m),
        flip_col: SparseVec::new(m),
        flip_delta: SparseVec::new(m),
        unit: SparseVec::new(m),
    };
    if warm.is_some() {
        if solver.refactor().is_err() || !solver.repair_duals() {
            return Ok(None);
        }
    } else {
        solver.refactor()?;
    }

    loop {
        match solver.run()? {
            Outcome::Infeasible => {
                let sol = SimplexSolution::without_point(Status::Infeasible, solver.iterations, Engine::Dual);
                return Ok(Some((sol, None)));
            }
            Outcome::Optimal => {}
        }
        // Confirm on a fresh factorisation before reporting.
        solver.refactor()?;
        if !solver.repair_duals() {
            return Ok(None);
        }
        if solver.infeasible.iter().all(|&p| solver.infeasibility(p) == 0.0) {
            break;
        }
    }

    let point = solver.x[..n].to_vec();
    let restart = WarmStart {
        basis: solver.basis.iter().map(|&v| v as u32).collect(),
        at_upper: (0..n + m)
            .filter(|&j| {
                solver.pos_of[j] == NONE && solver.hi[j].is_finite() && solver.x[j] == solver.hi[j] && solver.lo[j] != solver.hi[j]
            })
            .map(|j| j as u32)
            .collect(),
    };
    let mut basis = solver.basis.clone();
    basis.sort_unstable();
    let sol = SimplexSolution {
        status: Status::Optimal,
        objective: problem.objective_value(&point),
        point: Some(point),
        basis,
        iterations: solver.iterations,
        engine: Engine::Dual,
    };
    Ok(Some((sol, Some(restart))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{solve_simplex, Engine};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_lp(rng: &mut ChaCha8Rng) -> LpProblem {
        let n = rng.gen_range(1..7);
        let m = rng.gen_range(0..6);
        let mut lp = LpProblem::new((0..n).map(|_| rng.gen_range(0..5) as f64).collect());
        for j in 0..n {
            let hi = if rng.gen_bool(0.5) { rng.gen_range(1..4) as f64 } else { f64::INFINITY };
            lp.set_bounds(j, 0.0, hi).unwrap();
        }
        for _ in 0..m {
            let mut coeffs = Vec::new();
            for j in 0..n {
                if rng.gen_bool(0.6) {
                    coeffs.push((j, rng.gen_range(-2..4) as f64));
                }
            }
            let sense = [Sense::Le, Sense::Ge, Sense::Eq][rng.gen_range(0..3)];
            lp.add_constraint(coeffs, sense, rng.gen_range(-2..6) as f64).unwrap();
        }
        lp
    }

    #[test]
    fn agrees_with_the_tableau_on_random_problems() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tableau = SolverOptions::default().with_engine(Engine::Tableau);
        for _ in 0..400 {
            let lp = random_lp(&mut rng);
            let want = solve_simplex(&lp, &tableau).unwrap();
            for rule in [PivotRule::Bland, PivotRule::Dantzig] {
                let opts = SolverOptions::default().with_pivot_rule(rule);
                let got = solve(&lp, lp.lower_bounds(), lp.upper_bounds(), &opts).unwrap().expect("costs are non-negative");
                assert_eq!(got.status, want.status);
                if want.is_optimal() {
                    assert!((got.objective - want.objective).abs() < 1e-7, "{} vs {}", got.objective, want.objective);
                    assert!(lp.is_feasible(got.point.as_ref().unwrap(), 1e-7));
                    assert_eq!(got.basis.len(), lp.num_constraints());
                }
            }
        }
    }

    #[test]
    fn declines_a_dual_infeasible_start() {
        let mut lp = LpProblem::new(vec![-1.0]);
        lp.add_constraint([(0, 1.0)], Sense::Le, 4.0).unwrap();
        assert_eq!(solve(&lp, lp.lower_bounds(), lp.upper_bounds(), &SolverOptions::default()), Ok(None));
        let sol = solve_simplex(&lp, &SolverOptions::default().with_engine(Engine::Dual)).unwrap();
        assert_eq!(sol.engine, Engine::Revised);
        assert_eq!(sol.objective, -4.0);
    }

    #[test]
    fn boxed_flips_reach_the_optimum() {
        // sum x >= 3.5 over four boxed variables with distinct costs.
        let mut lp = LpProblem::new(vec![1.0, 2.0, 3.0, 4.0]);
        lp.set_all_bounds(0.0, 1.0);
        lp.add_constraint((0..4).map(|j| (j, 1.0)), Sense::Ge, 3.5).unwrap();
        let sol = solve(&lp, lp.lower_bounds(), lp.upper_bounds(), &SolverOptions::default().with_pivot_rule(PivotRule::Dantzig))
            .unwrap()
            .unwrap();
        assert!((sol.objective - 8.0).abs() < 1e-9);
        assert_eq!(sol.iterations, 1);
    }

    #[test]
    fn warm_restart_after_tightening_matches_a_cold_solve() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let tableau = SolverOptions::default().with_engine(Engine::Tableau);
        let mut warm_used = 0;
        for _ in 0..400 {
            let lp = random_lp(&mut rng);
            let opts = SolverOptions::default().with_pivot_rule(PivotRule::Dantzig);
            let Some((parent, Some(warm))) = solve_from(&lp, lp.lower_bounds(), lp.upper_bounds(), &opts, None).unwrap()
            else {
                continue;
            };
            let x = parent.point.unwrap();
            let j = rng.gen_range(0..lp.num_vars());
            let (mut lower, mut upper) = (lp.lower_bounds().to_vec(), lp.upper_bounds().to_vec());
            if rng.gen_bool(0.5) {
                upper[j] = (x[j] - 0.5).floor().max(lower[j]);
            } else {
                lower[j] = (x[j] + 0.5).ceil().min(upper[j]);
            }
            let mut child = lp.clone();
            child.set_bounds(j, lower[j], upper[j]).unwrap();
            let want = solve_simplex(&child, &tableau).unwrap();
            let (got, _) = solve_from(&lp, &lower, &upper, &opts, Some(&warm)).unwrap().expect("bounds keep dual feasibility");
            warm_used += 1;
            assert_eq!(got.status, want.status);
            if want.is_optimal() {
                assert!((got.objective - want.objective).abs() < 1e-7, "{} vs {}", got.objective, want.objective);
                assert!(child.is_feasible(got.point.as_ref().unwrap(), 1e-7));
            }
        }
        assert!(warm_used > 150, "{warm_used}");
    }

    #[test]
    fn malformed_warm_starts_are_rejected() {
        let mut lp = LpProblem::new(vec![1.0, 1.0]);
        lp.add_constraint([(0, 1.0), (1, 1.0)], Sense::Ge, 1.0).unwrap();
        let opts = SolverOptions::default();
        let short = WarmStart { basis: vec![], at_upper: vec![] };
        assert!(matches!(solve_from(&lp, lp.lower_bounds(), lp.upper_bounds(), &opts, Some(&short)), Err(LpError::Malformed(_))));
        let out_of_range = WarmStart { basis: vec![7], at_upper: vec![] };
        assert!(solve_from(&lp, lp.lower_bounds(), lp.upper_bounds(), &opts, Some(&out_of_range)).is_err());
    }
}

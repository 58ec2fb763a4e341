//! Basis factorisation for the revised simplex engine.
//!
//! The basis is permuted into
//!
//! ```text
//!   [ U11  U12  U13 ]   column singletons (upper triangular)
//!   [  0   L22   0  ]   row singletons (lower triangular)
//!   [  0   L32  K   ]   kernel ("bump"), sparse LU
//! ```
//!
//! Slack-heavy bases from the location and transport models are almost
//! largely triangular before the kernel is reached. Updates between
//! refactorisations are kept in product form (one eta column per pivot).

use super::sparse_lu::SparseLu;

#[derive(Debug)]
pub(super) struct Singular;

#[derive(Clone, Copy, Debug)]
struct Pivot {
    row: usize,
    pos: usize,
    value: f64,
}

#[derive(Debug)]
struct Eta {
    pos: usize,
    pivot: f64,
    entries: Vec<(usize, f64)>,
}

#[derive(Debug, Default)]
pub(super) struct BasisFactor {
    m: usize,
    start: Vec<usize>,
    index: Vec<usize>,
    value: Vec<f64>,
    col_pivots: Vec<Pivot>,
    row_pivots: Vec<Pivot>,
    kernel_rows: Vec<usize>,
    kernel_pos: Vec<usize>,
    kernel: SparseLu,
    etas: Vec<Eta>,
    eta_nnz: usize,
}

impl BasisFactor {
    /// Factorises the `m x m` basis whose column at position `p` is written
    /// by `fill(p, &mut buf)` as `(row, value)` pairs.
    pub(super) fn factorize<F>(m: usize, mut fill: F) -> Result<Self, Singular>
    where
        F: FnMut(usize, &mut Vec<(usize, f64)>),
    {
        let mut start = Vec::with_capacity(m + 1);
        let mut index = Vec::new();
        let mut value = Vec::new();
        let mut buf = Vec::new();
        start.push(0);
        for p in 0..m {
            buf.clear();
            fill(p, &mut buf);
            for &(r, v) in &buf {
                if v != 0.0 {
                    index.push(r);
                    value.push(v);
                }
            }
            start.push(index.len());
        }

        // Row-wise pattern of the basis.
        let mut row_start = vec![0usize; m + 1];
        for &r in &index {
            row_start[r + 1] += 1;
        }
        for r in 0..m {
            row_start[r + 1] += row_start[r];
        }
        let mut fillp = row_start.clone();
        let mut row_pos = vec![0usize; index.len()];
        for p in 0..m {
            for &r in &index[start[p]..start[p + 1]] {
                row_pos[fillp[r]] = p;
                fillp[r] += 1;
            }
        }

        let mut col_count: Vec<usize> = (0..m).map(|p| start[p + 1] - start[p]).collect();
        let mut row_count: Vec<usize> = (0..m).map(|r| row_start[r + 1] - row_start[r]).collect();
        let mut row_active = vec![true; m];
        let mut pos_active = vec![true; m];
        let tiny = 1e-11;

        let mut col_pivots = Vec::new();
        let mut stack: Vec<usize> = (0..m).filter(|&p| col_count[p] == 1).collect();
        while let Some(p) = stack.pop() {
            if !pos_active[p] || col_count[p] != 1 {
                continue;
            }
            let Some(k) = (start[p]..start[p + 1]).find(|&k| row_active[index[k]]) else {
                continue;
            };
            if value[k].abs() <= tiny {
                continue;
            }
            let r = index[k];
            col_pivots.push(Pivot { row: r, pos: p, value: value[k] });
            pos_active[p] = false;
            row_active[r] = false;
            for &q in &row_pos[row_start[r]..row_start[r + 1]] {
                if pos_active[q] {
                    col_count[q] -= 1;
                    if col_count[q] == 1 {
                        stack.push(q);
                    }
                }
            }
            for &i in &index[start[p]..start[p + 1]] {
                if row_active[i] {
                    row_count[i] -= 1;
                }
            }
        }

        let mut row_pivots = Vec::new();
        let mut stack: Vec<usize> = (0..m).filter(|&r| row_active[r] && row_count[r] == 1).collect();
        while let Some(r) = stack.pop() {
            if !row_active[r] || row_count[r] != 1 {
                continue;
            }
            let Some(&p) = row_pos[row_start[r]..row_start[r + 1]].iter().find(|&&p| pos_active[p]) else {
                continue;
            };
            let k = (start[p]..start[p + 1]).find(|&k| index[k] == r).expect("pattern is symmetric");
            if value[k].abs() <= tiny {
                continue;
            }
            row_pivots.push(Pivot { row: r, pos: p, value: value[k] });
            row_active[r] = false;
            pos_active[p] = false;
            for &i in &index[start[p]..start[p + 1]] {
                if row_active[i] {
                    row_count[i] -= 1;
                    if row_count[i] == 1 {
                        stack.push(i);
                    }
                }
            }
        }

        let kernel_rows: Vec<usize> = (0..m).filter(|&r| row_active[r]).collect();
        let kernel_pos: Vec<usize> = (0..m).filter(|&p| pos_active[p]).collect();
        if kernel_rows.len() != kernel_pos.len() {
            return Err(Singular);
        }
        let k = kernel_rows.len();
        let mut row_map = vec![usize::MAX; m];
        for (i, &r) in kernel_rows.iter().enumerate() {
            row_map[r] = i;
        }
        let mut kcols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); k];
        for (c, &p) in kernel_pos.iter().enumerate() {
            for t in start[p]..start[p + 1] {
                let i = row_map[index[t]];
                if i != usize::MAX {
                    kcols[c].push((i, value[t]));
                }
            }
        }
        let kernel = SparseLu::factor(k, &kcols)?;

        Ok(Self {
            m,
            start,
            index,
            value,
            col_pivots,
            row_pivots,
            kernel_rows,
            kernel_pos,
            kernel,
            etas: Vec::new(),
            eta_nnz: 0,
        })
    }

    pub(super) fn kernel_size(&self) -> usize {
        self.kernel_pos.len()
    }

    pub(super) fn num_updates(&self) -> usize {
        self.etas.len()
    }

    pub(super) fn update_nnz(&self) -> usize {
        self.eta_nnz
    }

    fn scatter(&self, p: usize, z: f64, w: &mut [f64]) {
        for t in self.start[p]..self.start[p + 1] {
            w[self.index[t]] -= self.value[t] * z;
        }
    }

    fn dot(&self, p: usize, pi: &[f64]) -> f64 {
        (self.start[p]..self.start[p + 1]).map(|t| self.value[t] * pi[self.index[t]]).sum()
    }

    /// Solves `B z = w`. `w` is indexed by row and is consumed; `z` (indexed by
    /// basis position) must be zero on entry.
    pub(super) fn ftran(&self, w: &mut [f64], z: &mut [f64]) {
        debug_assert_eq!(w.len(), self.m);
        for pv in &self.row_pivots {
            let v = w[pv.row];
            if v != 0.0 {
                let zp = v / pv.value;
                z[pv.pos] = zp;
                self.scatter(pv.pos, zp, w);
            }
        }
        if !self.kernel_pos.is_empty() {
            let mut rhs: Vec<f64> = self.kernel_rows.iter().map(|&r| w[r]).collect();
            let mut sol = vec![0.0; rhs.len()];
            self.kernel.solve(&mut rhs, &mut sol);
            for (c, &p) in self.kernel_pos.iter().enumerate() {
                z[p] = sol[c];
                if sol[c] != 0.0 {
                    self.scatter(p, sol[c], w);
                }
            }
        }
        for pv in self.col_pivots.iter().rev() {
            let v = w[pv.row];
            if v != 0.0 {
                let zp = v / pv.value;
                z[pv.pos] = zp;
                self.scatter(pv.pos, zp, w);
            }
        }
        for eta in &self.etas {
            let zr = z[eta.pos];
            if zr != 0.0 {
                let zr = zr / eta.pivot;
                z[eta.pos] = zr;
                for &(i, a) in &eta.entries {
                    z[i] -= a * zr;
                }
            }
        }
    }

    /// Solves `B^T pi = y`. `y` is indexed by basis position and is consumed;
    /// `pi` (indexed by row) must be zero on entry.
    pub(super) fn btran(&self, y: &mut [f64], pi: &mut [f64]) {
        for eta in self.etas.iter().rev() {
            let mut s = y[eta.pos];
            for &(i, a) in &eta.entries {
                s -= a * y[i];
            }
            y[eta.pos] = s / eta.pivot;
        }
        for pv in &self.col_pivots {
            let s = y[pv.pos] - self.dot(pv.pos, pi);
            pi[pv.row] = s / pv.value;
        }
        if !self.kernel_pos.is_empty() {
            let mut rhs: Vec<f64> = self.kernel_pos.iter().map(|&p| y[p] - self.dot(p, pi)).collect();
            let mut sol = vec![0.0; rhs.len()];
            self.kernel.solve_transpose(&mut rhs, &mut sol);
            for (i, &r) in self.kernel_rows.iter().enumerate() {
                pi[r] = sol[i];
            }
        }
        for pv in self.row_pivots.iter().rev() {
            let s = y[pv.pos] - self.dot(pv.pos, pi);
            pi[pv.row] = s / pv.value;
        }
    }

    /// Records that the column at `pos` was replaced by one whose
    /// representation in the current basis is `alpha` (position indexed).
    pub(super) fn update(&mut self, pos: usize, alpha: &[f64]) {
        let entries: Vec<(usize, f64)> = alpha
            .iter()
            .enumerate()
            .filter(|&(i, &a)| i != pos && a.abs() > 1e-14)
            .map(|(i, &a)| (i, a))
            .collect();
        self.eta_nnz += entries.len() + 1;
        self.etas.push(Eta { pos, pivot: alpha[pos], entries });
    }
}

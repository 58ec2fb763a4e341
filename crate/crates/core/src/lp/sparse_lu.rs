//! Sparse LU factorisation with Markowitz-style pivot selection.

use super::factor::Singular;

const THRESHOLD: f64 = 0.1;
const DROP: f64 = 1e-14;

#[derive(Debug, Clone)]
struct Step {
    row: usize,
    col: usize,
    pivot: f64,
    /// `(row, multiplier)` for rows eliminated later.
    lower: Vec<(usize, f64)>,
    /// `(col, value)` of the pivot row in columns eliminated later.
    upper: Vec<(usize, f64)>,
}

/// `A = P^T L U Q^T` for a square sparse matrix.
#[derive(Debug, Clone, Default)]
pub(super) struct SparseLu {
    steps: Vec<Step>,
}

impl SparseLu {
    /// Factorises the `n x n` matrix whose column `j` is `cols[j]` (row, value).
    pub(super) fn factor(n: usize, cols: &[Vec<(usize, f64)>]) -> Result<Self, Singular> {
        debug_assert_eq!(cols.len(), n);
        let mut active: Vec<Vec<(usize, f64)>> = cols.to_vec();
        let mut rows: Vec<Vec<usize>> = vec![Vec::new(); n];
        for (j, col) in active.iter_mut().enumerate() {
            col.retain(|&(_, v)| v != 0.0);
            for &(i, _) in col.iter() {
                rows[i].push(j);
            }
        }
        let mut col_done = vec![false; n];
        let mut row_done = vec![false; n];
        let mut steps = Vec::with_capacity(n);
        let scale = cols.iter().flatten().fold(0.0f64, |a, &(_, v)| a.max(v.abs())).max(1.0);

        // Columns bucketed by active count; stale entries are skipped lazily.
        let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); n + 1];
        for (j, col) in active.iter().enumerate() {
            buckets[col.len().min(n)].push(j);
        }
        let mut lowest = 0usize;

        for _ in 0..n {
            // Smallest active column count.
            let c = loop {
                while lowest <= n && buckets[lowest].is_empty() {
                    lowest += 1;
                }
                if lowest > n {
                    return Err(Singular);
                }
                let j = buckets[lowest].pop().expect("non-empty bucket");
                if !col_done[j] && active[j].len().min(n) == lowest {
                    break j;
                }
            };
            let col = &active[c];
            let max_abs = col.iter().fold(0.0f64, |a, &(_, v)| a.max(v.abs()));
            if max_abs <= 1e-11 * scale {
                return Err(Singular);
            }
            // Sparsest acceptable row within the column.
            let (r, piv) = col
                .iter()
                .filter(|&&(_, v)| v.abs() >= THRESHOLD * max_abs)
                .min_by_key(|&&(i, _)| rows[i].len())
                .copied()
                .expect("threshold admits the largest entry");

            let lower: Vec<(usize, f64)> = col.iter().filter(|&&(i, _)| i != r).map(|&(i, v)| (i, v / piv)).collect();
            let mut upper = Vec::with_capacity(rows[r].len());
            for &j in &rows[r] {
                if j == c || col_done[j] {
                    continue;
                }
                if let Some(k) = active[j].iter().position(|&(i, _)| i == r) {
                    upper.push((j, active[j][k].1));
                    active[j].swap_remove(k);
                }
            }
            col_done[c] = true;
            row_done[r] = true;
            for &(i, _) in &lower {
                if let Some(k) = rows[i].iter().position(|&j| j == c) {
                    rows[i].swap_remove(k);
                }
            }
            active[c].clear();

            for &(i, l) in &lower {
                for &(j, u) in &upper {
                    let colj = &mut active[j];
                    match colj.iter().position(|&(ii, _)| ii == i) {
                        Some(k) => {
                            colj[k].1 -= l * u;
                            if colj[k].1.abs() < DROP {
                                colj.swap_remove(k);
                                if let Some(kk) = rows[i].iter().position(|&jj| jj == j) {
                                    rows[i].swap_remove(kk);
                                }
                            }
                        }
                        None => {
                            let v = -l * u;
                            if v.abs() >= DROP {
                                colj.push((i, v));
                                rows[i].push(j);
                            }
                        }
                    }
                }
            }
            for &(j, _) in &upper {
                let cnt = active[j].len().min(n);
                buckets[cnt].push(j);
                lowest = lowest.min(cnt);
            }
            rows[r].clear();
            steps.push(Step { row: r, col: c, pivot: piv, lower, upper });
        }
        debug_assert!(row_done.iter().all(|&d| d));
        Ok(Self { steps })
    }

    pub(super) fn nnz(&self) -> usize {
        self.steps.iter().map(|s| 1 + s.lower.len() + s.upper.len()).sum()
    }

    /// Solves `A x = b`; `b` is indexed by row and overwritten, `x` (indexed by
    /// column) is written in full.
    pub(super) fn solve(&self, b: &mut [f64], x: &mut [f64]) {
        for s in &self.steps {
            let v = b[s.row];
            if v != 0.0 {
                for &(i, l) in &s.lower {
                    b[i] -= l * v;
                }
            }
        }
        for s in self.steps.iter().rev() {
            let mut v = b[s.row];
            for &(j, u) in &s.upper {
                v -= u * x[j];
            }
            x[s.col] = v / s.pivot;
        }
    }

    /// Solves `A^T y = c`; `c` is indexed by column and overwritten, `y`
    /// (indexed by row) is written in full.
    pub(super) fn solve_transpose(&self, c: &mut [f64], y: &mut [f64]) {
        // U^T t = c, with t stored at the pivot row's slot of `y`.
        for s in &self.steps {
            let t = c[s.col] / s.pivot;
            y[s.row] = t;
            if t != 0.0 {
                for &(j, u) in &s.upper {
                    c[j] -= u * t;
                }
            }
        }
        // L^T y = t.
        for s in self.steps.iter().rev() {
            let mut v = y[s.row];
            for &(i, l) in &s.lower {
                v -= l * y[i];
            }
            y[s.row] = v;
        }
    }
}

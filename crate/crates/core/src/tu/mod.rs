//! Total unimodularity of {-1, 0, 1} matrices.
//!
//! Two independent deciders are provided: enumeration of every square
//! submatrix with exact determinants, and the Ghouila-Houri characterisation
//! (every column collection splits into two parts whose difference is a
//! {-1, 0, 1} vector).

mod ghouila_houri;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use ghouila_houri::{is_tu_ghouila_houri, is_tu_ghouila_houri_with_budget, GhMode};

/// Default cap on the number of determinants (or column subsets) examined.
pub const DEFAULT_WORK_BUDGET: u64 = 50_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TuError {
    #[error("entry ({row}, {col}) is {value}; only -1, 0 and 1 are allowed")]
    InvalidEntry { row: usize, col: usize, value: i64 },
    #[error("expected {expected} entries for the given shape, got {got}")]
    Shape { expected: usize, got: usize },
    #[error("ragged input: row {row} has {got} entries, expected {expected}")]
    Ragged { row: usize, expected: usize, got: usize },
    #[error("{required} units of work exceed the budget of {budget}; use sampled Ghouila-Houri instead")]
    WorkLimit { required: u128, budget: u64 },
    #[error("{axis} index {index} out of range (size {size})")]
    IndexOutOfRange { axis: Axis, index: usize, size: usize },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Axis {
    Row,
    Col,
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Row => "row",
            Axis::Col => "column",
        })
    }
}

/// Dense row-major matrix with entries in {-1, 0, 1}.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Vec<i64>>", into = "Vec<Vec<i64>>")]
pub struct SignMatrix {
    rows: usize,
    cols: usize,
    entries: Vec<i8>,
}

impl SignMatrix {
    pub fn new(rows: usize, cols: usize, entries: Vec<i64>) -> Result<Self, TuError> {
        if entries.len() != rows * cols {
            return Err(TuError::Shape { expected: rows * cols, got: entries.len() });
        }
        let mut out = Vec::with_capacity(entries.len());
        for (k, &v) in entries.iter().enumerate() {
            if !(-1..=1).contains(&v) {
                return Err(TuError::InvalidEntry { row: k / cols.max(1), col: k % cols.max(1), value: v });
            }
            out.push(v as i8);
        }
        Ok(Self { rows, cols, entries: out })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, entries: vec![0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m.entries[i * n + i] = 1;
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<i64>>) -> Result<Self, TuError> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut flat = Vec::with_capacity(rows.len() * cols);
        for (r, row) in rows.iter().enumerate() {
            if row.len() != cols {
                return Err(TuError::Ragged { row: r, expected: cols, got: row.len() });
            }
            flat.extend_from_slice(row);
        }
        Self::new(rows.len(), cols, flat)
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> i8 {
        self.entries[r * self.cols + c]
    }

    /// Panics unless `v` is -1, 0 or 1.
    pub fn set(&mut self, r: usize, c: usize, v: i8) {
        assert!((-1..=1).contains(&v), "sign matrices only hold -1, 0, 1");
        self.entries[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[i8] {
        &self.entries[r * self.cols..(r + 1) * self.cols]
    }

    pub fn to_rows(&self) -> Vec<Vec<i64>> {
        (0..self.rows).map(|r| self.row(r).iter().map(|&v| v as i64).collect()).collect()
    }

    /// Exact determinant of the submatrix picked by `rows` and `cols`.
    pub fn submatrix_determinant(&self, rows: &[usize], cols: &[usize]) -> i64 {
        assert_eq!(rows.len(), cols.len(), "submatrix must be square");
        let mut buf: Vec<i128> = Vec::with_capacity(rows.len() * rows.len());
        for &r in rows {
            for &c in cols {
                buf.push(self.get(r, c) as i128);
            }
        }
        bareiss(&mut buf, rows.len()) as i64
    }
}

impl TryFrom<Vec<Vec<i64>>> for SignMatrix {
    type Error = TuError;

    fn try_from(rows: Vec<Vec<i64>>) -> Result<Self, Self::Error> {
        Self::from_rows(rows)
    }
}

impl From<SignMatrix> for Vec<Vec<i64>> {
    fn from(m: SignMatrix) -> Self {
        m.to_rows()
    }
}

impl fmt::Display for SignMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.rows {
            let line: Vec<String> = self.row(r).iter().map(|v| format!("{v:>2}")).collect();
            writeln!(f, "{}", line.join(" "))?;
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TuMethod {
    Exhaustive,
    GhouilaHouri,
    /// Ghouila-Houri on randomly drawn column collections. A positive verdict
    /// only means no violation was found.
    Sampled,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Witness {
    Submatrix { rows: Vec<usize>, cols: Vec<usize>, determinant: i64 },
    /// Columns that admit no valid two-part split.
    ColumnSubset { cols: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TuReport {
    pub is_tu: bool,
    pub witness: Option<Witness>,
    pub method: TuMethod,
    /// Determinants evaluated or column collections examined.
    pub examined: u64,
}

/// Fraction-free Gaussian elimination on a row-major `k x k` buffer.
fn bareiss(a: &mut [i128], k: usize) -> i128 {
    if k == 0 {
        return 1;
    }
    let mut sign = 1i128;
    let mut prev = 1i128;
    for p in 0..k - 1 {
        if a[p * k + p] == 0 {
            let Some(swap) = (p + 1..k).find(|&r| a[r * k + p] != 0) else {
                return 0;
            };
            for c in 0..k {
                a.swap(p * k + c, swap * k + c);
            }
            sign = -sign;
        }
        let piv = a[p * k + p];
        for r in p + 1..k {
            for c in p + 1..k {
                a[r * k + c] = (a[r * k + c] * piv - a[r * k + p] * a[p * k + c]) / prev;
            }
        }
        prev = piv;
    }
    sign * a[(k - 1) * k + (k - 1)]
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1u128, |acc, i| acc.saturating_mul((n - i) as u128) / (i as u128 + 1))
}

/// Number of square submatrices: `sum_k C(rows, k) C(cols, k)`.
pub fn exhaustive_work(rows: usize, cols: usize) -> u128 {
    (1..=rows.min(cols)).fold(0u128, |acc, k| acc.saturating_add(binomial(rows, k).saturating_mul(binomial(cols, k))))
}

/// Advances `idx` to the next `k`-combination of `0..n` in lexicographic order.
pub(crate) fn next_combination(idx: &mut [usize], n: usize) -> bool {
    let k = idx.len();
    for i in (0..k).rev() {
        if idx[i] < n - k + i {
            idx[i] += 1;
            for j in i + 1..k {
                idx[j] = idx[j - 1] + 1;
            }
            return true;
        }
    }
    false
}

pub fn is_tu_exhaustive(m: &SignMatrix) -> Result<TuReport, TuError> {
    is_tu_exhaustive_with_budget(m, DEFAULT_WORK_BUDGET)
}

/// Checks every square submatrix, smallest first, and stops at the first
/// determinant outside {-1, 0, 1}.
pub fn is_tu_exhaustive_with_budget(m: &SignMatrix, budget: u64) -> Result<TuReport, TuError> {
    let required = exhaustive_work(m.rows, m.cols);
    if required > budget as u128 {
        return Err(TuError::WorkLimit { required, budget });
    }
    let mut examined = 0u64;
    let mut buf = Vec::new();
    for k in 1..=m.rows.min(m.cols) {
        let mut rows: Vec<usize> = (0..k).collect();
        loop {
            let mut cols: Vec<usize> = (0..k).collect();
            loop {
                examined += 1;
                buf.clear();
                for &r in &rows {
                    for &c in &cols {
                        buf.push(m.get(r, c) as i128);
                    }
                }
                let det = bareiss(&mut buf, k);
                if det.abs() > 1 {
                    return Ok(TuReport {
                        is_tu: false,
                        witness: Some(Witness::Submatrix { rows, cols, determinant: det as i64 }),
                        method: TuMethod::Exhaustive,
                        examined,
                    });
                }
                if !next_combination(&mut cols, m.cols) {
                    break;
                }
            }
            if !next_combination(&mut rows, m.rows) {
                break;
            }
        }
    }
    Ok(TuReport { is_tu: true, witness: None, method: TuMethod::Exhaustive, examined })
}

pub fn transpose(m: &SignMatrix) -> SignMatrix {
    let mut t = SignMatrix::zeros(m.cols, m.rows);
    for r in 0..m.rows {
        for c in 0..m.cols {
            t.entries[c * m.rows + r] = m.get(r, c);
        }
    }
    t
}

/// Multiplies one row or column by -1.
pub fn negate_line(m: &SignMatrix, axis: Axis, index: usize) -> Result<SignMatrix, TuError> {
    let size = match axis {
        Axis::Row => m.rows,
        Axis::Col => m.cols,
    };
    if index >= size {
        return Err(TuError::IndexOutOfRange { axis, index, size });
    }
    let mut out = m.clone();
    match axis {
        Axis::Row => out.entries[index * m.cols..(index + 1) * m.cols].iter_mut().for_each(|v| *v = -*v),
        Axis::Col => (0..m.rows).for_each(|r| out.entries[r * m.cols + index] *= -1),
    }
    Ok(out)
}

/// Returns `[I A]`.
pub fn prepend_identity(m: &SignMatrix) -> SignMatrix {
    let cols = m.rows + m.cols;
    let mut out = SignMatrix::zeros(m.rows, cols);
    for r in 0..m.rows {
        out.entries[r * cols + r] = 1;
        out.entries[r * cols + m.rows..(r + 1) * cols].copy_from_slice(m.row(r));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mat(rows: &[&[i64]]) -> SignMatrix {
        SignMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identity_is_tu() {
        let r = is_tu_exhaustive(&SignMatrix::identity(3)).unwrap();
        assert!(r.is_tu);
        assert!(r.witness.is_none());
        assert_eq!(r.examined, exhaustive_work(3, 3) as u64);
    }

    #[test]
    fn determinant_two_is_caught() {
        let m = mat(&[&[1, 1], &[-1, 1]]);
        let r = is_tu_exhaustive(&m).unwrap();
        assert!(!r.is_tu);
        assert_eq!(r.witness, Some(Witness::Submatrix { rows: vec![0, 1], cols: vec![0, 1], determinant: 2 }));
    }

    #[test]
    fn bareiss_handles_row_swaps() {
        let m = mat(&[&[0, 1, 1], &[1, 0, 1], &[1, 1, 0]]);
        assert_eq!(m.submatrix_determinant(&[0, 1, 2], &[0, 1, 2]), 2);
        let m = mat(&[&[0, 1], &[1, 0]]);
        assert_eq!(m.submatrix_determinant(&[0, 1], &[0, 1]), -1);
        let m = mat(&[&[1, 1], &[1, 1]]);
        assert_eq!(m.submatrix_determinant(&[0, 1], &[0, 1]), 0);
    }

    #[test]
    fn entries_outside_sign_set_are_rejected() {
        assert_eq!(
            SignMatrix::new(1, 2, vec![1, 2]),
            Err(TuError::InvalidEntry { row: 0, col: 1, value: 2 })
        );
        assert!(matches!(SignMatrix::from_rows(vec![vec![1], vec![1, 0]]), Err(TuError::Ragged { .. })));
    }

    #[test]
    fn budget_is_enforced() {
        let m = SignMatrix::identity(4);
        assert!(matches!(is_tu_exhaustive_with_budget(&m, 10), Err(TuError::WorkLimit { required: 69, .. })));
    }

    #[test]
    fn closure_operations() {
        assert_eq!(transpose(&SignMatrix::identity(3)), SignMatrix::identity(3));
        let neg = negate_line(&mat(&[&[1, 0]]), Axis::Row, 0).unwrap();
        assert_eq!(neg, mat(&[&[-1, 0]]));
        let neg = negate_line(&mat(&[&[1, 1], &[0, 1]]), Axis::Col, 1).unwrap();
        assert_eq!(neg, mat(&[&[1, -1], &[0, -1]]));
        assert!(negate_line(&mat(&[&[1, 0]]), Axis::Row, 1).is_err());
        assert_eq!(prepend_identity(&mat(&[&[-1], &[1]])), mat(&[&[1, 0, -1], &[0, 1, 1]]));
        assert_eq!(transpose(&mat(&[&[1, 0, -1]])), mat(&[&[1], &[0], &[-1]]));
    }

    #[test]
    fn combinations_in_order() {
        let mut idx = vec![0, 1];
        let mut seen = vec![idx.clone()];
        while next_combination(&mut idx, 4) {
            seen.push(idx.clone());
        }
        assert_eq!(seen, vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![1, 2], vec![1, 3], vec![2, 3]]);
    }

    #[test]
    fn serde_uses_nested_rows() {
        let m = mat(&[&[1, -1], &[0, 1]]);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "[[1,-1],[0,1]]");
        assert_eq!(serde_json::from_str::<SignMatrix>(&json).unwrap(), m);
        assert!(serde_json::from_str::<SignMatrix>("[[2]]").is_err());
    }
}

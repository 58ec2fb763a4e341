use super::{Allocation, KMedoidInstance, ModelError};
use crate::lp::{LpProblem, Sense};
use crate::tu::SignMatrix;

/// LP relaxation of k-medoid selection.
///
/// Variables: `x_ij` at `i * n + j` (point `j` is served by medoid `i`), then
/// `y_i` at `n * n + i`. Rows: `n` assignment equalities `sum_i x_ij = 1`,
/// `n * n` linking rows `x_ij - y_i <= 0`, and `sum_i y_i = k`. Every variable
/// is boxed in `[0, 1]`.
pub fn build_kmedoid(inst: &KMedoidInstance) -> Result<LpProblem, ModelError> {
    inst.validate()?;
    let n = inst.n();
    let mut c: Vec<f64> = inst.distances.iter().flatten().copied().collect();
    c.resize(n * n + n, 0.0);
    let mut lp = LpProblem::new(c);
    for j in 0..n {
        lp.add_constraint((0..n).map(|i| (i * n + j, 1.0)), Sense::Eq, 1.0)?;
    }
    for i in 0..n {
        for j in 0..n {
            lp.add_constraint([(i * n + j, 1.0), (n * n + i, -1.0)], Sense::Le, 0.0)?;
        }
    }
    lp.add_constraint((0..n).map(|i| (n * n + i, 1.0)), Sense::Eq, inst.k as f64)?;
    lp.set_all_bounds(0.0, 1.0);
    Ok(lp)
}

/// The `n^2 x (n^2 - 1)` system left after eliminating variables with the
/// equality rows.
///
/// The first `(n - 1) n` columns carry `I_{(n-1)n}` over the first `n - 1`
/// row blocks and `n - 1` copies of `-I_n` in the last block. Column
/// `(n - 1) n + t` holds `e_n` in block 0 and `-e_n` in block `t + 1`.
///
/// # Panics
/// If `n < 2`.
pub fn build_kmedoid_reduced_matrix(n: usize) -> SignMatrix {
    assert!(n >= 2, "the reduced k-medoid matrix needs n >= 2");
    let ident = (n - 1) * n;
    let mut a = SignMatrix::zeros(n * n, n * n - 1);
    for c in 0..ident {
        a.set(c, c, 1);
        a.set(ident + c % n, c, -1);
    }
    for t in 0..n - 1 {
        let col = ident + t;
        for r in 0..n {
            a.set(r, col, 1);
            a.set((t + 1) * n + r, col, -1);
        }
    }
    a
}

/// The `(n - 1) n x (n - 1)` block `C`: the last `n - 1` columns of the
/// reduced matrix restricted to its first `n - 1` row blocks.
pub fn build_kmedoid_block_c(n: usize) -> SignMatrix {
    assert!(n >= 2, "block C needs n >= 2");
    let full = build_kmedoid_reduced_matrix(n);
    let rows = (n - 1) * n;
    let mut c = SignMatrix::zeros(rows, n - 1);
    for r in 0..rows {
        for t in 0..n - 1 {
            c.set(r, t, full.get(r, rows + t));
        }
    }
    c
}

pub(super) fn decode(inst: &KMedoidInstance, values: &[i64]) -> Result<Allocation, ModelError> {
    let n = inst.n();
    let medoids: Vec<usize> = (0..n).filter(|&i| values[n * n + i] == 1).collect();
    let mut assignment = Vec::with_capacity(n);
    for j in 0..n {
        let served: Vec<usize> = (0..n).filter(|&i| values[i * n + j] == 1).collect();
        match served.as_slice() {
            [i] => assignment.push(*i),
            _ => {
                return Err(ModelError::InvalidAllocation(format!(
                    "point {j} is assigned to {} medoids",
                    served.len()
                )))
            }
        }
    }
    if let Some(v) = values.iter().position(|&v| v > 1) {
        return Err(ModelError::InvalidAllocation(format!("binary coordinate {v} exceeds 1")));
    }
    Ok(Allocation::KMedoid { medoids, assignment })
}

pub(super) fn check(inst: &KMedoidInstance, medoids: &[usize], assignment: &[usize]) -> Result<(), ModelError> {
    let bad = |msg: String| Err(ModelError::InvalidAllocation(msg));
    if medoids.len() != inst.k {
        return bad(format!("{} medoids selected, expected {}", medoids.len(), inst.k));
    }
    if medoids.windows(2).any(|w| w[0] >= w[1]) || medoids.iter().any(|&i| i >= inst.n()) {
        return bad("medoid list must be sorted, distinct and in range".into());
    }
    if assignment.len() != inst.n() {
        return bad(format!("{} assignments for {} points", assignment.len(), inst.n()));
    }
    if let Some(j) = assignment.iter().position(|i| medoids.binary_search(i).is_err()) {
        return bad(format!("point {j} is served by {}, which is not a medoid", assignment[j]));
    }
    Ok(())
}

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{binomial, next_combination, SignMatrix, TuError, TuMethod, TuReport, Witness, DEFAULT_WORK_BUDGET};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum GhMode {
    /// Every non-empty column collection, in order of increasing size.
    AllSubsets,
    /// `trials` collections drawn uniformly from the non-empty subsets.
    Sampled { seed: u64, trials: u64 },
}

pub fn is_tu_ghouila_houri(m: &SignMatrix, mode: GhMode) -> Result<TuReport, TuError> {
    is_tu_ghouila_houri_with_budget(m, mode, DEFAULT_WORK_BUDGET)
}

pub fn is_tu_ghouila_houri_with_budget(m: &SignMatrix, mode: GhMode, budget: u64) -> Result<TuReport, TuError> {
    let mut search = SplitSearch::new(m);
    match mode {
        GhMode::AllSubsets => {
            let required = (0..=m.cols()).skip(1).fold(0u128, |acc, k| acc.saturating_add(binomial(m.cols(), k)));
            if required > budget as u128 {
                return Err(TuError::WorkLimit { required, budget });
            }
            let mut examined = 0;
            for k in 1..=m.cols() {
                let mut cols: Vec<usize> = (0..k).collect();
                loop {
                    examined += 1;
                    if !search.has_split(&cols) {
                        return Ok(violation(cols, TuMethod::GhouilaHouri, examined));
                    }
                    if !next_combination(&mut cols, m.cols()) {
                        break;
                    }
                }
            }
            Ok(TuReport { is_tu: true, witness: None, method: TuMethod::GhouilaHouri, examined })
        }
        GhMode::Sampled { seed, trials } => {
            if trials > budget {
                return Err(TuError::WorkLimit { required: trials as u128, budget });
            }
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cols = Vec::with_capacity(m.cols());
            let mut examined = 0;
            if m.cols() > 0 {
                while examined < trials {
                    cols.clear();
                    cols.extend((0..m.cols()).filter(|_| rng.gen::<bool>()));
                    if cols.is_empty() {
                        continue;
                    }
                    examined += 1;
                    if !search.has_split(&cols) {
                        return Ok(violation(cols, TuMethod::Sampled, examined));
                    }
                }
            }
            Ok(TuReport { is_tu: true, witness: None, method: TuMethod::Sampled, examined })
        }
    }
}

fn violation(cols: Vec<usize>, method: TuMethod, examined: u64) -> TuReport {
    TuReport { is_tu: false, witness: Some(Witness::ColumnSubset { cols }), method, examined }
}

/// Depth-first search over signings of a column collection. A branch is cut
/// as soon as some row's partial sum can no longer be brought back into
/// [-1, 1] by the columns still unassigned.
struct SplitSearch<'a> {
    m: &'a SignMatrix,
    sums: Vec<i32>,
    /// `remaining[d][r]`: nonzeros of row `r` among columns `d..` of the collection.
    remaining: Vec<Vec<i32>>,
}

impl<'a> SplitSearch<'a> {
    fn new(m: &'a SignMatrix) -> Self {
        Self { m, sums: vec![0; m.rows()], remaining: Vec::new() }
    }

    fn has_split(&mut self, cols: &[usize]) -> bool {
        let rows = self.m.rows();
        self.remaining.resize(cols.len() + 1, Vec::new());
        self.remaining[cols.len()].clear();
        self.remaining[cols.len()].resize(rows, 0);
        for d in (0..cols.len()).rev() {
            let (head, tail) = self.remaining.split_at_mut(d + 1);
            let next = &tail[0];
            let cur = &mut head[d];
            cur.clear();
            cur.extend((0..rows).map(|r| next[r] + (self.m.get(r, cols[d]) != 0) as i32));
        }
        self.sums.iter_mut().for_each(|s| *s = 0);
        // Negating a split swaps its parts, so the first column's side is fixed.
        self.apply(cols[0], 1);
        let ok = self.feasible(1) && self.dfs(cols, 1);
        self.sums.iter_mut().for_each(|s| *s = 0);
        ok
    }

    fn apply(&mut self, col: usize, sign: i32) {
        for r in 0..self.m.rows() {
            self.sums[r] += sign * self.m.get(r, col) as i32;
        }
    }

    fn feasible(&self, depth: usize) -> bool {
        let rem = &self.remaining[depth];
        self.sums.iter().zip(rem).all(|(&s, &left)| s.abs() - left <= 1)
    }

    fn dfs(&mut self, cols: &[usize], depth: usize) -> bool {
        if depth == cols.len() {
            return true;
        }
        for sign in [1, -1] {
            self.apply(cols[depth], sign);
            let found = self.feasible(depth + 1) && self.dfs(cols, depth + 1);
            self.apply(cols[depth], -sign);
            if found {
                return true;
            }
        }
        false
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tu::is_tu_exhaustive;

    fn mat(rows: &[&[i64]]) -> SignMatrix {
        SignMatrix::from_rows(rows.iter().map(|r| r.to_vec()).collect()).unwrap()
    }

    #[test]
    fn identity_splits_trivially() {
        let r = is_tu_ghouila_houri(&SignMatrix::identity(3), GhMode::AllSubsets).unwrap();
        assert!(r.is_tu);
        assert_eq!(r.examined, 7);
    }

    #[test]
    fn both_columns_of_the_determinant_two_matrix_fail() {
        let r = is_tu_ghouila_houri(&mat(&[&[1, 1], &[-1, 1]]), GhMode::AllSubsets).unwrap();
        assert!(!r.is_tu);
        assert_eq!(r.witness, Some(Witness::ColumnSubset { cols: vec![0, 1] }));
    }

    #[test]
    fn odd_cycle_incidence_is_not_tu() {
        let m = mat(&[&[1, 1, 0], &[0, 1, 1], &[1, 0, 1]]);
        assert!(!is_tu_ghouila_houri(&m, GhMode::AllSubsets).unwrap().is_tu);
        let sampled = is_tu_ghouila_houri(&m, GhMode::Sampled { seed: 3, trials: 200 }).unwrap();
        assert!(!sampled.is_tu);
        assert_eq!(sampled.method, TuMethod::Sampled);
    }

    #[test]
    fn sampled_mode_is_deterministic() {
        let m = mat(&[&[1, 0, 1, 0], &[0, 1, 0, 1], &[1, 1, 0, 0]]);
        let a = is_tu_ghouila_houri(&m, GhMode::Sampled { seed: 9, trials: 50 }).unwrap();
        let b = is_tu_ghouila_houri(&m, GhMode::Sampled { seed: 9, trials: 50 }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.examined, 50);
    }

    #[test]
    fn agrees_with_exhaustive_on_random_four_by_five() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let entries: Vec<i64> = (0..20).map(|_| rng.gen_range(-1..=1)).collect();
            let m = SignMatrix::new(4, 5, entries).unwrap();
            let ex = is_tu_exhaustive(&m).unwrap().is_tu;
            let gh = is_tu_ghouila_houri(&m, GhMode::AllSubsets).unwrap().is_tu;
            assert_eq!(ex, gh, "{m}");
        }
    }
}

use std::fmt::Write as _;
use std::time::Instant;

use log::info;
use serde::{Deserialize, Serialize};

use super::generate::{gen_kmedoid_instance, gen_transport_instance};
use crate::bnb::{solve_bnb, BnbOptions, MilpStatus};
use crate::lp::{check_integrality, solve_simplex, SolverOptions, Status, DEFAULT_INTEGRALITY_TOLERANCE};
use crate::models::{Model, ModelKind};

/// Objectives from the two solvers count as equal within this margin.
pub const OBJECTIVE_TOLERANCE: f64 = 1e-6;

/// Point counts of the reference experiment; each runs with k = 10 then k = 5.
pub const TABLE1_SIZES: [usize; 13] = [20, 40, 60, 80, 100, 120, 140, 160, 180, 200, 400, 600, 800];
pub const TABLE1_KS: [usize; 2] = [10, 5];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchCell {
    pub model: ModelKind,
    /// Points for k-medoid, destinations for the transport models.
    pub n: usize,
    /// Sources; transport models only.
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub seed: u64,
}

impl BenchCell {
    pub fn kmedoid(n: usize, k: usize, seed: u64) -> Self {
        Self { model: ModelKind::KMedoid, n, m: None, k: Some(k), seed }
    }

    pub fn transport(model: ModelKind, m: usize, n: usize, seed: u64) -> Self {
        Self { model, n, m: Some(m), k: None, seed }
    }

    pub fn instance(&self, max_units: u64) -> Result<Model, String> {
        match self.model {
            ModelKind::KMedoid => {
                let k = self.k.ok_or("k-medoid cell without k")?;
                if self.n < 2 || k == 0 || k > self.n {
                    return Err(format!("invalid k-medoid size n = {}, k = {k}", self.n));
                }
                Ok(Model::KMedoid(gen_kmedoid_instance(self.n, k, self.seed)))
            }
            kind => {
                let m = self.m.ok_or("transport cell without m")?;
                if m == 0 || self.n == 0 {
                    return Err("transport cells need m, n >= 1".into());
                }
                let inst = gen_transport_instance(m, self.n, self.seed, max_units);
                Ok(if kind == ModelKind::Expendable { Model::Expendable(inst) } else { Model::NonExpendable(inst.into()) })
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchConfig {
    pub cells: Vec<BenchCell>,
    /// Each solve is repeated this many times and the median time kept.
    pub repetitions: usize,
    /// Unit cap for generated supplies and demands.
    pub max_units: u64,
    pub lp: SolverOptions,
    pub bnb: BnbOptions,
}

impl BenchConfig {
    pub fn new(cells: Vec<BenchCell>) -> Self {
        let lp = SolverOptions::default().with_pivot_rule(crate::lp::PivotRule::Dantzig);
        Self { cells, repetitions: 3, max_units: 20, bnb: BnbOptions { lp: lp.clone(), ..BnbOptions::default() }, lp }
    }

    /// The 26 k-medoid rows of the reference timing table, all with one seed.
    pub fn table1(seed: u64) -> Self {
        let cells = TABLE1_SIZES
            .iter()
            .flat_map(|&n| TABLE1_KS.iter().map(move |&k| BenchCell::kmedoid(n, k, seed)))
            .collect();
        Self::new(cells)
    }

    /// Every combination of sizes, k values and seeds for k-medoid.
    pub fn kmedoid_grid(sizes: &[usize], ks: &[usize], seeds: &[u64]) -> Self {
        let mut cells = Vec::new();
        for &n in sizes {
            for &k in ks {
                for &seed in seeds {
                    cells.push(BenchCell::kmedoid(n, k, seed));
                }
            }
        }
        Self::new(cells)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRecord {
    pub model: ModelKind,
    pub n: usize,
    pub m: Option<usize>,
    pub k: Option<usize>,
    pub seed: u64,
    /// The integer optimum, reported once for both solvers.
    pub objective: Option<f64>,
    pub lp_objective: Option<f64>,
    pub objectives_agree: bool,
    /// Median wall-clock seconds of the solve call alone.
    pub lp_time: Option<f64>,
    pub bnb_time: Option<f64>,
    pub lp_integral: bool,
    pub lp_iterations: usize,
    pub bnb_nodes: usize,
    pub error: Option<String>,
}

fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn timed<T, E>(reps: usize, mut f: impl FnMut() -> Result<T, E>) -> Result<(T, f64), E> {
    let mut times = Vec::with_capacity(reps);
    let mut last = None;
    for _ in 0..reps.max(1) {
        let start = Instant::now();
        let out = f()?;
        times.push(start.elapsed().as_secs_f64());
        last = Some(out);
    }
    Ok((last.expect("at least one repetition"), median(times)))
}

pub fn run_cell(cell: &BenchCell, config: &BenchConfig) -> BenchRecord {
    let mut rec = BenchRecord {
        model: cell.model,
        n: cell.n,
        m: cell.m,
        k: cell.k,
        seed: cell.seed,
        objective: None,
        lp_objective: None,
        objectives_agree: false,
        lp_time: None,
        bnb_time: None,
        lp_integral: false,
        lp_iterations: 0,
        bnb_nodes: 0,
        error: None,
    };
    let problem = match cell.instance(config.max_units).and_then(|model| model.build().map_err(|e| e.to_string())) {
        Ok(p) => p,
        Err(e) => {
            rec.error = Some(e);
            return rec;
        }
    };
    let mut errors = Vec::new();

    match timed(config.repetitions, || solve_simplex(&problem, &config.lp)) {
        Ok((sol, secs)) => {
            rec.lp_time = Some(secs);
            rec.lp_iterations = sol.iterations;
            if sol.status == Status::Optimal {
                rec.lp_objective = Some(sol.objective);
                rec.lp_integral = sol
                    .point
                    .as_deref()
                    .is_some_and(|x| check_integrality(x, DEFAULT_INTEGRALITY_TOLERANCE).is_integral);
            } else {
                errors.push(format!("relaxation is {:?}", sol.status));
            }
        }
        Err(e) => errors.push(format!("lp: {e}")),
    }

    let integer_vars: Vec<usize> = (0..problem.num_vars()).collect();
    match timed(config.repetitions, || solve_bnb(&problem, &integer_vars, &config.bnb)) {
        Ok((sol, secs)) => {
            rec.bnb_time = Some(secs);
            rec.bnb_nodes = sol.nodes_explored;
            if sol.status == MilpStatus::Optimal {
                rec.objective = Some(sol.objective);
            } else {
                errors.push("no integer solution".into());
            }
        }
        Err(e) => errors.push(format!("bnb: {e}")),
    }

    if let (Some(a), Some(b)) = (rec.lp_objective, rec.objective) {
        rec.objectives_agree = (a - b).abs() <= OBJECTIVE_TOLERANCE;
    }
    if !errors.is_empty() {
        rec.error = Some(errors.join("; "));
    }
    rec
}

/// Runs every cell in order. Failures are recorded on the cell's record and
/// the run continues; `on_record` sees each record as it completes.
pub fn run_benchmark(config: &BenchConfig, mut on_record: impl FnMut(&BenchRecord)) -> Vec<BenchRecord> {
    let mut records = Vec::with_capacity(config.cells.len());
    for cell in &config.cells {
        info!("benchmark cell {cell:?}");
        let rec = run_cell(cell, config);
        on_record(&rec);
        records.push(rec);
    }
    records
}

fn fmt_opt(v: Option<f64>, digits: usize) -> String {
    v.map_or_else(|| "-".into(), |v| format!("{v:.digits$}"))
}

/// Plain-text table with one row per record.
pub fn render_table(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<15} {:>5} {:>4} {:>4} {:>14} {:>11} {:>11} {:>9} {:>6}  note",
        "model", "n", "m", "k", "cost", "time LP", "time BnB", "integral", "nodes"
    );
    for r in records {
        let model = match r.model {
            ModelKind::Expendable => "expendable",
            ModelKind::NonExpendable => "non_expendable",
            ModelKind::KMedoid => "k_medoid",
        };
        let mut note = String::new();
        if r.lp_objective.is_some() && r.objective.is_some() && !r.objectives_agree {
            note.push_str("objectives differ");
        }
        if let Some(e) = &r.error {
            note.push_str(e);
        }
        let _ = writeln!(
            out,
            "{:<15} {:>5} {:>4} {:>4} {:>14} {:>11} {:>11} {:>9} {:>6}  {}",
            model,
            r.n,
            r.m.map_or("-".into(), |v| v.to_string()),
            r.k.map_or("-".into(), |v| v.to_string()),
            fmt_opt(r.objective, 6),
            fmt_opt(r.lp_time, 3),
            fmt_opt(r.bnb_time, 3),
            if r.lp_integral { "yes" } else { "no" },
            r.bnb_nodes,
            note
        );
    }
    out
}

/// Median LP and branch-and-bound times over the k-medoid records with at
/// least `min_n` points, when both exist.
pub fn median_times(records: &[BenchRecord], min_n: usize) -> Option<(f64, f64)> {
    let rows: Vec<&BenchRecord> =
        records.iter().filter(|r| r.model == ModelKind::KMedoid && r.n >= min_n).collect();
    let lp: Vec<f64> = rows.iter().filter_map(|r| r.lp_time).collect();
    let bnb: Vec<f64> = rows.iter().filter_map(|r| r.bnb_time).collect();
    if lp.is_empty() || bnb.is_empty() {
        return None;
    }
    Some((median(lp), median(bnb)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table1_has_26_rows_in_order() {
        let cfg = BenchConfig::table1(42);
        assert_eq!(cfg.cells.len(), 26);
        assert_eq!(cfg.cells[0], BenchCell::kmedoid(20, 10, 42));
        assert_eq!(cfg.cells[1], BenchCell::kmedoid(20, 5, 42));
        assert_eq!(cfg.cells[25], BenchCell::kmedoid(800, 5, 42));
    }

    #[test]
    fn single_cell_gives_single_record() {
        let mut cfg = BenchConfig::new(vec![BenchCell::kmedoid(12, 3, 1)]);
        cfg.repetitions = 1;
        let mut seen = 0;
        let recs = run_benchmark(&cfg, |_| seen += 1);
        assert_eq!((recs.len(), seen), (1, 1));
        let r = &recs[0];
        assert!(r.error.is_none(), "{:?}", r.error);
        assert!(r.objectives_agree);
        assert!(r.lp_time.is_some() && r.bnb_time.is_some());
    }

    #[test]
    fn transport_cells() {
        let mut cfg = BenchConfig::new(vec![
            BenchCell::transport(ModelKind::Expendable, 3, 4, 9),
            BenchCell::transport(ModelKind::NonExpendable, 3, 4, 9),
        ]);
        cfg.repetitions = 1;
        for r in run_benchmark(&cfg, |_| {}) {
            assert!(r.lp_integral && r.objectives_agree, "{r:?}");
            assert_eq!(r.bnb_nodes, 1);
        }
    }

    #[test]
    fn bad_cells_are_recorded_not_fatal() {
        let mut cfg = BenchConfig::new(vec![BenchCell::kmedoid(3, 5, 0), BenchCell::kmedoid(4, 2, 0)]);
        cfg.repetitions = 1;
        let recs = run_benchmark(&cfg, |_| {});
        assert!(recs[0].error.is_some());
        assert!(recs[1].error.is_none());
        let table = render_table(&recs);
        assert_eq!(table.lines().count(), 3);
        assert!(table.contains("invalid k-medoid size"));
    }

    #[test]
    fn median_of_three() {
        assert_eq!(median(vec![3.0, 1.0, 2.0]), 2.0);
        let rec = |n, lp, bnb| BenchRecord {
            model: ModelKind::KMedoid,
            n,
            m: None,
            k: Some(2),
            seed: 0,
            objective: None,
            lp_objective: None,
            objectives_agree: true,
            lp_time: Some(lp),
            bnb_time: Some(bnb),
            lp_integral: true,
            lp_iterations: 0,
            bnb_nodes: 1,
            error: None,
        };
        let recs = [rec(100, 9.0, 1.0), rec(200, 1.0, 2.0), rec(400, 2.0, 3.0)];
        assert_eq!(median_times(&recs, 200), Some((2.0, 3.0)));
        assert_eq!(median_times(&recs, 1000), None);
    }
}

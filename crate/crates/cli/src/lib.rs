//! The `tulp` command-line tool.
//!
//! Exit status is 0 on success, 1 when the outcome is infeasible, fractional
//! or not totally unimodular, and 2 for malformed input or usage errors.
//! Every index read or written is 0-based.

pub mod io;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use thiserror::Error;
use tulp::bnb::{solve_bnb, BnbError, BnbOptions, MilpStatus};
use tulp::harness::{self, BenchCell, BenchConfig, BenchRecord};
use tulp::lp::{check_integrality, solve_simplex, LpError, PivotRule, SolverOptions, Status};
use tulp::models::{Model, ModelError, ModelKind};
use tulp::oracle::{self, OracleError};
use tulp::tu::{self, GhMode, TuError, TuReport, Witness};

use crate::io::{AllocationJson, IntegralityJson, SolveReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_OUTCOME: i32 = 1;
pub const EXIT_INPUT: i32 = 2;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CSV: {0}")]
    Csv(#[from] csv::Error),
    #[error("{0}")]
    Input(String),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Tu(#[from] TuError),
    #[error(transparent)]
    Lp(#[from] LpError),
    #[error(transparent)]
    Bnb(#[from] BnbError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Io { .. } | CliError::Json(_) | CliError::Csv(_) | CliError::Input(_) | CliError::Tu(TuError::InvalidEntry { .. })
            | CliError::Tu(TuError::Ragged { .. }) | CliError::Tu(TuError::Shape { .. }) => EXIT_INPUT,
            CliError::Model(ModelError::InsufficientSupply { .. } | ModelError::DemandExceedsCapacity { .. }) => EXIT_OUTCOME,
            CliError::Model(_) => EXIT_INPUT,
            CliError::Oracle(OracleError::Shape(_) | OracleError::InvalidK { .. }) => EXIT_INPUT,
            _ => EXIT_OUTCOME,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "tulp", version, about = "Integral LP solving for relief allocation and k-medoid location")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an expendable or non-expendable allocation instance.
    SolveTransport {
        #[command(flatten)]
        solve: SolveArgs,
    },
    /// Solve a k-medoid relief-centre location instance.
    SolveKmedoid {
        #[command(flatten)]
        solve: SolveArgs,
        /// Number of medoids; overrides "k" in the file.
        #[arg(long)]
        k: Option<usize>,
    },
    /// Decide whether a {-1,0,1} matrix is totally unimodular.
    CheckTu(CheckTuArgs),
    /// Time the simplex method against branch-and-bound.
    Bench(BenchArgs),
    /// Write a seeded random instance as JSON.
    Generate(GenerateArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum SolverChoice {
    Lp,
    Bnb,
    Oracle,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Table,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum RuleChoice {
    Bland,
    Dantzig,
}

impl From<RuleChoice> for PivotRule {
    fn from(r: RuleChoice) -> Self {
        match r {
            RuleChoice::Bland => PivotRule::Bland,
            RuleChoice::Dantzig => PivotRule::Dantzig,
        }
    }
}

#[derive(Args, Debug)]
struct SolveArgs {
    /// Instance JSON file, or - for standard input.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "lp")]
    solver: SolverChoice,
    /// Integrality tolerance.
    #[arg(long, default_value_t = tulp::lp::DEFAULT_INTEGRALITY_TOLERANCE)]
    tolerance: f64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    max_iterations: Option<usize>,
    #[arg(long, value_enum, default_value = "bland")]
    pivot_rule: RuleChoice,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum TuMethodChoice {
    Exhaustive,
    GhouilaHouri,
    Sampled,
}

#[derive(Args, Debug)]
struct CheckTuArgs {
    /// Matrix CSV: integer rows, no header.
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "exhaustive")]
    method: TuMethodChoice,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Column collections drawn by the sampled method.
    #[arg(long, default_value_t = 100_000)]
    trials: u64,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Preset {
    Table1,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long, value_enum, conflicts_with = "sizes")]
    preset: Option<Preset>,
    /// Point counts for a custom k-medoid run.
    #[arg(long, value_delimiter = ',')]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "10,5")]
    ks: Vec<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 3)]
    repetitions: usize,
    /// Write the records as a JSON array here.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "table")]
    format: Format,
    #[arg(long)]
    max_iterations: Option<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum GenerateKind {
    Kmedoid,
    Expendable,
    NonExpendable,
}

#[derive(Args, Debug)]
struct GenerateArgs {
    #[arg(value_enum)]
    kind: GenerateKind,
    /// Points (k-medoid) or destinations.
    #[arg(long)]
    n: usize,
    /// Sources for the allocation kinds.
    #[arg(long, default_value_t = 3)]
    m: usize,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 10)]
    max_units: u64,
}

/// Parses `argv` (program name first) and runs the command.
pub fn dispatch<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() { err.write_all(text.as_bytes()) } else { out.write_all(text.as_bytes()) };
            return code;
        }
    };
    match run(cli.command, out, err) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

fn run(command: Command, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match command {
        Command::SolveTransport { solve } => {
            let file = io::parse_transport(&io::read_to_string(&solve.input)?)?;
            let model = file.to_model();
            model.validate()?;
            let report = solve_model(&model, &solve)?;
            emit_report(&report, solve.format, out, err)
        }
        Command::SolveKmedoid { solve, k } => {
            let file = io::parse_kmedoid(&io::read_to_string(&solve.input)?)?;
            let model = Model::KMedoid(file.to_instance(k)?);
            let report = solve_model(&model, &solve)?;
            emit_report(&report, solve.format, out, err)
        }
        Command::CheckTu(args) => check_tu(&args, out),
        Command::Bench(args) => bench(&args, out, err),
        Command::Generate(args) => generate(&args, out),
    }
}

fn write_out(out: &mut dyn Write, text: &str) -> Result<(), CliError> {
    out.write_all(text.as_bytes()).map_err(|source| CliError::Io { path: "<stdout>".into(), source })
}

fn solve_model(model: &Model, args: &SolveArgs) -> Result<SolveReport, CliError> {
    let mut lp_opts = SolverOptions::default().with_pivot_rule(args.pivot_rule.into());
    lp_opts.max_iterations = args.max_iterations;
    let bnb_opts = BnbOptions { lp: lp_opts.clone(), integrality_tolerance: args.tolerance, ..BnbOptions::default() };
    let problem = model.build()?;
    let all_vars: Vec<usize> = (0..problem.num_vars()).collect();

    let run_bnb = |note: Option<String>| -> Result<SolveReport, CliError> {
        let sol = solve_bnb(&problem, &all_vars, &bnb_opts)?;
        let Some(point) = sol.point.filter(|_| sol.status == MilpStatus::Optimal) else {
            return Ok(failed("infeasible", "bnb", note));
        };
        let integrality = check_integrality(&point, args.tolerance);
        let allocation = model.decode(&snap(&point))?;
        Ok(SolveReport {
            objective: Some(sol.objective),
            status: "optimal".into(),
            solver: "bnb".into(),
            allocation: Some(allocation.into()),
            integrality: (&integrality).into(),
            note,
        })
    };

    match args.solver {
        SolverChoice::Lp => {
            let sol = solve_simplex(&problem, &lp_opts)?;
            match sol.status {
                Status::Infeasible => return Ok(failed("infeasible", "lp", None)),
                Status::Unbounded => return Ok(failed("unbounded", "lp", None)),
                Status::Optimal => {}
            }
            let point = sol.point.expect("optimal point");
            let integrality = check_integrality(&point, args.tolerance);
            if integrality.is_integral {
                let allocation = model.decode(&snap(&point))?;
                return Ok(SolveReport {
                    objective: Some(sol.objective),
                    status: "optimal".into(),
                    solver: "lp".into(),
                    allocation: Some(allocation.into()),
                    integrality: (&integrality).into(),
                    note: None,
                });
            }
            if model.kind() == ModelKind::KMedoid {
                let note = format!(
                    "simplex vertex was fractional (LP objective {}, max deviation {:.3e}); answer from branch-and-bound",
                    sol.objective, integrality.max_fractional_deviation
                );
                let mut report = run_bnb(Some(note))?;
                report.integrality = (&integrality).into();
                return Ok(report);
            }
            Ok(SolveReport {
                objective: Some(sol.objective),
                status: "fractional".into(),
                solver: "lp".into(),
                allocation: None,
                integrality: (&integrality).into(),
                note: None,
            })
        }
        SolverChoice::Bnb => run_bnb(None),
        SolverChoice::Oracle => {
            let result = match model {
                Model::Expendable(inst) => oracle::oracle_transport(inst, oracle::DEFAULT_TRANSPORT_BUDGET),
                Model::NonExpendable(inst) => oracle::oracle_nonexpendable(inst),
                Model::KMedoid(inst) => oracle::oracle_kmedoid(inst, oracle::DEFAULT_KMEDOID_BUDGET),
            };
            match result {
                Ok(sol) => {
                    model.check_allocation(&sol.allocation)?;
                    Ok(SolveReport {
                        objective: Some(sol.objective),
                        status: "optimal".into(),
                        solver: "oracle".into(),
                        allocation: Some(sol.allocation.into()),
                        integrality: IntegralityJson { is_integral: true, max_deviation: 0.0 },
                        note: None,
                    })
                }
                Err(OracleError::Infeasible | OracleError::UnreachableDemand { .. }) => {
                    Ok(failed("infeasible", "oracle", None))
                }
                Err(e) => Err(e.into()),
            }
        }
    }
}

fn failed(status: &str, solver: &str, note: Option<String>) -> SolveReport {
    SolveReport {
        objective: None,
        status: status.into(),
        solver: solver.into(),
        allocation: None,
        integrality: IntegralityJson { is_integral: false, max_deviation: 0.0 },
        note,
    }
}

fn snap(point: &[f64]) -> Vec<f64> {
    point.iter().map(|v| v.round()).collect()
}

fn emit_report(report: &SolveReport, format: Format, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    match format {
        Format::Json => write_out(out, &format!("{}\n", serde_json::to_string_pretty(report)?))?,
        Format::Table => {
            let mut text = format!("status     {}\nsolver     {}\n", report.status, report.solver);
            if let Some(obj) = report.objective {
                text += &format!("objective  {obj}\n");
            }
            text += &format!(
                "integral   {} (max deviation {:.3e})\n",
                report.integrality.is_integral, report.integrality.max_deviation
            );
            match &report.allocation {
                Some(AllocationJson::Grid(grid)) => {
                    text += "allocation (rows: sources, columns: destinations)\n";
                    for row in grid {
                        let cells: Vec<String> = row.iter().map(|v| format!("{v:>5}")).collect();
                        text += &format!("  {}\n", cells.join(" "));
                    }
                }
                Some(AllocationJson::Medoids { medoids, assignment }) => {
                    text += &format!("medoids    {medoids:?}\nassignment {assignment:?}\n");
                }
                None => {}
            }
            write_out(out, &text)?;
        }
    }
    if let Some(note) = &report.note {
        let _ = writeln!(err, "note: {note}");
    }
    if report.status == "optimal" {
        Ok(EXIT_OK)
    } else {
        let _ = writeln!(err, "no integral optimum: status {}", report.status);
        Ok(EXIT_OUTCOME)
    }
}

fn describe_tu(report: &TuReport) -> String {
    let method = match report.method {
        tu::TuMethod::Exhaustive => "exhaustive",
        tu::TuMethod::GhouilaHouri => "ghouila-houri",
        tu::TuMethod::Sampled => "sampled",
    };
    let verdict = match (report.is_tu, report.method) {
        (false, _) => "NOT TU",
        (true, tu::TuMethod::Sampled) => "PROBABLY TU",
        (true, _) => "TU",
    };
    let mut text = format!("{verdict} ({method}, {} examined)\n", report.examined);
    match &report.witness {
        Some(Witness::Submatrix { rows, cols, determinant }) => {
            text += &format!("witness: rows {rows:?}, cols {cols:?}, determinant {determinant}\n");
        }
        Some(Witness::ColumnSubset { cols }) => {
            text += &format!("witness: columns {cols:?} admit no valid split\n");
        }
        None => {}
    }
    text
}

fn check_tu(args: &CheckTuArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let matrix = io::parse_matrix_csv(&io::read_to_string(&args.input)?)?;
    let report = match args.method {
        TuMethodChoice::Exhaustive => tu::is_tu_exhaustive(&matrix)?,
        TuMethodChoice::GhouilaHouri => tu::is_tu_ghouila_houri(&matrix, GhMode::AllSubsets)?,
        TuMethodChoice::Sampled => {
            tu::is_tu_ghouila_houri(&matrix, GhMode::Sampled { seed: args.seed, trials: args.trials })?
        }
    };
    match args.format {
        Format::Json => write_out(out, &format!("{}\n", serde_json::to_string_pretty(&report)?))?,
        Format::Table => write_out(out, &describe_tu(&report))?,
    }
    Ok(if report.is_tu { EXIT_OK } else { EXIT_OUTCOME })
}

fn bench(args: &BenchArgs, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, CliError> {
    let mut config = match (args.preset, args.sizes.is_empty()) {
        (Some(Preset::Table1), _) => BenchConfig::table1(args.seed),
        (None, false) => BenchConfig::kmedoid_grid(&args.sizes, &args.ks, &[args.seed]),
        (None, true) => return Err(CliError::Input("give --preset or --sizes".into())),
    };
    if args.repetitions == 0 {
        return Err(CliError::Input("--repetitions must be at least 1".into()));
    }
    config.repetitions = args.repetitions;
    config.lp.max_iterations = args.max_iterations;
    config.bnb.lp.max_iterations = args.max_iterations;
    let records = harness::run_benchmark(&config, |r| {
        let _ = writeln!(
            err,
            "n={} k={} lp={:?} bnb={:?}{}",
            r.n,
            r.k.unwrap_or(0),
            r.lp_time,
            r.bnb_time,
            r.error.as_deref().map(|e| format!(" error: {e}")).unwrap_or_default()
        );
    });
    if let Some(path) = &args.out {
        write_records(path, &records)?;
    }
    match args.format {
        Format::Json => write_out(out, &format!("{}\n", serde_json::to_string_pretty(&records)?))?,
        Format::Table => {
            let mut text = harness::render_table(&records);
            if let Some((lp, bnb)) = harness::median_times(&records, 200) {
                text += &format!("median time over k-medoid rows with n >= 200: LP {lp:.3}s, BnB {bnb:.3}s\n");
            }
            text += "instances: uniform random points in the unit square; costs are not comparable to other data sets\n";
            write_out(out, &text)?;
        }
    }
    Ok(EXIT_OK)
}

pub fn write_records(path: &Path, records: &[BenchRecord]) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(records)?;
    std::fs::write(path, text).map_err(|source| CliError::Io { path: path.into(), source })
}

fn generate(args: &GenerateArgs, out: &mut dyn Write) -> Result<i32, CliError> {
    let text = match args.kind {
        GenerateKind::Kmedoid => {
            if args.n < 2 {
                return Err(CliError::Input("k-medoid instances need --n >= 2".into()));
            }
            let points = harness::gen_points(args.n, args.seed).into_iter().map(|(x, y)| [x, y]).collect();
            serde_json::to_string_pretty(&io::KMedoidFile { points: Some(points), distances: None, k: args.k })?
        }
        kind => {
            let model_kind = if kind == GenerateKind::Expendable { ModelKind::Expendable } else { ModelKind::NonExpendable };
            if args.m == 0 || args.n == 0 {
                return Err(CliError::Input("--m and --n must be positive".into()));
            }
            let model = BenchCell::transport(model_kind, args.m, args.n, args.seed)
                .instance(args.max_units)
                .map_err(CliError::Input)?;
            serde_json::to_string_pretty(&io::TransportFile::from_model(&model).expect("transport model"))?
        }
    };
    write_out(out, &format!("{text}\n"))?;
    Ok(EXIT_OK)
}

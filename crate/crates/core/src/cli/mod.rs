//! Command-line surface: generate, solve, validate and bench.
//!
//! Instances, solutions and reports are TOML. Exit status is 0 on success,
//! 1 when a solution fails validation (or a solver breaks an internal
//! check), and 2 for usage and parse errors.

pub mod format;
pub mod generate;
pub mod report;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use crate::baseline::{solve_baseline, SolverConfig};
use crate::discretize::{fleet_diagnostic, run_mprp_mvs};
use crate::error::SolveError;
use crate::model::{Instance, Mode, Solution};
use crate::oracle::{brute_force_optimum, measure_ratio, OracleLimits, RatioSummary};
use crate::reassign::{ordering_diagnostic, run_mprp_m};
use crate::validate::validate;

pub use generate::{cmd_generate, generate_instance, GeneratorParams};
pub use report::{BenchReport, BenchRow, BenchSummary, RunReport, ValidateReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

/// Random orderings drawn for the ordering diagnostic.
pub const DIAGNOSTIC_ORDERINGS: usize = 20;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{origin}: {message}")]
    Parse { origin: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Solve(#[from] SolveError),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Solve(SolveError::Internal(_) | SolveError::Precondition { .. }) => EXIT_INVALID,
            _ => EXIT_USAGE,
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "mprp", version, about = "Maximum-profit pickup routing solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a seeded random instance.
    Generate(GenerateArgs),
    /// Solve an instance file and print a report.
    Solve(SolveArgs),
    /// Check a solution file against an instance file.
    Validate(ValidateArgs),
    /// Solve a batch of generated instances, optionally against the oracle.
    Bench(BenchArgs),
}

#[derive(Debug, Clone, Args)]
pub struct Geometry {
    /// Number of sites.
    #[arg(long = "n", default_value_t = 10)]
    pub n: usize,
    /// Fleet size.
    #[arg(long = "m", default_value_t = 2)]
    pub m: usize,
    #[arg(long, default_value_t = 100.0)]
    pub capacity: f64,
    #[arg(long, default_value_t = 480.0)]
    pub horizon: f64,
    /// Side of the square holding the sites.
    #[arg(long, default_value_t = 100.0)]
    pub side: f64,
    #[arg(long = "q-min", default_value_t = 10.0)]
    pub q_min: f64,
    #[arg(long = "q-max", default_value_t = 50.0)]
    pub q_max: f64,
}

impl Geometry {
    fn params(&self, seed: u64, stream: u64, mode: Mode) -> GeneratorParams {
        GeneratorParams {
            seed,
            stream,
            sites: self.n,
            fleet: self.m,
            mode,
            side: self.side,
            capacity: self.capacity,
            horizon: self.horizon,
            q_min: self.q_min,
            q_max: self.q_max,
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GenerateArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_parser = parse_mode, default_value = "mprp")]
    pub mode: Mode,
    #[command(flatten)]
    pub geometry: Geometry,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct SolverArgs {
    /// Seed for the randomized diagnostics.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Discretization accuracy, required for mprp-mvs.
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Largest site count solved exhaustively by the baseline.
    #[arg(long = "exact-threshold", default_value_t = 8)]
    pub exact_threshold: usize,
    /// Include ordering and fleet diagnostics.
    #[arg(long)]
    pub diagnostics: bool,
    /// Include wall-clock timings (reports are then no longer reproducible).
    #[arg(long)]
    pub timing: bool,
}

impl SolverArgs {
    fn config(&self) -> SolverConfig {
        SolverConfig {
            exact_threshold: self.exact_threshold,
            rng_seed: self.seed,
            ..SolverConfig::default()
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct SolveArgs {
    pub instance: PathBuf,
    /// Solve under this mode instead of the file's.
    #[arg(long, value_parser = parse_mode)]
    pub mode: Option<Mode>,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Also write the solution file.
    #[arg(long = "solution-out")]
    pub solution_out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct ValidateArgs {
    pub instance: PathBuf,
    pub solution: PathBuf,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BenchArgs {
    #[arg(long, value_parser = parse_mode, default_value = "mprp-m")]
    pub mode: Mode,
    #[arg(long, default_value_t = 10)]
    pub count: usize,
    #[command(flatten)]
    pub geometry: Geometry,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Worker threads; output order does not depend on it.
    #[arg(long, default_value_t = 1)]
    pub workers: usize,
    /// Compare against the exhaustive optimum.
    #[arg(long)]
    pub oracle: bool,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse()
}

fn epsilon_for(mode: Mode, epsilon: Option<f64>) -> Result<Option<f64>, CliError> {
    match (mode.has_variable_supply(), epsilon) {
        (true, None) => Err(CliError::Usage("mode mprp-mvs requires --epsilon".into())),
        (true, Some(e)) if !(e.is_finite() && e > 0.0) => {
            Err(CliError::Usage(format!("--epsilon must be positive, got {e}")))
        }
        (false, Some(_)) => Err(CliError::Usage(format!(
            "--epsilon only applies to mprp-mvs, not {}",
            mode.name()
        ))),
        (_, e) => Ok(e),
    }
}

fn solver_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Mprp => "baseline",
        Mode::MprpM => "reassign",
        Mode::MprpMvs => "discretize+reassign",
    }
}

fn solver_info(mode: Mode, args: &SolverArgs, epsilon: Option<f64>) -> report::SolverInfo {
    let config = args.config();
    report::SolverInfo {
        name: solver_name(mode).to_string(),
        exact_threshold: config.exact_threshold,
        insertion_rounds: config.insertion_rounds,
        seed: config.rng_seed,
        epsilon,
    }
}

struct Solved {
    solution: Solution,
    pipeline: report::PipelineSection,
}

fn run_pipeline(instance: &Instance, epsilon: Option<f64>, config: &SolverConfig) -> Result<Solved, CliError> {
    let mut pipeline = report::PipelineSection::default();
    let solution = match instance.mode() {
        Mode::Mprp => solve_baseline(instance, config)?,
        Mode::MprpM => {
            let run = run_mprp_m(instance, config)?;
            pipeline.baseline_profit = Some(run.baseline.profit());
            pipeline.reassignments = Some(run.applied.len());
            pipeline.literal_only_rejections = Some(run.literal_only_rejections);
            run.solution
        }
        Mode::MprpMvs => {
            let epsilon = epsilon.expect("checked by epsilon_for");
            let run = run_mprp_mvs(instance, epsilon, config)?;
            pipeline.baseline_profit = Some(run.derived_run.baseline.profit());
            pipeline.reassignments = Some(run.derived_run.applied.len());
            pipeline.literal_only_rejections = Some(run.derived_run.literal_only_rejections);
            pipeline.alpha = Some(run.derived.alpha);
            pipeline.intervals = Some(run.derived.levels);
            pipeline.derived_sites = Some(run.derived.sites.len());
            run.solution
        }
    };
    Ok(Solved { solution, pipeline })
}

fn diagnostics(
    instance: &Instance,
    epsilon: Option<f64>,
    config: &SolverConfig,
) -> Result<report::DiagnosticsSection, CliError> {
    let mut d = report::DiagnosticsSection::default();
    match instance.mode() {
        Mode::Mprp => {}
        Mode::MprpM => {
            let o = ordering_diagnostic(instance, config, DIAGNOSTIC_ORDERINGS)?;
            d.orderings = Some(o.totals.len());
            d.ordering_max_gain = Some(o.max);
            d.ordering_min_gain = Some(o.min);
            d.ordering_ratio = Some(o.ratio);
            d.ordering_exceeds_four = Some(o.exceeds_four);
        }
        Mode::MprpMvs => {
            let epsilon = epsilon.expect("checked by epsilon_for");
            let f = fleet_diagnostic(instance, epsilon, config)?;
            d.fleet_ratio = Some(f.ratio);
            d.fleet_bound = Some(f.bound);
            d.fleet_within_bound = Some(f.within_bound());
            d.log_horizon_bound = Some(44.0 * instance.horizon().ln());
        }
    }
    Ok(d)
}

/// Solves an instance file's contents. The report's profit is the audited
/// one; `report.validation.feasible` decides the exit status.
pub fn cmd_solve(
    instance_text: &str,
    mode: Option<Mode>,
    args: &SolverArgs,
) -> Result<(RunReport, Solution), CliError> {
    let mut instance = format::parse_instance(instance_text).map_err(|message| CliError::Parse {
        origin: "instance".into(),
        message,
    })?;
    if let Some(mode) = mode {
        if mode != instance.mode() {
            instance = instance.with_mode(mode).map_err(|e| {
                CliError::Usage(format!("cannot solve a {} file as {}: {e}", instance.mode(), mode))
            })?;
        }
    }
    let epsilon = epsilon_for(instance.mode(), args.epsilon)?;
    let config = args.config();
    let started = Instant::now();
    let solved = run_pipeline(&instance, epsilon, &config)?;
    let elapsed = started.elapsed();
    let mut report = RunReport::new(&instance, &solved.solution, solver_info(instance.mode(), args, epsilon));
    report.pipeline = solved.pipeline;
    if args.diagnostics {
        report.diagnostics = Some(diagnostics(&instance, epsilon, &config)?);
    }
    if args.timing {
        report.elapsed_ms = Some(elapsed.as_secs_f64() * 1e3);
    }
    Ok((report, solved.solution))
}

pub fn cmd_validate(instance_text: &str, solution_text: &str) -> Result<ValidateReport, CliError> {
    let instance = format::parse_instance(instance_text).map_err(|message| CliError::Parse {
        origin: "instance".into(),
        message,
    })?;
    let solution = format::parse_solution(solution_text).map_err(|message| CliError::Parse {
        origin: "solution".into(),
        message,
    })?;
    Ok(ValidateReport::new(&instance, &solution))
}

fn bench_row(args: &BenchArgs, epsilon: Option<f64>, index: usize) -> Result<BenchRow, CliError> {
    let params = args.geometry.params(args.solver.seed, index as u64, args.mode);
    let instance = generate_instance(&params)?;
    let config = args.solver.config();
    let started = Instant::now();
    let solved = run_pipeline(&instance, epsilon, &config)?;
    let elapsed = started.elapsed();
    let audit = validate(&instance, &solved.solution);
    let solver_profit = audit.audited.profit;
    let baseline_profit = match instance.mode() {
        Mode::Mprp => None,
        Mode::MprpM => solved.pipeline.baseline_profit,
        Mode::MprpMvs => None,
    };
    let mut row = BenchRow {
        index,
        instance_digest: report::instance_digest(&instance),
        feasible: audit.is_feasible(),
        violations: audit.violations.len(),
        baseline_profit,
        solver_profit,
        oracle_profit: None,
        oracle_feasible: None,
        ratio: None,
        diagnostics: None,
        elapsed_ms: None,
    };
    if args.oracle {
        let (oracle_solution, optimum) = brute_force_optimum(&instance, &OracleLimits::default())?;
        row.oracle_profit = Some(optimum);
        row.oracle_feasible = Some(validate(&instance, &oracle_solution).is_feasible());
        row.ratio = Some(measure_ratio(solver_profit, optimum));
    }
    if args.solver.diagnostics {
        row.diagnostics = Some(diagnostics(&instance, epsilon, &config)?);
    }
    if args.solver.timing {
        row.elapsed_ms = Some(elapsed.as_secs_f64() * 1e3);
    }
    Ok(row)
}

pub fn cmd_bench(args: &BenchArgs) -> Result<BenchReport, CliError> {
    let epsilon = epsilon_for(args.mode, args.solver.epsilon)?;
    if args.workers == 0 {
        return Err(CliError::Usage("--workers must be at least 1".into()));
    }
    if args.oracle {
        let limits = OracleLimits::default();
        if args.geometry.n > limits.max_sites || args.geometry.m > limits.max_vehicles {
            return Err(CliError::Usage(format!(
                "--oracle needs --n <= {} and --m <= {}",
                limits.max_sites, limits.max_vehicles
            )));
        }
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.workers)
        .build()
        .map_err(|e| CliError::Usage(format!("cannot start worker pool: {e}")))?;
    let started = Instant::now();
    let rows: Vec<BenchRow> = pool.install(|| {
        (0..args.count)
            .into_par_iter()
            .map(|index| bench_row(args, epsilon, index))
            .collect::<Result<_, _>>()
    })?;
    let elapsed = started.elapsed();

    let mut summary = BenchSummary {
        instances: rows.len(),
        feasible: rows.iter().filter(|r| r.feasible).count(),
        max_ratio: None,
        mean_ratio: None,
        infinite_ratios: None,
        solver_above_oracle: None,
    };
    if args.oracle {
        let ratios = RatioSummary::from_ratios(rows.iter().filter_map(|r| r.ratio));
        summary.max_ratio = Some(ratios.max);
        summary.mean_ratio = Some(ratios.mean);
        summary.infinite_ratios = Some(ratios.infinite);
        summary.solver_above_oracle = Some(
            rows.iter()
                .filter(|r| r.oracle_profit.is_some_and(|o| r.solver_profit > o + 1e-6))
                .count(),
        );
    }
    Ok(BenchReport {
        mode: args.mode.name().to_string(),
        seed: args.solver.seed,
        count: args.count,
        sites: args.geometry.n,
        fleet: args.geometry.m,
        solver: solver_info(args.mode, &args.solver, epsilon),
        summary,
        elapsed_ms: args.solver.timing.then_some(elapsed.as_secs_f64() * 1e3),
        rows,
    })
}

fn read(path: &Path) -> Result<String, CliError> {
    std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })
}

fn relabel(err: CliError, path: &Path, origin: &str) -> CliError {
    match err {
        CliError::Parse { origin: o, message } if o == origin => CliError::Parse {
            origin: path.display().to_string(),
            message,
        },
        other => other,
    }
}

fn emit(text: &str, out: Option<&Path>, stdout: &mut dyn Write) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|source| CliError::Io {
            path: path.display().to_string(),
            source,
        }),
        None => stdout.write_all(text.as_bytes()).map_err(|source| CliError::Io {
            path: "<stdout>".into(),
            source,
        }),
    }
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<i32, CliError> {
    match cli.command {
        Command::Generate(a) => {
            let text = cmd_generate(&a.geometry.params(a.seed, 0, a.mode))?;
            emit(&text, a.out.as_deref(), stdout)?;
            Ok(EXIT_OK)
        }
        Command::Solve(a) => {
            let text = read(&a.instance)?;
            let (report, solution) =
                cmd_solve(&text, a.mode, &a.solver).map_err(|e| relabel(e, &a.instance, "instance"))?;
            if let Some(path) = &a.solution_out {
                emit(&format::write_solution(&solution), Some(path), stdout)?;
            }
            emit(&report.to_text(), a.out.as_deref(), stdout)?;
            Ok(if report.validation.feasible { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Validate(a) => {
            let instance = read(&a.instance)?;
            let solution = read(&a.solution)?;
            let report = cmd_validate(&instance, &solution)
                .map_err(|e| relabel(e, &a.instance, "instance"))
                .map_err(|e| relabel(e, &a.solution, "solution"))?;
            emit(&report.to_text(), a.out.as_deref(), stdout)?;
            Ok(if report.validation.feasible { EXIT_OK } else { EXIT_INVALID })
        }
        Command::Bench(a) => {
            let report = cmd_bench(&a)?;
            emit(&report.to_text(), a.out.as_deref(), stdout)?;
            let ok = report.summary.feasible == report.summary.instances
                && report.rows.iter().all(|r| r.oracle_feasible != Some(false));
            Ok(if ok { EXIT_OK } else { EXIT_INVALID })
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit status.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli, stdout) {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

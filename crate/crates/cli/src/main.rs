//! `cdsel`: run coordinate descent with a chosen selection strategy on a
//! LIBSVM or synthetic dataset and write a convergence trace.

mod compare;
mod synthetic;

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use cdsel_core::engine::{
    check_compatibility, reference_optimum, run, write_trace_csv, RunConfig, TraceRecord,
};
use cdsel_core::problems::{
    make_l2_least_squares, make_lasso, make_logistic_l1, make_ridge_dual, Problem,
};
use cdsel_core::selection::{StrategyConfig, StrategyKind, DEFAULT_EPSILON};
use cdsel_core::sparse::{generate_synthetic, read_libsvm_file, LabeledDataset};
use cdsel_core::updates::{verify_class_h, UpdateRule};
use cdsel_core::Error;
use clap::{Parser, ValueEnum};

/// Default trace directory when `--trace` / `--trace-dir` are absent.
const TRACE_DIR_ENV: &str = "CDSEL_TRACE_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    #[value(name = "lasso")]
    Lasso,
    #[value(name = "logistic_l1")]
    LogisticL1,
    #[value(name = "ridge_dual")]
    RidgeDual,
    #[value(name = "l2_least_squares")]
    L2LeastSquares,
}

impl ProblemArg {
    fn name(self) -> &'static str {
        match self {
            Self::Lasso => "lasso",
            Self::LogisticL1 => "logistic_l1",
            Self::RidgeDual => "ridge_dual",
            Self::L2LeastSquares => "l2_least_squares",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum BinSize {
    HalfD,
    Fixed(usize),
}

fn parse_bin_size(s: &str) -> Result<BinSize, String> {
    if s == "d/2" {
        return Ok(BinSize::HalfD);
    }
    match s.parse::<usize>() {
        Ok(0) => Err("bin size must be at least 1".into()),
        Ok(e) => Ok(BinSize::Fixed(e)),
        Err(_) => Err(format!("expected a positive integer or `d/2`, got `{s}`")),
    }
}

fn parse_strategy(s: &str) -> Result<StrategyKind, String> {
    StrategyKind::from_name(s).map_err(|e| e.to_string())
}

fn parse_rule(s: &str) -> Result<UpdateRule, String> {
    UpdateRule::from_name(s).map_err(|e| e.to_string())
}

#[derive(Debug, Parser)]
#[command(
    name = "cdsel",
    version,
    about = "Coordinate descent with adaptive coordinate selection"
)]
struct Cli {
    /// Objective to minimize.
    #[arg(long, value_enum)]
    problem: ProblemArg,

    /// Synthetic data, `n=..,d=..,sparsity=..,signal=..,noise=..[,seed=..]`.
    /// For logistic_l1 the labels are the signs of the generated targets.
    #[arg(long, conflicts_with = "data", required_unless_present = "data")]
    synthetic: Option<String>,

    /// LIBSVM file.
    #[arg(long)]
    data: Option<PathBuf>,

    /// Feature count for LIBSVM data whose trailing columns are empty.
    #[arg(long)]
    n_features: Option<usize>,

    /// Regularization strength; required, there is no default. Sweep it per dataset.
    #[arg(long)]
    lambda: f64,

    /// uniform, ada_gap, gap_per_epoch, gs, max_r or b_max_r.
    #[arg(long, default_value = "b_max_r", value_parser = parse_strategy)]
    strategy: StrategyKind,

    /// Exploration probability of b_max_r.
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,

    /// Bin size E of b_max_r and gap_per_epoch: an integer or `d/2`.
    #[arg(long, value_parser = parse_bin_size)]
    bin_size: Option<BinSize>,

    /// Update rule; defaults to the problem's specialized rule.
    #[arg(long, value_parser = parse_rule)]
    update: Option<UpdateRule>,

    #[arg(long, default_value_t = 10.0)]
    epochs: f64,

    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Scale every column of the data matrix to unit norm (empty columns are dropped).
    #[arg(long)]
    normalize: bool,

    /// Trace CSV path.
    #[arg(long, conflicts_with = "trace_dir")]
    trace: Option<PathBuf>,

    /// Directory for trace files (default: $CDSEL_TRACE_DIR).
    #[arg(long)]
    trace_dir: Option<PathBuf>,

    /// Iterations between trace records (default: d).
    #[arg(long)]
    trace_every: Option<u64>,

    /// Check the certified per-step decrease and fail on violations.
    #[arg(long)]
    audit: bool,

    /// Stop once the duality gap is at most this.
    #[arg(long)]
    target_gap: Option<f64>,

    /// Optimal value used for the `subopt` column.
    #[arg(long)]
    f_star: Option<f64>,

    /// Compare strategies (comma separated) on the same instance instead of a single run.
    #[arg(long, value_delimiter = ',', value_parser = parse_strategy)]
    compare: Vec<StrategyKind>,

    /// CSV summary of `--compare`.
    #[arg(long, requires = "compare")]
    summary: Option<PathBuf>,

    /// Random states used to check a specialized update rule before running; 0 skips.
    #[arg(long, default_value_t = 200)]
    preflight_trials: usize,
}

enum Failure {
    Usage(String),
    Numerical(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Numerical(_) | Error::Consistency(_) | Error::BudgetExceeded { .. } => {
                Failure::Numerical(e.to_string())
            }
            _ => Failure::Usage(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: impl std::fmt::Display) -> Failure {
    Failure::Usage(format!("{}: {e}", path.display()))
}

fn sign_labels(data: LabeledDataset) -> Result<LabeledDataset, Error> {
    let labels = data
        .labels
        .iter()
        .map(|&y| if y >= 0.0 { 1.0 } else { -1.0 })
        .collect();
    LabeledDataset::new(data.matrix, labels)
}

fn load_data(cli: &Cli) -> Result<LabeledDataset, Failure> {
    let logistic = cli.problem == ProblemArg::LogisticL1;
    let mut data = if let Some(text) = &cli.synthetic {
        let spec = synthetic::parse_synthetic(text, cli.seed).map_err(Failure::Usage)?;
        let (data, _) = generate_synthetic(&spec)?;
        if logistic {
            sign_labels(data)?
        } else {
            data
        }
    } else {
        let path = cli
            .data
            .as_ref()
            .expect("clap requires --data or --synthetic");
        read_libsvm_file(path, logistic).map_err(|e| match e {
            Error::Io(io) => io_failure(path, io),
            other => io_failure(path, other),
        })?
    };
    if let Some(d) = cli.n_features {
        data = LabeledDataset::new(data.matrix.with_n_cols(d)?, data.labels)?;
    }
    if cli.normalize {
        let (normalized, info) = data.normalized();
        if !info.dropped.is_empty() {
            eprintln!("note: dropped {} empty columns", info.dropped.len());
        }
        data = normalized;
    }
    Ok(data)
}

fn build_problem(kind: ProblemArg, data: &LabeledDataset, lambda: f64) -> Result<Problem, Error> {
    match kind {
        ProblemArg::Lasso => make_lasso(data, lambda),
        ProblemArg::LogisticL1 => make_logistic_l1(data, lambda),
        ProblemArg::RidgeDual => make_ridge_dual(data, lambda),
        ProblemArg::L2LeastSquares => make_l2_least_squares(data, lambda),
    }
}

fn strategy_config(cli: &Cli, kind: StrategyKind) -> StrategyConfig {
    let cfg = StrategyConfig::new(kind).with_epsilon(cli.epsilon);
    match cli.bin_size {
        Some(BinSize::Fixed(e)) => cfg.with_bin_size(e),
        Some(BinSize::HalfD) | None => cfg,
    }
}

/// Falls back to the reference rule if `rule` loses to it on random states.
fn preflight(cli: &Cli, p: &Problem, rule: UpdateRule) -> Result<UpdateRule, Failure> {
    if rule == UpdateRule::Reference || cli.preflight_trials == 0 {
        return Ok(rule);
    }
    let report = verify_class_h(&rule, p, cli.preflight_trials, cli.seed)?;
    if report.violations > 0 {
        eprintln!(
            "warning: {} did worse than the reference step in {}/{} checks (worst margin {:.3e}); using reference",
            rule.label(),
            report.violations,
            report.trials,
            report.worst_margin
        );
        return Ok(UpdateRule::Reference);
    }
    Ok(rule)
}

fn trace_dir(cli: &Cli) -> Option<PathBuf> {
    cli.trace_dir
        .clone()
        .or_else(|| std::env::var_os(TRACE_DIR_ENV).map(PathBuf::from))
}

fn trace_name(cli: &Cli, strategy: StrategyKind) -> String {
    format!(
        "{}_{}_seed{}.csv",
        cli.problem.name(),
        strategy.label(),
        cli.seed
    )
}

fn write_trace(path: &Path, trace: &[TraceRecord]) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    let file = File::create(path).map_err(|e| io_failure(path, e))?;
    write_trace_csv(trace, BufWriter::new(file)).map_err(|e| io_failure(path, e))
}

fn execute(cli: &Cli) -> Result<(), Failure> {
    if !(cli.lambda > 0.0 && cli.lambda.is_finite()) {
        return Err(Failure::Usage(format!(
            "--lambda must be positive, got {}",
            cli.lambda
        )));
    }
    if !(cli.epochs > 0.0 && cli.epochs.is_finite()) {
        return Err(Failure::Usage(format!(
            "--epochs must be positive, got {}",
            cli.epochs
        )));
    }
    if !(0.0..=1.0).contains(&cli.epsilon) {
        return Err(Failure::Usage(format!(
            "--epsilon must lie in [0, 1], got {}",
            cli.epsilon
        )));
    }
    if cli.trace_every == Some(0) {
        return Err(Failure::Usage("--trace-every must be at least 1".into()));
    }
    let data = load_data(cli)?;
    let p = build_problem(cli.problem, &data, cli.lambda)?;
    let rule = cli.update.unwrap_or(UpdateRule::default_for(p.kind()));
    rule.check_compatible(p.kind())?;
    // compare reports incompatible members as failed rows instead
    if cli.compare.is_empty() {
        check_compatibility(&p, cli.strategy, rule)?;
    }
    let rule = preflight(cli, &p, rule)?;

    let mut base = RunConfig::new(strategy_config(cli, cli.strategy), cli.epochs, cli.seed);
    base.rule = Some(rule);
    base.trace_every = cli.trace_every;
    base.audit = cli.audit;
    base.target_gap = cli.target_gap;
    base.f_star = cli.f_star;

    if !cli.compare.is_empty() {
        return execute_compare(cli, &p, &base);
    }

    let started = Instant::now();
    let res = run(&p, &base)?;
    let wall = started.elapsed().as_secs_f64();
    let trace_path = cli
        .trace
        .clone()
        .or_else(|| trace_dir(cli).map(|d| d.join(trace_name(cli, cli.strategy))));
    if let Some(path) = &trace_path {
        write_trace(path, &res.trace)?;
    }
    let last = res
        .trace
        .last()
        .expect("a run records at least one checkpoint");
    println!(
        "{} {}/{}: F={:.10e} gap={:.3e} eta={:.3} eta_max={:.3} epochs={:.3} iterations={} wall_s={:.3}{}",
        cli.problem.name(),
        cli.strategy.label(),
        res.rule.label(),
        res.f,
        last.gap,
        last.eta,
        last.eta_max,
        last.epoch,
        res.iterations,
        wall,
        trace_path.map_or(String::new(), |p| format!(" trace={}", p.display()))
    );
    if cli.audit && (res.audit.decrease_violations > 0 || res.audit.monotone_violations > 0) {
        return Err(Failure::Numerical(format!(
            "audit failed: {} decrease-bound violations (worst shortfall {:.3e}), {} increases of F over {} steps",
            res.audit.decrease_violations, res.audit.worst_shortfall, res.audit.monotone_violations, res.audit.steps
        )));
    }
    Ok(())
}

fn execute_compare(cli: &Cli, p: &Problem, base: &RunConfig) -> Result<(), Failure> {
    let f_star = match cli.f_star {
        Some(f) => f,
        None => reference_optimum(p, 1e-9)?.f_star,
    };
    let strategies: Vec<StrategyConfig> = cli
        .compare
        .iter()
        .map(|&k| strategy_config(cli, k))
        .collect();
    let rows = compare::compare(p, &strategies, base, f_star);
    print!("{}", compare::render_table(&rows));

    let dir = trace_dir(cli);
    if let Some(dir) = &dir {
        for (row, kind) in rows.iter().zip(&cli.compare) {
            if let Ok(res) = &row.result {
                write_trace(&dir.join(trace_name(cli, *kind)), &res.trace)?;
            }
        }
    }
    let summary = cli.summary.clone().or_else(|| {
        dir.map(|d| {
            d.join(format!(
                "{}_compare_seed{}.csv",
                cli.problem.name(),
                cli.seed
            ))
        })
    });
    if let Some(path) = summary {
        if let Some(parent) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(parent).map_err(|e| io_failure(parent, e))?;
        }
        let file = File::create(&path).map_err(|e| io_failure(&path, e))?;
        compare::write_summary_csv(&rows, BufWriter::new(file))
            .map_err(|e| io_failure(&path, e))?;
    }
    let failed: Vec<&str> = rows
        .iter()
        .filter(|r| r.result.is_err())
        .map(|r| r.label.as_str())
        .collect();
    if !failed.is_empty() {
        return Err(Failure::Numerical(format!(
            "runs failed: {}",
            failed.join(", ")
        )));
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Numerical(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(3)
        }
    }
}

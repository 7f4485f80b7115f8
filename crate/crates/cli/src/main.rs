//! Command-line front end for the Chiron pipeline.
//!
//! The pipeline is file-mediated so each stage is independently testable
//! and replayable:
//!
//! ```text
//! simulate   config.json [+ failures.json]   -> outcome JSON + event-log CSV
//! profile    config.json + grid flags        -> dataset CSV/JSON [+ outcomes JSON]
//! fit        dataset                         -> models JSON (with R² per model)
//! optimize   models + --c-trt + --case       -> recommendation JSON (stdout)
//! validate   models + recommendation + config-> trial table CSV (stdout)
//! plotdata   models + dataset [+ outcomes]   -> plot-ready CSVs
//! ```
//!
//! Exit codes: 0 success, 2 input/validation error, 3 infeasible
//! optimization (no interval in the model domain meets the bound).

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::de::DeserializeOwned;
use serde::Serialize;

use chiron_core::modeling::predict;
use chiron_core::optimizer::{recommend, QosConstraint};
use chiron_core::profiling::{
    derive_trt_points, make_grid, read_dataset, write_dataset, Format, GridSpec,
};
use chiron_core::sim::{self, write_event_log};
use chiron_core::trt::TrtCase;
use chiron_core::{
    Error, FailureSpec64, ModelFamily64, PolyModel64, ProfilingDataset64, Recommendation64,
    RecommendationReport64, SimConfig64, SimOutcome64,
};

/// Points sampled per fitted curve by `plotdata`.
const CURVE_POINTS: usize = 200;

// ============================================================================
// Argument surface
// ============================================================================

#[derive(Parser)]
#[command(
    name = "chiron",
    version,
    about = "Checkpoint-interval profiling, modeling, and optimization for \
             stream-processing pipelines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write its outcome and event log.
    Simulate(SimulateArgs),
    /// Sweep a checkpoint-interval grid and write the profiling dataset.
    Profile(ProfileArgs),
    /// Fit the latency and recovery-time models to a profiling dataset.
    Fit(FitArgs),
    /// Recommend the largest interval that meets a recovery-time bound.
    Optimize(OptimizeArgs),
    /// Replay a recommendation under failure injection and tabulate errors.
    Validate(ValidateArgs),
    /// Emit plot-ready CSVs for the fitted curves and raw observations.
    Plotdata(PlotdataArgs),
}

#[derive(Args)]
struct SimulateArgs {
    /// Simulation configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Failure plan (JSON); omitted means a failure-free run.
    #[arg(long)]
    failures: Option<PathBuf>,
    /// Where to write the outcome JSON.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the event-log CSV (default: the outcome path with an
    /// `events.csv` extension).
    #[arg(long)]
    events: Option<PathBuf>,
}

#[derive(Args)]
struct ProfileArgs {
    /// Base simulation configuration (JSON); `ci_ms` is replaced per grid
    /// point and `seed` derives one sub-seed per run.
    #[arg(long)]
    config: PathBuf,
    /// Smallest checkpoint interval of the grid, ms.
    #[arg(long)]
    ci_min: f64,
    /// Largest checkpoint interval of the grid, ms.
    #[arg(long)]
    ci_max: f64,
    /// Number of grid points, endpoints included.
    #[arg(long, default_value_t = 11)]
    count: usize,
    /// Profiling runs per grid point (the dataset keeps the medians).
    #[arg(long, default_value_t = 5)]
    repeats: u32,
    /// Failures injected per run, placed uniformly within their cycles.
    #[arg(long, default_value_t = 3)]
    failures_per_run: u32,
    /// Where to write the dataset.
    #[arg(long)]
    out: PathBuf,
    /// Dataset format (default: inferred from the `--out` extension,
    /// falling back to CSV).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Also write every raw simulation outcome as a JSON array (consumed
    /// by `plotdata --outcomes`).
    #[arg(long)]
    out_outcomes: Option<PathBuf>,
}

#[derive(Args)]
struct FitArgs {
    /// Profiling dataset (CSV or JSON).
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset format (default: inferred from the `--dataset` extension).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Where to write the fitted model family (JSON).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct OptimizeArgs {
    /// Fitted model family (JSON, from `fit`).
    #[arg(long)]
    models: PathBuf,
    /// Recovery-time bound C_TRT, ms.
    #[arg(long)]
    c_trt: f64,
    /// Which recovery-time case the bound constrains.
    #[arg(long, value_enum)]
    case: CaseArg,
    /// Fall back to the nearest domain endpoint that still satisfies the
    /// bound when the exact solution lies outside the profiled range.
    #[arg(long)]
    clamp: bool,
}

#[derive(Args)]
struct ValidateArgs {
    /// Fitted model family (JSON, from `fit`).
    #[arg(long)]
    models: PathBuf,
    /// Recommendation (JSON, from `optimize`).
    #[arg(long)]
    recommendation: PathBuf,
    /// Base simulation configuration (JSON); each trial runs it at the
    /// recommended interval with one injected failure.
    #[arg(long)]
    config: PathBuf,
    /// Number of validation trials.
    #[arg(long, default_value_t = 5)]
    trials: u32,
}

#[derive(Args)]
struct PlotdataArgs {
    /// Fitted model family (JSON, from `fit`).
    #[arg(long)]
    models: PathBuf,
    /// Profiling dataset the family was fitted to (CSV or JSON).
    #[arg(long)]
    dataset: PathBuf,
    /// Dataset format (default: inferred from the `--dataset` extension).
    #[arg(long, value_enum)]
    format: Option<FormatArg>,
    /// Raw outcomes from `profile --out-outcomes`; enables the observed
    /// recovery-time series.
    #[arg(long)]
    outcomes: Option<PathBuf>,
    /// Directory for the emitted CSVs (created if missing).
    #[arg(long)]
    out_dir: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Json,
}

#[derive(Clone, Copy, ValueEnum)]
enum CaseArg {
    /// Best case: the failure lands immediately after a checkpoint.
    Min,
    /// Average case: the failure lands mid-cycle.
    Avg,
    /// Worst case: the failure lands just before the next checkpoint.
    Max,
}

impl From<CaseArg> for TrtCase {
    fn from(case: CaseArg) -> Self {
        match case {
            CaseArg::Min => TrtCase::Min,
            CaseArg::Avg => TrtCase::Avg,
            CaseArg::Max => TrtCase::Max,
        }
    }
}

// ============================================================================
// Entry point and plumbing
// ============================================================================

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(&cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Infeasible { .. } | Error::OutOfDomain { .. } => ExitCode::from(3),
                _ => ExitCode::from(2),
            }
        }
    }
}

fn dispatch(command: &Command) -> Result<(), Error> {
    match command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Profile(args) => cmd_profile(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Optimize(args) => cmd_optimize(args),
        Command::Validate(args) => cmd_validate(args),
        Command::Plotdata(args) => cmd_plotdata(args),
    }
}

fn resolve_format(explicit: Option<FormatArg>, path: &Path) -> Format {
    match explicit {
        Some(FormatArg::Csv) => Format::Csv,
        Some(FormatArg::Json) => Format::Json,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("json") => Format::Json,
            _ => Format::Csv,
        },
    }
}

fn open_file(path: &Path) -> Result<File, Error> {
    File::open(path).map_err(|e| io_with_path(path, e))
}

fn create_file(path: &Path) -> Result<File, Error> {
    File::create(path).map_err(|e| io_with_path(path, e))
}

fn io_with_path(path: &Path, err: io::Error) -> Error {
    Error::Io(io::Error::new(
        err.kind(),
        format!("{}: {err}", path.display()),
    ))
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, Error> {
    let reader = BufReader::new(open_file(path)?);
    let mut deserializer = serde_json::Deserializer::from_reader(reader);
    // serde_path_to_error prefixes the offending field path, so schema
    // errors always name the field.
    serde_path_to_error::deserialize(&mut deserializer)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn write_json_file<T: Serialize>(value: &T, path: &Path) -> Result<(), Error> {
    let mut writer = BufWriter::new(create_file(path)?);
    serde_json::to_writer_pretty(&mut writer, value)
        .map_err(|e| Error::Parse(format!("{}: {e}", path.display())))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

// ============================================================================
// Subcommands
// ============================================================================

fn cmd_simulate(args: &SimulateArgs) -> Result<(), Error> {
    let config: SimConfig64 = read_json(&args.config)?;
    let failures: FailureSpec64 = match &args.failures {
        Some(path) => read_json(path)?,
        None => FailureSpec64::none(),
    };
    let outcome = sim::run(&config, &failures)?;
    write_json_file(&outcome, &args.out)?;
    let events_path = args
        .events
        .clone()
        .unwrap_or_else(|| args.out.with_extension("events.csv"));
    write_event_log(
        &outcome.event_log,
        BufWriter::new(create_file(&events_path)?),
    )?;
    Ok(())
}

fn cmd_profile(args: &ProfileArgs) -> Result<(), Error> {
    let base: SimConfig64 = read_json(&args.config)?;
    let grid = make_grid(&GridSpec {
        ci_min_ms: args.ci_min,
        ci_max_ms: args.ci_max,
        count: args.count,
    })?;
    let (dataset, outcomes) =
        sim::profile_grid(&base, &grid, args.failures_per_run, args.repeats)?;
    let format = resolve_format(args.format, &args.out);
    write_dataset(&dataset, format, BufWriter::new(create_file(&args.out)?))?;
    if let Some(path) = &args.out_outcomes {
        write_json_file(&outcomes, path)?;
    }
    Ok(())
}

fn cmd_fit(args: &FitArgs) -> Result<(), Error> {
    let format = resolve_format(args.format, &args.dataset);
    let dataset: ProfilingDataset64 =
        read_dataset(BufReader::new(open_file(&args.dataset)?), format)?;
    let points = derive_trt_points(&dataset)?;
    let family = chiron_core::modeling::fit_family(&dataset, &points)?;
    write_json_file(&family, &args.out)
}

fn cmd_optimize(args: &OptimizeArgs) -> Result<(), Error> {
    let family: ModelFamily64 = read_json(&args.models)?;
    let constraint = QosConstraint {
        c_trt_ms: args.c_trt,
        case_selector: args.case.into(),
    };
    let recommendation = recommend(&family, &constraint, args.clamp)?;
    let report = RecommendationReport64::new(recommendation, &family);
    let stdout = io::stdout();
    let mut lock = stdout.lock();
    serde_json::to_writer_pretty(&mut lock, &report)
        .map_err(|e| Error::Parse(e.to_string()))?;
    lock.write_all(b"\n")?;
    lock.flush()?;
    Ok(())
}

fn cmd_validate(args: &ValidateArgs) -> Result<(), Error> {
    let family: ModelFamily64 = read_json(&args.models)?;
    let recommendation: Recommendation64 = read_json(&args.recommendation)?;
    let config: SimConfig64 = read_json(&args.config)?;
    let report = sim::validate(&family, &recommendation, &config, args.trials)?;
    let stdout = io::stdout();
    let mut writer = csv::Writer::from_writer(stdout.lock());
    writer
        .write_record([
            "trial",
            "actual_trt_s",
            "constraint_satisfied",
            "actual_l_avg_ms",
            "percent_error",
        ])
        .map_err(|e| Error::Io(io::Error::other(e)))?;
    for trial in &report.trials {
        writer
            .serialize((
                trial.trial,
                trial.measured_trt_ms / 1000.0,
                trial.constraint_satisfied,
                trial.measured_l_avg_ms,
                trial.percent_error,
            ))
            .map_err(|e| Error::Io(io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}

fn cmd_plotdata(args: &PlotdataArgs) -> Result<(), Error> {
    let family: ModelFamily64 = read_json(&args.models)?;
    let format = resolve_format(args.format, &args.dataset);
    let dataset: ProfilingDataset64 =
        read_dataset(BufReader::new(open_file(&args.dataset)?), format)?;
    let points = derive_trt_points(&dataset)?;
    fs::create_dir_all(&args.out_dir).map_err(|e| io_with_path(&args.out_dir, e))?;

    write_curve(&args.out_dir.join("curve_p.csv"), &family.perf, "l_avg_ms")?;
    write_curve(
        &args.out_dir.join("curve_a_min.csv"),
        &family.avail_min,
        "trt_ms",
    )?;
    write_curve(
        &args.out_dir.join("curve_a_avg.csv"),
        &family.avail_avg,
        "trt_ms",
    )?;
    write_curve(
        &args.out_dir.join("curve_a_max.csv"),
        &family.avail_max,
        "trt_ms",
    )?;

    // The points the fits actually consumed.
    let path = args.out_dir.join("training_points.csv");
    let mut writer = csv::Writer::from_writer(BufWriter::new(create_file(&path)?));
    writer
        .write_record(["ci_ms", "l_avg_ms", "trt_min_ms", "trt_avg_ms", "trt_max_ms"])
        .map_err(|e| Error::Io(io::Error::other(e)))?;
    for (run, point) in dataset.runs.iter().zip(&points) {
        writer
            .serialize((
                run.ci_ms,
                run.l_avg_ms,
                point.estimate.trt_min_ms,
                point.estimate.trt_avg_ms,
                point.estimate.trt_max_ms,
            ))
            .map_err(|e| Error::Io(io::Error::other(e)))?;
    }
    writer.flush()?;

    // Observed per-interval median recovery times, when raw outcomes are
    // available (written by `profile --out-outcomes`, grid-major order).
    let path = args.out_dir.join("observed_trt.csv");
    let mut writer = csv::Writer::from_writer(BufWriter::new(create_file(&path)?));
    writer
        .write_record(["ci_ms", "median_trt_ms"])
        .map_err(|e| Error::Io(io::Error::other(e)))?;
    if let Some(outcomes_path) = &args.outcomes {
        let outcomes: Vec<SimOutcome64> = read_json(outcomes_path)?;
        if outcomes.is_empty() || outcomes.len() % dataset.runs.len() != 0 {
            return Err(Error::InvalidInput(format!(
                "{} outcomes cannot be split evenly over {} dataset rows",
                outcomes.len(),
                dataset.runs.len()
            )));
        }
        let per_row = outcomes.len() / dataset.runs.len();
        for (run, chunk) in dataset.runs.iter().zip(outcomes.chunks(per_row)) {
            let mut trts: Vec<f64> = chunk
                .iter()
                .flat_map(|o| o.measured_trt_ms.iter().copied())
                .collect();
            if trts.is_empty() {
                continue; // failure-free row: nothing observed
            }
            let median = sim::median(&mut trts);
            writer
                .serialize((run.ci_ms, median))
                .map_err(|e| Error::Io(io::Error::other(e)))?;
        }
    }
    writer.flush()?;
    Ok(())
}

/// Samples a fitted curve at `CURVE_POINTS` equidistant abscissae spanning
/// exactly the model domain.
fn write_curve(path: &Path, model: &PolyModel64, value_column: &str) -> Result<(), Error> {
    let mut writer = csv::Writer::from_writer(BufWriter::new(create_file(path)?));
    writer
        .write_record(["ci_ms", value_column])
        .map_err(|e| Error::Io(io::Error::other(e)))?;
    let [lo, hi] = model.domain;
    let step = (hi - lo) / (CURVE_POINTS - 1) as f64;
    for i in 0..CURVE_POINTS {
        let x = if i == CURVE_POINTS - 1 {
            hi // exact endpoint, no step-accumulation rounding
        } else {
            lo + step * i as f64
        };
        writer
            .serialize((x, predict(model, x).value))
            .map_err(|e| Error::Io(io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}

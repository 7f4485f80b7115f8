//! Profiling datasets: per-interval metrics, interval grids, dataset
//! serialization, and derivation of recovery-time training points.
//!
//! A profiling sweep runs the pipeline (here: the simulator) at each
//! checkpoint interval of a grid and condenses every interval's repeated runs
//! into one [`ProfilingRunMetrics`] row. The resulting
//! [`ProfilingDataset`] is the single artifact the modeling stage consumes,
//! and it round-trips through CSV (one row per interval, fixed header) or
//! JSON (`{"runs": [...]}`).

use std::io;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::{from_f64, Float};
use crate::trt::{self, TrtEstimate};

/// Exact CSV column set (and order) for dataset files.
const CSV_HEADER: [&str; 7] = [
    "ci_ms",
    "i_avg_eps",
    "i_max_eps",
    "l_avg_ms",
    "r_avg_ms",
    "w_avg_ms",
    "timeout_ms",
];

// ============================================================================
// Rows and datasets
// ============================================================================

/// Aggregated metrics for one profiled checkpoint interval.
///
/// Field order doubles as the CSV column order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfilingRunMetrics<F> {
    /// Checkpoint interval this row was profiled at, milliseconds.
    pub ci_ms: F,
    /// Average ingress rate, events per second.
    pub i_avg_eps: F,
    /// Peak processing rate, events per second.
    pub i_max_eps: F,
    /// Steady-state average latency, milliseconds.
    pub l_avg_ms: F,
    /// Measured restore duration, milliseconds.
    pub r_avg_ms: F,
    /// Warm-up duration, milliseconds.
    pub w_avg_ms: F,
    /// Failure-detection timeout in force during the run, milliseconds.
    pub timeout_ms: F,
}

impl<F: Float> ProfilingRunMetrics<F> {
    /// Checks the per-row invariants: everything finite, `ci_ms`,
    /// `i_max_eps` and `timeout_ms` strictly positive, the rest
    /// non-negative.
    ///
    /// Over-utilization (`i_avg_eps >= i_max_eps`) is deliberately *not* a
    /// row error: such rows are structurally valid measurements and are
    /// rejected only when recovery-time points are derived from them.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidInput`] naming the offending field.
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("ci_ms", self.ci_ms),
            ("i_max_eps", self.i_max_eps),
            ("timeout_ms", self.timeout_ms),
        ] {
            if !(value > F::zero() && value.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be positive and finite, got {value}"
                )));
            }
        }
        for (name, value) in [
            ("i_avg_eps", self.i_avg_eps),
            ("l_avg_ms", self.l_avg_ms),
            ("r_avg_ms", self.r_avg_ms),
            ("w_avg_ms", self.w_avg_ms),
        ] {
            if !(value >= F::zero() && value.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be non-negative and finite, got {value}"
                )));
            }
        }
        Ok(())
    }
}

/// A validated set of profiling rows, sorted by checkpoint interval.
///
/// Invariants (established by [`ProfilingDataset::new`] and by the readers):
/// at least three rows, every row valid, `ci_ms` strictly increasing. The
/// `runs` field stays public for construction of literals in tests and
/// callers; mutating it can break the invariants, which are re-checked where
/// they matter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfilingDataset<F> {
    /// The rows, ordered by `ci_ms`.
    pub runs: Vec<ProfilingRunMetrics<F>>,
}

impl<F: Float> ProfilingDataset<F> {
    /// Validates and wraps rows that are already sorted by `ci_ms`.
    ///
    /// # Errors
    ///
    /// - [`Error::InsufficientData`] with `needed = 3` for short inputs;
    /// - [`Error::Row`] (1-based) for a row failing
    ///   [`ProfilingRunMetrics::validate`];
    /// - [`Error::Row`] for a `ci_ms` that is not strictly greater than its
    ///   predecessor (duplicates included).
    pub fn new(runs: Vec<ProfilingRunMetrics<F>>) -> Result<Self> {
        if runs.len() < 3 {
            return Err(Error::InsufficientData {
                needed: 3,
                got: runs.len(),
            });
        }
        for (i, run) in runs.iter().enumerate() {
            run.validate().map_err(|e| Error::Row {
                row: i + 1,
                message: e.to_string(),
            })?;
        }
        for (i, pair) in runs.windows(2).enumerate() {
            if !(pair[1].ci_ms > pair[0].ci_ms) {
                return Err(Error::Row {
                    row: i + 2,
                    message: format!(
                        "ci_ms {} must be strictly greater than the previous row's {}",
                        pair[1].ci_ms, pair[0].ci_ms
                    ),
                });
            }
        }
        Ok(Self { runs })
    }

    /// The profiled checkpoint intervals, in order.
    #[must_use]
    pub fn intervals(&self) -> Vec<F> {
        self.runs.iter().map(|r| r.ci_ms).collect()
    }
}

// ============================================================================
// Interval grids
// ============================================================================

/// Describes an evenly spaced checkpoint-interval grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<F> {
    /// Smallest interval, milliseconds.
    pub ci_min_ms: F,
    /// Largest interval, milliseconds.
    pub ci_max_ms: F,
    /// Number of grid points, including both endpoints.
    pub count: usize,
}

/// Builds the evenly spaced grid described by `spec`.
///
/// Both endpoints are reproduced exactly; interior points are
/// `ci_min + k * step` with `step = (ci_max - ci_min) / (count - 1)`.
///
/// # Errors
///
/// [`Error::InvalidInput`] when `count < 2`, the endpoints are not
/// `0 < ci_min < ci_max` and finite, or the span is too small for `count`
/// distinct values.
pub fn make_grid<F: Float>(spec: &GridSpec<F>) -> Result<Vec<F>> {
    if spec.count < 2 {
        return Err(Error::InvalidInput(format!(
            "grid count must be at least 2, got {}",
            spec.count
        )));
    }
    if !(spec.ci_min_ms > F::zero() && spec.ci_min_ms.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ci_min_ms must be positive and finite, got {}",
            spec.ci_min_ms
        )));
    }
    if !(spec.ci_max_ms > spec.ci_min_ms && spec.ci_max_ms.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ci_max_ms ({}) must be finite and greater than ci_min_ms ({})",
            spec.ci_max_ms, spec.ci_min_ms
        )));
    }
    let step = (spec.ci_max_ms - spec.ci_min_ms) / from_f64::<F>((spec.count - 1) as f64);
    let mut grid: Vec<F> = (0..spec.count)
        .map(|k| spec.ci_min_ms + step * from_f64::<F>(k as f64))
        .collect();
    grid[spec.count - 1] = spec.ci_max_ms;
    if grid.windows(2).any(|pair| !(pair[1] > pair[0])) {
        return Err(Error::InvalidInput(format!(
            "grid of {} points over [{}, {}] ms collapses adjacent values",
            spec.count, spec.ci_min_ms, spec.ci_max_ms
        )));
    }
    Ok(grid)
}

// ============================================================================
// Recovery-time training points
// ============================================================================

/// One modeling input: the closed-form recovery-time estimate at a profiled
/// interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrtDataPoint<F> {
    /// Checkpoint interval, milliseconds.
    pub ci_ms: F,
    /// Three-case recovery-time estimate at that interval.
    pub estimate: TrtEstimate<F>,
}

/// Turns every dataset row into a recovery-time training point via the
/// closed-form estimator.
///
/// # Errors
///
/// - [`Error::OverUtilized`] carrying the offending run's index when a row
///   has `i_avg_eps >= i_max_eps`;
/// - any other estimator error ([`Error::InvalidInput`]) forwarded as-is.
pub fn derive_trt_points<F: Float>(dataset: &ProfilingDataset<F>) -> Result<Vec<TrtDataPoint<F>>> {
    dataset
        .runs
        .iter()
        .enumerate()
        .map(|(index, run)| {
            let u = trt::utilization(run.i_avg_eps, run.i_max_eps).map_err(|e| match e {
                Error::OverUtilized {
                    i_avg_eps,
                    i_max_eps,
                    ..
                } => Error::OverUtilized {
                    i_avg_eps,
                    i_max_eps,
                    run_index: Some(index),
                },
                other => other,
            })?;
            let estimate =
                trt::estimate_trt(run.ci_ms, run.timeout_ms, run.r_avg_ms, run.w_avg_ms, u)?;
            Ok(TrtDataPoint {
                ci_ms: run.ci_ms,
                estimate,
            })
        })
        .collect()
}

// ============================================================================
// Dataset io
// ============================================================================

/// On-disk representations of a profiling dataset.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    /// One row per interval under the fixed seven-column header.
    Csv,
    /// `{"runs": [...]}` with one object per interval.
    Json,
}

/// Reads, validates and sorts a dataset.
///
/// Rows may arrive in any order; they are sorted by `ci_ms` before the
/// dataset invariants are checked. Row numbers in errors are 1-based over
/// the *data* rows of the source (the CSV header does not count) and refer
/// to the original file order.
///
/// # Errors
///
/// - [`Error::Parse`] for malformed files or a wrong CSV header;
/// - [`Error::Row`] for unparsable or invalid rows or duplicate `ci_ms`;
/// - [`Error::InsufficientData`] for fewer than three rows;
/// - [`Error::Io`] for underlying read failures.
pub fn read_dataset<F, R>(source: R, format: Format) -> Result<ProfilingDataset<F>>
where
    F: Float + Serialize + DeserializeOwned,
    R: io::Read,
{
    let rows: Vec<ProfilingRunMetrics<F>> = match format {
        Format::Csv => read_csv_rows(source)?,
        Format::Json => {
            #[derive(Deserialize)]
            struct Doc<F> {
                runs: Vec<ProfilingRunMetrics<F>>,
            }
            let doc: Doc<F> = serde_json::from_reader(source)
                .map_err(|e| Error::Parse(format!("json: {e}")))?;
            doc.runs
        }
    };

    // Validate rows while they still carry their file positions.
    for (i, row) in rows.iter().enumerate() {
        row.validate().map_err(|e| Error::Row {
            row: i + 1,
            message: e.to_string(),
        })?;
    }

    // Sort by interval, remembering where each row came from.
    let mut indexed: Vec<(usize, ProfilingRunMetrics<F>)> = rows.into_iter().enumerate().collect();
    indexed.sort_by(|a, b| {
        a.1.ci_ms
            .partial_cmp(&b.1.ci_ms)
            .expect("validated ci_ms values are comparable")
    });
    for pair in indexed.windows(2) {
        let (first_row, a) = (pair[0].0 + 1, &pair[0].1);
        let (second_row, b) = (pair[1].0 + 1, &pair[1].1);
        if b.ci_ms == a.ci_ms {
            return Err(Error::Row {
                row: second_row.max(first_row),
                message: format!(
                    "duplicate ci_ms {} (rows {} and {})",
                    a.ci_ms,
                    first_row.min(second_row),
                    first_row.max(second_row)
                ),
            });
        }
    }

    ProfilingDataset::new(indexed.into_iter().map(|(_, row)| row).collect())
}

/// Writes a dataset in the canonical form for `format`.
///
/// Output is deterministic: floats are rendered with the shortest
/// representation that round-trips, lines end with `\n`, and the file ends
/// with a newline, so writing the result of [`read_dataset`] reproduces a
/// canonical file byte for byte.
///
/// # Errors
///
/// [`Error::Io`] for sink failures.
pub fn write_dataset<F, W>(dataset: &ProfilingDataset<F>, format: Format, sink: W) -> Result<()>
where
    F: Float + Serialize,
    W: io::Write,
{
    match format {
        Format::Csv => {
            let mut writer = csv::Writer::from_writer(sink);
            for run in &dataset.runs {
                writer.serialize(run).map_err(csv_error)?;
            }
            writer.flush()?;
        }
        Format::Json => {
            let mut sink = sink;
            serde_json::to_writer_pretty(&mut sink, dataset)
                .map_err(|e| Error::Io(io::Error::other(e)))?;
            sink.write_all(b"\n")?;
        }
    }
    Ok(())
}

fn read_csv_rows<F, R>(source: R) -> Result<Vec<ProfilingRunMetrics<F>>>
where
    F: Float + DeserializeOwned,
    R: io::Read,
{
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(source);
    let headers = reader.headers().map_err(csv_error)?;
    let got: Vec<&str> = headers.iter().collect();
    if got != CSV_HEADER {
        return Err(Error::Parse(format!(
            "expected csv header {}, got {}",
            CSV_HEADER.join(","),
            got.join(",")
        )));
    }
    let mut rows = Vec::new();
    for (i, record) in reader.deserialize::<ProfilingRunMetrics<F>>().enumerate() {
        rows.push(record.map_err(|e| Error::Row {
            row: i + 1,
            message: match e.into_kind() {
                csv::ErrorKind::Deserialize { err, .. } => err.to_string(),
                other => format!("{other:?}"),
            },
        })?);
    }
    Ok(rows)
}

fn csv_error(e: csv::Error) -> Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => Error::Io(io),
        other => Error::Parse(format!("csv: {other:?}")),
    }
}

// ============================================================================
// Tests
// ============================================================================

//! Error type shared by every pipeline stage.
//!
//! The enum is deliberately non-generic: variants that carry measured values
//! store them as `f64` (converted from the working scalar at the error site)
//! so that error handling and matching never depend on the caller's scalar
//! choice.

use thiserror::Error;

/// Convenient result alias used throughout the crate.
pub type Result<T> = core::result::Result<T, Error>;

/// Identifies one model of the fitted family in error messages.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    /// Steady-state latency vs. checkpoint interval.
    Perf,
    /// Best-case recovery time vs. checkpoint interval.
    AvailMin,
    /// Average-case recovery time vs. checkpoint interval.
    AvailAvg,
    /// Worst-case recovery time vs. checkpoint interval.
    AvailMax,
}

impl core::fmt::Display for ModelKind {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        let name = match self {
            ModelKind::Perf => "p",
            ModelKind::AvailMin => "a_min",
            ModelKind::AvailAvg => "a_avg",
            ModelKind::AvailMax => "a_max",
        };
        f.write_str(name)
    }
}

/// All failure modes of the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    /// A structurally invalid argument (empty grid, inverted range, negative
    /// duration, and so on). The message names the offending field.
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// Average ingress meets or exceeds peak throughput: the backlog can
    /// never drain and the catch-up series diverges. Carries the run index
    /// when raised while deriving points from a profiling dataset.
    #[error(
        "over-utilized: i_avg {i_avg_eps} events/s >= i_max {i_max_eps} events/s{}",
        .run_index.map(|i| format!(" (run {i})")).unwrap_or_default()
    )]
    OverUtilized {
        /// Measured average ingress rate, events per second.
        i_avg_eps: f64,
        /// Measured peak processing rate, events per second.
        i_max_eps: f64,
        /// Index of the offending profiling run, if any.
        run_index: Option<usize>,
    },

    /// A dataset row failed validation. `row` is 1-based and counts data
    /// rows (the CSV header is row 0 in that sense).
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },

    /// The file could not be parsed at all (malformed CSV/JSON, wrong
    /// header, unknown format).
    #[error("malformed input: {0}")]
    Parse(String),

    /// Fewer data points than the fit or dataset requires.
    #[error("need at least {needed} points, got {got}")]
    InsufficientData { needed: usize, got: usize },

    /// Two training points share the same x value; a function fit is
    /// ill-posed.
    #[error("duplicate x value {value}")]
    DuplicateX { value: f64 },

    /// The response has zero variance but the fit still has residual error,
    /// so the coefficient of determination is undefined.
    #[error("zero variance in y with nonzero residual; r_squared is undefined")]
    ZeroVariance,

    /// A model of the family failed to fit; wraps the underlying cause.
    #[error("{model} model: {source}")]
    ModelFit {
        model: ModelKind,
        #[source]
        source: Box<Error>,
    },

    /// No checkpoint interval can meet the recovery-time bound: the
    /// availability curve never reaches the target.
    #[error("infeasible: predicted recovery time never reaches {target_ms} ms")]
    Infeasible { target_ms: f64 },

    /// The bound is met only outside the profiled interval range, where the
    /// model is extrapolating.
    #[error(
        "no in-domain solution: nearest root {nearest_root_ms} ms lies outside \
         [{domain_lo_ms}, {domain_hi_ms}] ms"
    )]
    OutOfDomain {
        nearest_root_ms: f64,
        domain_lo_ms: f64,
        domain_hi_ms: f64,
    },

    /// The failure plan is unusable: an injection lies outside the run, the
    /// times are not strictly increasing, or a failure would hit a pipeline
    /// that is still recovering from the previous one.
    #[error("invalid failure spec: {0}")]
    InvalidFailureSpec(String),

    /// The run ended while a recovery was still draining backlog, so its
    /// recovery time is undefined.
    #[error("recovery incomplete at end of run (failure at {failure_at_ms} ms)")]
    NotCaughtUp { failure_at_ms: f64 },

    /// An underlying I/O failure while reading or writing artifacts.
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

//! Deterministic fluid simulator of a checkpointed stream-processing job
//! under failure injection.
//!
//! The simulator advances in 1 ms ticks and treats events as a fluid
//! (fractional events per tick) rather than simulating them individually, so
//! half-million-events-per-second workloads cost nothing extra. Per tick it:
//!
//! 1. applies phase transitions (detection elapsed, restore finished,
//!    warm-up ramp complete);
//! 2. completes a checkpoint when one is due (healthy mode only), recording
//!    the processed offset;
//! 3. triggers a scheduled failure: processing rolls back to the last
//!    checkpoint offset (events since then must be reprocessed) and the
//!    pipeline goes down for the detection timeout plus the restore time;
//! 4. produces ingress at the average rate, optionally jittered by a
//!    uniform multiplicative factor;
//! 5. serves: healthy mode processes demand up to the peak rate and samples
//!    a steady-state latency `L0 + beta / ci (+ noise)`; after a restore the
//!    service capacity ramps linearly from zero to the peak rate over the
//!    warm-up window (midpoint rule per tick) and then holds peak rate until
//!    the backlog drains, at which point the recovery time is recorded and
//!    the mode returns to healthy ("equalize").
//!
//! Everything is driven by one seeded stream: generated failure offsets are
//! drawn first (one draw per failure, in schedule order), then the per-tick
//! jitter/noise draws follow; a configuration with zero jitter and zero
//! noise consumes no per-tick randomness at all. Identical config + failure
//! spec + seed therefore reproduce bit-identical outcomes.

use std::io;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::{from_f64, from_u64, to_f64, Float};
use crate::modeling::{predict, ModelFamily};
use crate::optimizer::Recommendation;
use crate::profiling::{ProfilingDataset, ProfilingRunMetrics};
use crate::rng::Stream;

// ============================================================================
// Seeds
// ============================================================================

/// Stream tag for seeds of profiling-grid runs.
pub const PROFILE_STREAM: u64 = 0x5052_4f46_494c_4530; // "PROFILE0"
/// Stream tag for seeds of validation trials.
pub const VALIDATE_STREAM: u64 = 0x5641_4c49_4441_5445; // "VALIDATE"

/// SplitMix64 finalizer: the fixed 64-bit mix used for seed derivation.
#[must_use]
pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Derives the seed for run `index` of a named stream from a base seed.
///
/// The derivation is `splitmix64(base ^ splitmix64(stream ^ splitmix64(index)))`,
/// fixed and documented so that datasets are reproducible for a given
/// implementation; fixtures are still committed rather than re-derived,
/// because reproducibility across *implementations* ends at the RNG.
#[must_use]
pub fn derive_seed(base_seed: u64, stream: u64, index: u64) -> u64 {
    splitmix64(base_seed ^ splitmix64(stream ^ splitmix64(index)))
}

// ============================================================================
// Configuration
// ============================================================================

/// Full physical configuration of one simulated run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig<F> {
    /// Mean ingress rate, events per second.
    pub i_avg_eps: F,
    /// Half-width of the uniform multiplicative ingress noise, as a
    /// fraction of the mean (0 disables jitter; at most 1 so the ingress
    /// rate never goes negative).
    pub ingress_jitter: F,
    /// Peak processing rate, events per second.
    pub i_max_eps: F,
    /// Checkpoint interval, milliseconds.
    pub ci_ms: F,
    /// Failure-detection (heartbeat) timeout, milliseconds.
    pub timeout_ms: F,
    /// Checkpoint-restore duration, milliseconds.
    pub restore_ms: F,
    /// Warm-up ramp length after restore, milliseconds.
    pub warmup_ms: F,
    /// Baseline steady-state latency L0, milliseconds.
    pub base_latency_ms: F,
    /// Checkpoint-overhead coefficient beta in `L = L0 + beta / ci`,
    /// with beta in ms^2.
    pub overhead_coeff: F,
    /// Half-width of the uniform additive latency noise, milliseconds.
    pub latency_noise_ms: F,
    /// Total simulated time, milliseconds (the run is `floor(duration_ms)`
    /// one-millisecond ticks).
    pub duration_ms: F,
    /// Base seed for the run's random stream.
    pub seed: u64,
}

impl<F: Float> SimConfig<F> {
    /// Checks the configuration invariants.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidInput`] naming the offending field, or
    /// [`Error::OverUtilized`] when `i_avg_eps >= i_max_eps` (the backlog
    /// could never drain after a failure).
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("i_max_eps", self.i_max_eps),
            ("ci_ms", self.ci_ms),
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
            ("restore_ms", self.restore_ms),
            ("warmup_ms", self.warmup_ms),
            ("base_latency_ms", self.base_latency_ms),
            ("overhead_coeff", self.overhead_coeff),
            ("latency_noise_ms", self.latency_noise_ms),
        ] {
            if !(value >= F::zero() && value.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be non-negative and finite, got {value}"
                )));
            }
        }
        if !(self.ingress_jitter >= F::zero() && self.ingress_jitter <= F::one()) {
            return Err(Error::InvalidInput(format!(
                "ingress_jitter must lie in [0, 1], got {}",
                self.ingress_jitter
            )));
        }
        if !(self.duration_ms >= F::one() && self.duration_ms.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "duration_ms must be at least 1, got {}",
                self.duration_ms
            )));
        }
        if self.i_avg_eps >= self.i_max_eps {
            return Err(Error::OverUtilized {
                i_avg_eps: to_f64(self.i_avg_eps),
                i_max_eps: to_f64(self.i_max_eps),
                run_index: None,
            });
        }
        Ok(())
    }
}

/// How failures are scheduled within a run.
///
/// Accepted as JSON in either of two shapes: explicit injections
/// (`{"injections": [{"at_ms": 50000.0}]}`) or a generated schedule
/// (`{"count": 3, "spacing": "uniform_random"}`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum FailureSpec<F> {
    /// Failures at explicit simulated timestamps.
    Explicit {
        /// The injection times; must be strictly increasing and inside
        /// `[0, duration_ms)`.
        injections: Vec<Injection<F>>,
    },
    /// `count` failures at generated instants: anchor `k` sits at
    /// `duration * (k+1) / (count+1)`; equal spacing uses the anchors
    /// directly, while uniform-random placement re-draws each failure
    /// uniformly within the checkpoint cycle containing its anchor.
    Generated {
        /// Number of failures to inject.
        count: u32,
        /// How the instants are placed around the anchors.
        spacing: Spacing,
    },
}

/// One explicit failure injection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Injection<F> {
    /// Simulated time of the failure, milliseconds.
    pub at_ms: F,
}

/// Placement rule for generated failure schedules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// Uniform within the checkpoint cycle containing each anchor — failure
    /// instants are unpredictable in practice, so this is the default used
    /// by profiling and validation.
    UniformRandom,
    /// Exactly at the evenly spaced anchors.
    EquallySpaced,
}

impl<F: Float> FailureSpec<F> {
    /// No failures at all.
    #[must_use]
    pub fn none() -> Self {
        FailureSpec::Explicit {
            injections: Vec::new(),
        }
    }
}

// ============================================================================
// Outcome
// ============================================================================

/// Phase-transition labels recorded in the event log.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    /// A checkpoint completed and its offset was recorded.
    Checkpoint,
    /// A failure was injected.
    Fail,
    /// The heartbeat timeout elapsed; the failure is detected.
    Detect,
    /// State restore finished; processing capacity starts ramping.
    Restore,
    /// The warm-up ramp reached peak rate; pure catch-up begins.
    Maximize,
    /// The backlog drained; steady state resumes.
    Equalize,
}

/// One timestamped phase transition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PhaseEvent {
    /// Simulated time of the transition, milliseconds.
    pub t_ms: u64,
    /// What happened.
    pub phase: Phase,
}

/// Everything measured from one simulated run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Serialize",
    deserialize = "F: serde::de::DeserializeOwned + Default"
))]
pub struct SimOutcome<F> {
    /// Steady-state latency: the mean of the smallest 99.9% of per-tick
    /// latency samples taken while healthy (the filter drops transient
    /// spikes the way a trimmed production metric would).
    pub measured_l_avg_ms: F,
    /// One recovery time per injected failure, milliseconds: failure
    /// instant to the tick boundary where the backlog reached zero.
    pub measured_trt_ms: Vec<F>,
    /// Mean observed restore duration (detect-to-restore gap),
    /// milliseconds; the configured value when no failure occurred.
    pub measured_r_avg_ms: F,
    /// Warm-up duration, milliseconds. The ramp is part of the fluid model,
    /// so this reports the configured window (operational definition).
    pub measured_w_avg_ms: F,
    /// Observed mean ingress rate, events per second.
    pub measured_i_avg_eps: F,
    /// Observed peak processing rate, events per second: the largest
    /// capacity-limited service rate during full-rate catch-up; the
    /// configured value when no such tick occurred.
    pub measured_i_max_eps: F,
    /// Ordered phase transitions.
    pub event_log: Vec<PhaseEvent>,
    /// Total events produced (accounting field, not serialized).
    #[serde(skip)]
    pub produced_events: F,
    /// Total events processed (accounting field, not serialized).
    #[serde(skip)]
    pub processed_events: F,
    /// End-of-run backlog, `produced - processed` (accounting field, not
    /// serialized).
    #[serde(skip)]
    pub backlog_events: F,
}

/// Writes an event log as CSV with the exact header `t_ms,phase`.
///
/// # Errors
///
/// [`Error::Io`] for sink failures.
pub fn write_event_log<W: io::Write>(events: &[PhaseEvent], sink: W) -> Result<()> {
    let mut writer = csv::Writer::from_writer(sink);
    for event in events {
        writer
            .serialize(event)
            .map_err(|e| Error::Io(io::Error::other(e)))?;
    }
    writer.flush()?;
    Ok(())
}

// ============================================================================
// The run itself
// ============================================================================

#[derive(Debug, Clone, Copy, PartialEq)]
enum Mode {
    Normal,
    Down { detect_tick: u64, resume_tick: u64 },
    Ramp { ramp_start: u64 },
    Catchup,
}

/// Simulates one run.
///
/// See the module documentation for the tick semantics. The run fails fast
/// on invalid configs and failure plans, errs on a failure injected while a
/// previous recovery is still in progress, and errs if the final recovery
/// has not drained the backlog by the end of the run.
///
/// # Errors
///
/// - [`Error::InvalidInput`] / [`Error::OverUtilized`] from
///   [`SimConfig::validate`];
/// - [`Error::InvalidFailureSpec`] for out-of-range, unordered or
///   recovery-overlapping failures;
/// - [`Error::NotCaughtUp`] when the run ends mid-recovery.
pub fn run<F: Float>(cfg: &SimConfig<F>, failures: &FailureSpec<F>) -> Result<SimOutcome<F>> {
    cfg.validate()?;
    let mut rng = Stream::new(cfg.seed);
    let failure_ticks = resolve_failures(cfg, failures, &mut rng)?;

    let ticks = to_f64(cfg.duration_ms).floor() as u64;
    let i_avg_pms = to_f64(cfg.i_avg_eps) / 1000.0; // events per ms
    let i_max_pms = to_f64(cfg.i_max_eps) / 1000.0;
    let jitter = to_f64(cfg.ingress_jitter);
    let noise = to_f64(cfg.latency_noise_ms);
    let ci = to_f64(cfg.ci_ms);
    let warmup = to_f64(cfg.warmup_ms);
    let warm_ticks = warmup.ceil() as u64;
    let timeout_ticks = to_f64(cfg.timeout_ms).ceil() as u64;
    let restore_ticks = to_f64(cfg.restore_ms).ceil() as u64;
    let latency_const = to_f64(cfg.base_latency_ms) + to_f64(cfg.overhead_coeff) / ci;

    let mut produced = 0.0_f64;
    let mut processed = 0.0_f64;
    let mut checkpoint_offset = 0.0_f64;
    let mut next_checkpoint = ci;
    let mut mode = Mode::Normal;
    let mut fail_tick = 0_u64;
    let mut next_failure = 0_usize;
    let mut latencies: Vec<f64> = Vec::new();
    let mut trts: Vec<F> = Vec::new();
    let mut restore_gaps: Vec<f64> = Vec::new();
    let mut max_serve_pms = 0.0_f64;
    let mut saw_full_rate = false;
    let mut events: Vec<PhaseEvent> = Vec::new();

    for t in 0..ticks {
        // --- (1) phase transitions due at this tick ---------------------
        if let Mode::Down {
            detect_tick,
            resume_tick,
        } = mode
        {
            if t == detect_tick {
                events.push(PhaseEvent {
                    t_ms: t,
                    phase: Phase::Detect,
                });
            }
            if t == resume_tick {
                events.push(PhaseEvent {
                    t_ms: t,
                    phase: Phase::Restore,
                });
                restore_gaps.push((resume_tick - detect_tick) as f64);
                if warm_ticks > 0 {
                    mode = Mode::Ramp { ramp_start: t };
                } else {
                    mode = Mode::Catchup;
                    events.push(PhaseEvent {
                        t_ms: t,
                        phase: Phase::Maximize,
                    });
                }
            }
        }
        if let Mode::Ramp { ramp_start } = mode {
            if t - ramp_start >= warm_ticks {
                mode = Mode::Catchup;
                events.push(PhaseEvent {
                    t_ms: t,
                    phase: Phase::Maximize,
                });
            }
        }

        // --- (2) checkpoint completions (healthy mode only) -------------
        let t_now = t as f64;
        if t_now >= next_checkpoint {
            let mut completed = false;
            while t_now >= next_checkpoint {
                if mode == Mode::Normal {
                    completed = true;
                }
                next_checkpoint += ci;
            }
            if completed {
                checkpoint_offset = processed;
                events.push(PhaseEvent {
                    t_ms: t,
                    phase: Phase::Checkpoint,
                });
            }
        }

        // --- (3) failure injection --------------------------------------
        while next_failure < failure_ticks.len() && failure_ticks[next_failure] == t {
            if mode != Mode::Normal {
                return Err(Error::InvalidFailureSpec(format!(
                    "failure at {t} ms overlaps the recovery of the failure at {fail_tick} ms"
                )));
            }
            // Roll back to the checkpoint: everything after it must be
            // reprocessed.
            processed = checkpoint_offset;
            mode = Mode::Down {
                detect_tick: t + timeout_ticks,
                resume_tick: t + timeout_ticks + restore_ticks,
            };
            fail_tick = t;
            events.push(PhaseEvent {
                t_ms: t,
                phase: Phase::Fail,
            });
            next_failure += 1;
        }

        // --- (4) ingress -------------------------------------------------
        let factor = if jitter > 0.0 {
            1.0 + jitter * rng.symmetric()
        } else {
            1.0
        };
        produced += i_avg_pms * factor;

        // --- (5) service ---------------------------------------------------
        match mode {
            Mode::Normal => {
                let demand = produced - processed;
                if demand <= i_max_pms {
                    processed = produced;
                } else {
                    processed += i_max_pms;
                }
                let sample = if noise > 0.0 {
                    latency_const + noise * rng.symmetric()
                } else {
                    latency_const
                };
                latencies.push(sample);
            }
            Mode::Down { .. } => {}
            Mode::Ramp { ramp_start } => {
                // Midpoint rule: tick k of the ramp serves at the rate the
                // linear ramp has halfway through the tick, so the ramp
                // integrates to exactly half the peak-rate window.
                let k = (t - ramp_start) as f64;
                let cap = i_max_pms * ((k + 0.5) / warmup).min(1.0);
                serve_recovering(
                    cap,
                    &mut produced,
                    &mut processed,
                    &mut mode,
                    t,
                    fail_tick,
                    &mut trts,
                    &mut events,
                );
            }
            Mode::Catchup => {
                let served_full = serve_recovering(
                    i_max_pms,
                    &mut produced,
                    &mut processed,
                    &mut mode,
                    t,
                    fail_tick,
                    &mut trts,
                    &mut events,
                );
                if served_full {
                    saw_full_rate = true;
                    max_serve_pms = max_serve_pms.max(i_max_pms);
                }
            }
        }
    }

    if mode != Mode::Normal {
        return Err(Error::NotCaughtUp {
            failure_at_ms: fail_tick as f64,
        });
    }

    let measured_l_avg_ms = filtered_mean(&mut latencies);
    let measured_i_avg_eps = produced * 1000.0 / ticks as f64;
    let measured_i_max_eps = if saw_full_rate {
        max_serve_pms * 1000.0
    } else {
        to_f64(cfg.i_max_eps)
    };
    let measured_r_avg_ms = if restore_gaps.is_empty() {
        to_f64(cfg.restore_ms)
    } else {
        restore_gaps.iter().sum::<f64>() / restore_gaps.len() as f64
    };

    let backlog = produced - processed;
    Ok(SimOutcome {
        measured_l_avg_ms: from_f64(measured_l_avg_ms),
        measured_trt_ms: trts,
        measured_r_avg_ms: from_f64(measured_r_avg_ms),
        measured_w_avg_ms: cfg.warmup_ms,
        measured_i_avg_eps: from_f64(measured_i_avg_eps),
        measured_i_max_eps: from_f64(measured_i_max_eps),
        event_log: events,
        produced_events: from_f64(produced),
        processed_events: from_f64(processed),
        backlog_events: from_f64(backlog),
    })
}

/// Serves one recovering tick at capacity `cap`; on drain, records TRT and
/// flips back to healthy mode. Returns whether the tick was
/// capacity-limited (served the full `cap` without draining).
#[allow(clippy::too_many_arguments)]
fn serve_recovering<F: Float>(
    cap: f64,
    produced: &mut f64,
    processed: &mut f64,
    mode: &mut Mode,
    t: u64,
    fail_tick: u64,
    trts: &mut Vec<F>,
    events: &mut Vec<PhaseEvent>,
) -> bool {
    let demand = *produced - *processed;
    if demand <= cap {
        *processed = *produced;
        trts.push(from_u64::<F>(t + 1 - fail_tick));
        events.push(PhaseEvent {
            t_ms: t + 1,
            phase: Phase::Equalize,
        });
        *mode = Mode::Normal;
        false
    } else {
        *processed += cap;
        true
    }
}

/// Mean of the smallest `ceil(0.999 n)` samples (drops the extreme top
/// tail). Returns 0 for an empty slice.
fn filtered_mean(samples: &mut [f64]) -> f64 {
    if samples.is_empty() {
        return 0.0;
    }
    let keep = ((samples.len() as f64) * 0.999).ceil() as usize;
    let keep = keep.clamp(1, samples.len());
    samples.select_nth_unstable_by(keep - 1, |a, b| {
        a.partial_cmp(b).expect("latency samples are finite")
    });
    samples[..keep].iter().sum::<f64>() / keep as f64
}

/// Resolves a failure spec into sorted failure ticks, drawing generated
/// offsets from the run's stream (before any tick-level draw).
fn resolve_failures<F: Float>(
    cfg: &SimConfig<F>,
    failures: &FailureSpec<F>,
    rng: &mut Stream,
) -> Result<Vec<u64>> {
    let duration = to_f64(cfg.duration_ms);
    let ci = to_f64(cfg.ci_ms);
    let times: Vec<f64> = match failures {
        FailureSpec::Explicit { injections } => {
            injections.iter().map(|i| to_f64(i.at_ms)).collect()
        }
        FailureSpec::Generated { count, spacing } => {
            let count = *count as usize;
            let mut times = Vec::with_capacity(count);
            for k in 0..count {
                let anchor = duration * (k + 1) as f64 / (count + 1) as f64;
                let at = match spacing {
                    Spacing::EquallySpaced => anchor,
                    Spacing::UniformRandom => {
                        let cycle_start = (anchor / ci).floor() * ci;
                        cycle_start + rng.u01() * ci
                    }
                };
                times.push(at);
            }
            times
        }
    };

    for &at in &times {
        if !at.is_finite() || at < 0.0 || at >= duration {
            return Err(Error::InvalidFailureSpec(format!(
                "failure time {at} ms outside [0, {duration}) ms"
            )));
        }
    }
    for pair in times.windows(2) {
        if !(pair[1] > pair[0]) {
            return Err(Error::InvalidFailureSpec(format!(
                "failure times must be strictly increasing, got {} then {}",
                pair[0], pair[1]
            )));
        }
    }
    Ok(times.into_iter().map(|at| at.floor() as u64).collect())
}

// ============================================================================
// Grid profiling
// ============================================================================

/// Runs `repeats` simulations per grid interval and condenses them into a
/// profiling dataset (element-wise medians; `timeout_ms` copied from
/// `base`). Returns the raw outcomes as well, in grid-major, repeat-minor
/// order, for validation plots.
///
/// Run `r` of grid index `i` uses the derived seed
/// `derive_seed(base.seed, PROFILE_STREAM, i * repeats + r)` and injects
/// `failures_per_run` uniform-random failures.
///
/// # Errors
///
/// - [`Error::InvalidInput`] for an empty or non-increasing grid or
///   `repeats = 0`, and for grids shorter than the three rows a dataset
///   requires;
/// - any run error, propagated.
pub fn profile_grid<F: Float>(
    base: &SimConfig<F>,
    grid: &[F],
    failures_per_run: u32,
    repeats: u32,
) -> Result<(ProfilingDataset<F>, Vec<SimOutcome<F>>)> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("grid must be non-empty".to_owned()));
    }
    if grid.windows(2).any(|pair| !(pair[1] > pair[0])) {
        return Err(Error::InvalidInput(
            "grid intervals must be strictly increasing".to_owned(),
        ));
    }
    if repeats == 0 {
        return Err(Error::InvalidInput(
            "repeats must be at least 1".to_owned(),
        ));
    }

    let failure_spec = FailureSpec::Generated {
        count: failures_per_run,
        spacing: Spacing::UniformRandom,
    };
    let mut outcomes = Vec::with_capacity(grid.len() * repeats as usize);
    let mut rows = Vec::with_capacity(grid.len());
    for (i, &ci_ms) in grid.iter().enumerate() {
        let mut i_avg = Vec::with_capacity(repeats as usize);
        let mut i_max = Vec::with_capacity(repeats as usize);
        let mut l_avg = Vec::with_capacity(repeats as usize);
        let mut r_avg = Vec::with_capacity(repeats as usize);
        let mut w_avg = Vec::with_capacity(repeats as usize);
        for r in 0..repeats {
            let mut cfg = *base;
            cfg.ci_ms = ci_ms;
            cfg.seed = derive_seed(
                base.seed,
                PROFILE_STREAM,
                i as u64 * u64::from(repeats) + u64::from(r),
            );
            let outcome = run(&cfg, &failure_spec)?;
            i_avg.push(outcome.measured_i_avg_eps);
            i_max.push(outcome.measured_i_max_eps);
            l_avg.push(outcome.measured_l_avg_ms);
            r_avg.push(outcome.measured_r_avg_ms);
            w_avg.push(outcome.measured_w_avg_ms);
            outcomes.push(outcome);
        }
        rows.push(ProfilingRunMetrics {
            ci_ms,
            i_avg_eps: median(&mut i_avg),
            i_max_eps: median(&mut i_max),
            l_avg_ms: median(&mut l_avg),
            r_avg_ms: median(&mut r_avg),
            w_avg_ms: median(&mut w_avg),
            timeout_ms: base.timeout_ms,
        });
    }
    Ok((ProfilingDataset::new(rows)?, outcomes))
}

/// Median of a non-empty slice (mean of the middle pair for even lengths).
/// The slice is sorted in place.
///
/// # Panics
///
/// Panics on an empty slice.
pub fn median<F: Float>(values: &mut [F]) -> F {
    assert!(!values.is_empty(), "median of an empty slice");
    values.sort_unstable_by(|a, b| a.partial_cmp(b).expect("comparable values"));
    let mid = values.len() / 2;
    if values.len() % 2 == 1 {
        values[mid]
    } else {
        (values[mid - 1] + values[mid]) / from_f64::<F>(2.0)
    }
}

// ============================================================================
// Validation trials
// ============================================================================

/// One validation trial's measurements.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationTrial<F> {
    /// 1-based trial number.
    pub trial: u32,
    /// Measured recovery time, milliseconds.
    pub measured_trt_ms: F,
    /// Whether the constraint held: `c_trt_ms > measured_trt_ms`.
    pub constraint_satisfied: bool,
    /// Measured steady-state latency, milliseconds.
    pub measured_l_avg_ms: F,
    /// `|measured - predicted| / predicted * 100` for the latency.
    pub percent_error: F,
}

/// The outcome of replaying a recommendation under failure injection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValidationReport<F> {
    /// The interval the trials ran at (the recommendation's).
    pub ci_ms: F,
    /// The bound the trials were checked against.
    pub c_trt_ms: F,
    /// The latency the performance model predicts at `ci_ms`.
    pub predicted_l_avg_ms: F,
    /// Per-trial measurements.
    pub trials: Vec<ValidationTrial<F>>,
}

/// Replays a recommendation: `trials` runs at `rec.ci_ms`, each with one
/// failure placed uniformly within a checkpoint cycle, reporting measured
/// recovery time, bound satisfaction, measured latency and its percent
/// error against the model prediction.
///
/// Trial `k` (0-based) uses the derived seed
/// `derive_seed(base.seed, VALIDATE_STREAM, k)`. The predicted latency is
/// re-evaluated from `family.perf` at `rec.ci_ms` (identical to
/// `rec.predicted_l_avg_ms` when the recommendation came from `family`).
///
/// # Errors
///
/// Any run error, propagated.
pub fn validate<F: Float>(
    family: &ModelFamily<F>,
    rec: &Recommendation<F>,
    base: &SimConfig<F>,
    trials: u32,
) -> Result<ValidationReport<F>> {
    let predicted_l_avg_ms = predict(&family.perf, rec.ci_ms).value;
    let failure_spec = FailureSpec::Generated {
        count: 1,
        spacing: Spacing::UniformRandom,
    };
    let hundred = from_f64::<F>(100.0);
    let mut rows = Vec::with_capacity(trials as usize);
    for k in 0..trials {
        let mut cfg = *base;
        cfg.ci_ms = rec.ci_ms;
        cfg.seed = derive_seed(base.seed, VALIDATE_STREAM, u64::from(k));
        let outcome = run(&cfg, &failure_spec)?;
        let measured_trt_ms = outcome.measured_trt_ms[0];
        let measured_l_avg_ms = outcome.measured_l_avg_ms;
        let percent_error =
            ((measured_l_avg_ms - predicted_l_avg_ms) / predicted_l_avg_ms).abs() * hundred;
        rows.push(ValidationTrial {
            trial: k + 1,
            measured_trt_ms,
            constraint_satisfied: rec.c_trt_ms > measured_trt_ms,
            measured_l_avg_ms,
            percent_error,
        });
    }
    Ok(ValidationReport {
        ci_ms: rec.ci_ms,
        c_trt_ms: rec.c_trt_ms,
        predicted_l_avg_ms,
        trials: rows,
    })
}

// ============================================================================
// Tests
// ============================================================================

//! Chiron: checkpoint-interval profiling, modeling, and optimization for
//! stream-processing pipelines that recover through checkpoint restore.
//!
//! Checkpointing trades steady-state latency against recovery speed: frequent
//! checkpoints add coordination overhead while the pipeline is healthy, but
//! shorten the replay needed after a failure. This crate automates the
//! trade-off end to end:
//!
//! 1. [`sim`] — a deterministic fluid simulator of a checkpointed pipeline
//!    under failure injection, standing in for cluster experiments;
//! 2. [`profiling`] — grid sweeps over the checkpoint interval that condense
//!    simulated runs into per-interval metrics, plus dataset (de)serialization;
//! 3. [`trt`] — a closed-form recovery-time estimate built from the measured
//!    metrics (geometric catch-up series over the utilization);
//! 4. [`modeling`] — least-squares quadratics fitting latency and recovery
//!    time as functions of the checkpoint interval;
//! 5. [`optimizer`] — inversion of the fitted curves to recommend the largest
//!    checkpoint interval that still meets a recovery-time bound.
//!
//! All numerics are generic over the scalar ([`Float`], implemented for
//! `f32` and `f64`); the `*64` aliases below fix the common `f64` choice.

pub mod error;
mod float;
pub mod modeling;
pub mod optimizer;
pub mod profiling;
mod rng;
pub mod sim;
pub mod trt;

#[cfg(test)]
mod testutil;

pub use error::{Error, ModelKind, Result};
pub use float::Float;

// ============================================================================
// Concrete f64 aliases for the public types
// ============================================================================

/// [`trt::Utilization`] over `f64`.
pub type Utilization64 = trt::Utilization<f64>;
/// [`trt::RecoveryPhases`] over `f64`.
pub type RecoveryPhases64 = trt::RecoveryPhases<f64>;
/// [`trt::TrtEstimate`] over `f64`.
pub type TrtEstimate64 = trt::TrtEstimate<f64>;
/// [`profiling::ProfilingRunMetrics`] over `f64`.
pub type ProfilingRunMetrics64 = profiling::ProfilingRunMetrics<f64>;
/// [`profiling::ProfilingDataset`] over `f64`.
pub type ProfilingDataset64 = profiling::ProfilingDataset<f64>;
/// [`profiling::GridSpec`] over `f64`.
pub type GridSpec64 = profiling::GridSpec<f64>;
/// [`profiling::TrtDataPoint`] over `f64`.
pub type TrtDataPoint64 = profiling::TrtDataPoint<f64>;
/// [`modeling::PolyModel`] over `f64`.
pub type PolyModel64 = modeling::PolyModel<f64>;
/// [`modeling::ModelFamily`] over `f64`.
pub type ModelFamily64 = modeling::ModelFamily<f64>;
/// [`modeling::Prediction`] over `f64`.
pub type Prediction64 = modeling::Prediction<f64>;
/// [`optimizer::QosConstraint`] over `f64`.
pub type QosConstraint64 = optimizer::QosConstraint<f64>;
/// [`optimizer::Recommendation`] over `f64`.
pub type Recommendation64 = optimizer::Recommendation<f64>;
/// [`optimizer::RecommendationReport`] over `f64`.
pub type RecommendationReport64 = optimizer::RecommendationReport<f64>;
/// [`sim::SimConfig`] over `f64`.
pub type SimConfig64 = sim::SimConfig<f64>;
/// [`sim::FailureSpec`] over `f64`.
pub type FailureSpec64 = sim::FailureSpec<f64>;
/// [`sim::SimOutcome`] over `f64`.
pub type SimOutcome64 = sim::SimOutcome<f64>;
/// [`sim::ValidationReport`] over `f64`.
pub type ValidationReport64 = sim::ValidationReport<f64>;

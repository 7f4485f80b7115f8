//! Closed-form recovery-time estimation.
//!
//! After a failure, a checkpoint-restore pipeline is unavailable while it
//! detects the failure (timeout T), restores the last checkpoint (R), warms
//! its processing rate back up (W), and reprocesses the events that arrived
//! after that checkpoint (E, between zero and one checkpoint interval). The
//! base duration of that outage is D = E + T + R + W milliseconds.
//!
//! While the pipeline replays and catches up it runs at peak rate, but new
//! events keep arriving at the average rate, so each catch-up round leaves a
//! residue proportional to the utilization U = i_avg / i_max:
//!
//! ```text
//! a_1 = D,    a_k = D * U^(k-1),
//! S_n = a_1 + ... + a_n = D * (1 - U^n) / (1 - U)      (S_n = D when U = 0)
//! ```
//!
//! The series is truncated at the first round shorter than one millisecond;
//! rounds below the tick resolution are noise, not signal. The time to
//! recover, counted from the failure instant, is then
//!
//! ```text
//! TRT = T + R + S_n
//! ```
//!
//! (T and R are explicit; E and W are already inside every `a_k` via D).
//! Because E depends on where in the checkpoint cycle the failure lands, the
//! estimate is reported for the best case (E = 0, failure right after a
//! checkpoint), the average case (E = CI/2) and the worst case (E = CI).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::{from_f64, to_f64, Float};

// ============================================================================
// Utilization
// ============================================================================

/// Ratio of average ingress to peak processing rate, guaranteed in [0, 1).
///
/// The upper bound is strict: at U >= 1 the backlog never drains and no
/// recovery time exists. Construct via [`Utilization::new`] (raw ratio) or
/// [`utilization`] (from the two rates).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Utilization<F>(F);

impl<F: Float> Utilization<F> {
    /// Wraps a ratio, rejecting values outside [0, 1) and NaN.
    pub fn new(value: F) -> Result<Self> {
        if !(value >= F::zero() && value < F::one()) {
            return Err(Error::InvalidInput(format!(
                "utilization must lie in [0, 1), got {value}"
            )));
        }
        Ok(Self(value))
    }

    /// The wrapped ratio.
    #[must_use]
    pub fn value(self) -> F {
        self.0
    }
}

/// Computes U = i_avg / i_max from measured rates.
///
/// # Errors
///
/// - [`Error::InvalidInput`] if `i_max_eps <= 0` or `i_avg_eps < 0` (or
///   either is NaN);
/// - [`Error::OverUtilized`] if `i_avg_eps >= i_max_eps`, in which case the
///   pipeline can never catch up after an outage.
pub fn utilization<F: Float>(i_avg_eps: F, i_max_eps: F) -> Result<Utilization<F>> {
    if !(i_max_eps > F::zero()) {
        return Err(Error::InvalidInput(format!(
            "i_max_eps must be positive, got {i_max_eps}"
        )));
    }
    if !(i_avg_eps >= F::zero()) {
        return Err(Error::InvalidInput(format!(
            "i_avg_eps must be non-negative, got {i_avg_eps}"
        )));
    }
    if i_avg_eps >= i_max_eps {
        return Err(Error::OverUtilized {
            i_avg_eps: to_f64(i_avg_eps),
            i_max_eps: to_f64(i_max_eps),
            run_index: None,
        });
    }
    Utilization::new(i_avg_eps / i_max_eps)
}

// ============================================================================
// Recovery phases
// ============================================================================

/// The four phase durations that make up a recovery outage.
///
/// Invariants: `timeout_ms > 0`; the other three are non-negative and all
/// four are finite. The base duration D = E + T + R + W is exposed through
/// [`RecoveryPhases::base_duration_ms`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecoveryPhases<F> {
    reprocess_ms: F,
    timeout_ms: F,
    recovery_ms: F,
    warmup_ms: F,
}

impl<F: Float> RecoveryPhases<F> {
    /// Validates and bundles the phase durations.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidInput`] when `timeout_ms <= 0`, any duration is
    /// negative, or any is non-finite.
    pub fn new(reprocess_ms: F, timeout_ms: F, recovery_ms: F, warmup_ms: F) -> Result<Self> {
        if !(timeout_ms > F::zero() && timeout_ms.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "timeout_ms must be positive and finite, got {timeout_ms}"
            )));
        }
        for (name, value) in [
            ("reprocess_ms", reprocess_ms),
            ("recovery_ms", recovery_ms),
            ("warmup_ms", warmup_ms),
        ] {
            if !(value >= F::zero() && value.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be non-negative and finite, got {value}"
                )));
            }
        }
        Ok(Self {
            reprocess_ms,
            timeout_ms,
            recovery_ms,
            warmup_ms,
        })
    }

    /// Reprocessing span E: events since the last checkpoint, as time.
    #[must_use]
    pub fn reprocess_ms(&self) -> F {
        self.reprocess_ms
    }

    /// Failure-detection timeout T.
    #[must_use]
    pub fn timeout_ms(&self) -> F {
        self.timeout_ms
    }

    /// Checkpoint-restore duration R.
    #[must_use]
    pub fn recovery_ms(&self) -> F {
        self.recovery_ms
    }

    /// Warm-up duration W.
    #[must_use]
    pub fn warmup_ms(&self) -> F {
        self.warmup_ms
    }

    /// Base outage duration D = E + T + R + W.
    #[must_use]
    pub fn base_duration_ms(&self) -> F {
        self.reprocess_ms + self.timeout_ms + self.recovery_ms + self.warmup_ms
    }
}

// ============================================================================
// Series truncation and summation
// ============================================================================

/// Number of catch-up rounds before the per-round span drops below 1 ms.
///
/// Returns the smallest n >= 1 such that a_n = `base_ms` * U^(n-1) < 1 ms
/// fails to hold for n-1 but holds for n; i.e. the first index whose term is
/// strictly below one millisecond. When `base_ms` itself is below 1 ms the
/// answer is 1.
///
/// The count is found by the same iterative multiplication that defines the
/// series, so boundary terms that land exactly on 1.0 are classified by the
/// strict `<` comparison without any logarithm round-off. The loop runs
/// O(log(D) / -log(U)) iterations, which is instantaneous for utilizations
/// that arise from measured rates; only U pathologically close to 1 (within
/// ~1e-9) would make it slow.
#[must_use]
pub fn term_count<F: Float>(base_ms: F, u: Utilization<F>) -> u32 {
    let one = F::one();
    let mut term = base_ms;
    let mut n: u32 = 1;
    while term >= one {
        term = term * u.value();
        n += 1;
    }
    n.max(1)
}

/// Total catch-up time S_n = `base_ms` * (1 - U^n) / (1 - U).
///
/// `n` must be at least 1 (as produced by [`term_count`]). At U = 0 the sum
/// collapses to `base_ms` exactly, with no division performed. Exponents
/// beyond `i32::MAX` are saturated; any U < 1 raised to such a power
/// underflows to zero, so the saturation does not change the value.
#[must_use]
pub fn catchup_sum<F: Float>(base_ms: F, u: Utilization<F>, n: u32) -> F {
    debug_assert!(n >= 1, "catchup_sum needs at least one term");
    let u = u.value();
    if u == F::zero() {
        return base_ms;
    }
    let exponent = i32::try_from(n).unwrap_or(i32::MAX);
    let un = u.powi(exponent);
    base_ms * (F::one() - un) / (F::one() - u)
}

// ============================================================================
// The three-case estimate
// ============================================================================

/// Truncation depth used for each of the three estimate cases.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TermsUsed {
    /// Rounds summed for the best case (E = 0).
    pub n_min: u32,
    /// Rounds summed for the average case (E = CI/2).
    pub n_avg: u32,
    /// Rounds summed for the worst case (E = CI).
    pub n_max: u32,
}

/// Closed-form recovery-time estimate for the three failure positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrtEstimate<F> {
    /// Best case: the failure lands immediately after a checkpoint.
    pub trt_min_ms: F,
    /// Average case: the failure lands mid-cycle.
    pub trt_avg_ms: F,
    /// Worst case: the failure lands just before the next checkpoint.
    pub trt_max_ms: F,
    /// How many series terms each case summed.
    pub terms_used: TermsUsed,
}

/// Selects which case of a [`TrtEstimate`] downstream stages consume.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TrtCase {
    /// Best case, E = 0.
    Min,
    /// Average case, E = CI/2.
    Avg,
    /// Worst case, E = CI.
    Max,
}

impl TrtCase {
    /// Picks this case's value out of an estimate.
    #[must_use]
    pub fn pick<F: Float>(self, estimate: &TrtEstimate<F>) -> F {
        match self {
            TrtCase::Min => estimate.trt_min_ms,
            TrtCase::Avg => estimate.trt_avg_ms,
            TrtCase::Max => estimate.trt_max_ms,
        }
    }
}

/// Estimates recovery time at checkpoint interval `ci_ms` for the best,
/// average and worst failure position within the checkpoint cycle.
///
/// For each case the reprocessing span is E = 0, CI/2 and CI respectively;
/// the outage base is D = E + T + R + W, the catch-up series is truncated by
/// [`term_count`] and summed by [`catchup_sum`], and the reported value is
/// TRT = T + R + S_n.
///
/// # Errors
///
/// [`Error::InvalidInput`] when `ci_ms` is not positive and finite or any
/// phase duration is invalid (via [`RecoveryPhases::new`]). Over-utilized
/// rate pairs are rejected earlier, when the [`Utilization`] is built.
pub fn estimate_trt<F: Float>(
    ci_ms: F,
    timeout_ms: F,
    recovery_ms: F,
    warmup_ms: F,
    u: Utilization<F>,
) -> Result<TrtEstimate<F>> {
    if !(ci_ms > F::zero() && ci_ms.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "ci_ms must be positive and finite, got {ci_ms}"
        )));
    }
    let two = from_f64::<F>(2.0);
    let case = |reprocess_ms: F| -> Result<(F, u32)> {
        let phases = RecoveryPhases::new(reprocess_ms, timeout_ms, recovery_ms, warmup_ms)?;
        let base = phases.base_duration_ms();
        let n = term_count(base, u);
        let sum = catchup_sum(base, u, n);
        Ok((timeout_ms + recovery_ms + sum, n))
    };
    let (trt_min_ms, n_min) = case(F::zero())?;
    let (trt_avg_ms, n_avg) = case(ci_ms / two)?;
    let (trt_max_ms, n_max) = case(ci_ms)?;
    Ok(TrtEstimate {
        trt_min_ms,
        trt_avg_ms,
        trt_max_ms,
        terms_used: TermsUsed {
            n_min,
            n_avg,
            n_max,
        },
    })
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::{assert_close, U01};

    /// Relative tolerance for closed-form vs. reference comparisons.
    const REL: f64 = 1e-12;

    fn u(v: f64) -> Utilization<f64> {
        Utilization::new(v).unwrap()
    }

    /// Reference implementation: sums the series term by term with the same
    /// stopping rule as production (`a_1 = D`, `a_{k+1} = a_k * U`, stop at
    /// the first term below 1 ms, which is still included in the sum).
    fn iterative_catchup(base_ms: f64, util: f64) -> (f64, u32) {
        let mut sum = base_ms;
        let mut term = base_ms;
        let mut n: u32 = 1;
        while term >= 1.0 {
            term *= util;
            n += 1;
            sum += term;
        }
        (sum, n)
    }

    // ------------------------------------------------------------------
    // utilization and phase validation
    // ------------------------------------------------------------------

    #[test]
    fn utilization_divides_the_rates() {
        assert_eq!(utilization(1000.0, 2000.0).unwrap().value(), 0.5);
        assert_eq!(utilization(0.0, 2000.0).unwrap().value(), 0.0);
    }

    #[test]
    fn utilization_rejects_saturation_and_nonsense() {
        assert!(matches!(
            utilization(2000.0, 2000.0),
            Err(Error::OverUtilized {
                run_index: None,
                ..
            })
        ));
        assert!(matches!(
            utilization(3000.0, 2000.0),
            Err(Error::OverUtilized { .. })
        ));
        assert!(matches!(
            utilization(1000.0, 0.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            utilization(-1.0, 2000.0),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            utilization(f64::NAN, 2000.0),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn utilization_newtype_enforces_the_half_open_interval() {
        assert!(Utilization::new(0.0).is_ok());
        assert!(Utilization::new(0.999_999).is_ok());
        assert!(Utilization::new(1.0).is_err());
        assert!(Utilization::new(-0.1).is_err());
        assert!(Utilization::new(f64::NAN).is_err());
    }

    #[test]
    fn recovery_phases_validate_and_expose_base_duration() {
        let phases = RecoveryPhases::new(1000.0, 5000.0, 2000.0, 500.0).unwrap();
        assert_eq!(phases.base_duration_ms(), 8500.0);
        assert_eq!(phases.reprocess_ms(), 1000.0);
        assert_eq!(phases.timeout_ms(), 5000.0);
        assert_eq!(phases.recovery_ms(), 2000.0);
        assert_eq!(phases.warmup_ms(), 500.0);

        assert!(RecoveryPhases::new(0.0, 0.0, 1.0, 1.0).is_err());
        assert!(RecoveryPhases::new(-1.0, 5.0, 1.0, 1.0).is_err());
        assert!(RecoveryPhases::new(0.0, 5.0, -1.0, 1.0).is_err());
        assert!(RecoveryPhases::new(0.0, 5.0, 1.0, f64::INFINITY).is_err());
    }

    // ------------------------------------------------------------------
    // term_count
    // ------------------------------------------------------------------

    #[test]
    fn term_count_matches_worked_cases() {
        assert_eq!(term_count(120_000.0, u(0.5)), 18);
        assert_eq!(term_count(1000.0, u(0.1)), 5);
        assert_eq!(term_count(0.5, u(0.9)), 1);
    }

    #[test]
    fn term_count_boundary_and_degenerate_cases() {
        // A term landing exactly on 1.0 is not yet below 1 ms.
        assert_eq!(term_count(1.0, u(0.5)), 2);
        // U = 0: the second term is already zero.
        assert_eq!(term_count(25_000.0, u(0.0)), 2);
        assert_eq!(term_count(0.999, u(0.0)), 1);
    }

    // ------------------------------------------------------------------
    // catchup_sum
    // ------------------------------------------------------------------

    #[test]
    fn catchup_sum_matches_worked_cases() {
        assert_close(catchup_sum(1000.0, u(0.1), 5), 1111.1, REL);
        // All intermediates are dyadic at U = 0.5, so this one is exact.
        assert_eq!(catchup_sum(120_000.0, u(0.5), 18), 239_999.084_472_656_25);
    }

    #[test]
    fn catchup_sum_at_zero_utilization_is_the_base_duration() {
        assert_eq!(catchup_sum(25_000.0, u(0.0), 2), 25_000.0);
        assert_eq!(catchup_sum(0.25, u(0.0), 1), 0.25);
    }

    #[test]
    fn catchup_sum_matches_term_by_term_summation() {
        let mut rng = U01::new(0xC47C_0001);
        for _ in 0..500 {
            let base = 0.5 + rng.next() * 400_000.0;
            let util = rng.next() * 0.99;
            let n = term_count(base, u(util));
            let closed = catchup_sum(base, u(util), n);
            let (iter, n_iter) = iterative_catchup(base, util);
            assert_eq!(n, n_iter, "term counts diverged at base={base} u={util}");
            assert_close(closed, iter, 1e-9);
        }
    }

    // ------------------------------------------------------------------
    // estimate_trt
    // ------------------------------------------------------------------

    #[test]
    fn estimate_matches_the_worked_example() {
        // CI = 60 s, T = 10 s, R = 30 s, W = 20 s, U = 0.5.
        let est = estimate_trt(60_000.0, 10_000.0, 30_000.0, 20_000.0, u(0.5)).unwrap();
        assert_close(est.trt_min_ms, 159_999.084_472_656_25, REL);
        assert_close(est.trt_avg_ms, 219_999.313_354_492_2, REL);
        assert_close(est.trt_max_ms, 279_999.084_472_656_25, REL);
        assert_eq!(
            est.terms_used,
            TermsUsed {
                n_min: 17,
                n_avg: 18,
                n_max: 18
            }
        );
    }

    #[test]
    fn estimate_at_zero_utilization_collapses_to_the_phase_sum() {
        // U = 0: no backlog accumulates, so TRT = T + R + D per case.
        let est = estimate_trt(10_000.0, 5000.0, 2000.0, 1000.0, u(0.0)).unwrap();
        assert_eq!(est.trt_min_ms, 5000.0 + 2000.0 + 8000.0);
        assert_eq!(est.trt_avg_ms, 5000.0 + 2000.0 + 13_000.0);
        assert_eq!(est.trt_max_ms, 5000.0 + 2000.0 + 18_000.0);
    }

    #[test]
    fn estimate_rejects_invalid_arguments() {
        let ok = u(0.5);
        assert!(estimate_trt(0.0, 1.0, 1.0, 1.0, ok).is_err());
        assert!(estimate_trt(-5.0, 1.0, 1.0, 1.0, ok).is_err());
        assert!(estimate_trt(f64::NAN, 1.0, 1.0, 1.0, ok).is_err());
        assert!(estimate_trt(10.0, 0.0, 1.0, 1.0, ok).is_err());
        assert!(estimate_trt(10.0, 1.0, -1.0, 1.0, ok).is_err());
        assert!(estimate_trt(10.0, 1.0, 1.0, -1.0, ok).is_err());
    }

    #[test]
    fn estimate_agrees_with_term_by_term_reference_on_random_instances() {
        // Matches the acceptance sweep's ranges; kept here as the unit-level
        // guard so regressions fail fast.
        let mut rng = U01::new(0xC47C_0002);
        for _ in 0..1000 {
            let ci = 1.0 + rng.next() * 99_999.0;
            let t = 1.0 + rng.next() * 99_999.0;
            let r = rng.next() * 100_000.0;
            let w = rng.next() * 100_000.0;
            let util = rng.next() * 0.99;
            let est = estimate_trt(ci, t, r, w, u(util)).unwrap();
            for (e, trt, n) in [
                (0.0, est.trt_min_ms, est.terms_used.n_min),
                (ci / 2.0, est.trt_avg_ms, est.terms_used.n_avg),
                (ci, est.trt_max_ms, est.terms_used.n_max),
            ] {
                let base = e + t + r + w;
                let (sum, n_ref) = iterative_catchup(base, util);
                assert_eq!(n, n_ref);
                assert_close(trt, t + r + sum, 1e-9);
            }
        }
    }

    #[test]
    fn estimate_cases_are_strictly_ordered() {
        let mut rng = U01::new(0xC47C_0003);
        for _ in 0..200 {
            let ci = 1.0 + rng.next() * 50_000.0;
            let t = 1.0 + rng.next() * 20_000.0;
            let r = rng.next() * 20_000.0;
            let w = rng.next() * 20_000.0;
            let util = rng.next() * 0.99;
            let est = estimate_trt(ci, t, r, w, u(util)).unwrap();
            assert!(
                est.trt_min_ms < est.trt_avg_ms && est.trt_avg_ms < est.trt_max_ms,
                "cases must be strictly ordered for positive ci (ci={ci})"
            );
            // TRT can never undercut the explicit detection + restore time.
            assert!(est.trt_min_ms >= t + r);
        }
    }

    #[test]
    fn estimate_is_monotone_in_interval_and_utilization() {
        let t = 5000.0;
        let r = 2000.0;
        let w = 1000.0;
        let mut prev = f64::NEG_INFINITY;
        for ci in [1000.0, 5000.0, 20_000.0, 60_000.0, 120_000.0] {
            let est = estimate_trt(ci, t, r, w, u(0.5)).unwrap();
            assert!(est.trt_max_ms > prev, "worst case must grow with ci");
            prev = est.trt_max_ms;
        }
        let mut prev = f64::NEG_INFINITY;
        for util in [0.0, 0.2, 0.5, 0.8, 0.95] {
            let est = estimate_trt(10_000.0, t, r, w, u(util)).unwrap();
            assert!(
                est.trt_avg_ms > prev,
                "higher utilization must slow catch-up"
            );
            prev = est.trt_avg_ms;
        }
    }

    #[test]
    fn discounted_first_round_variant_differs_by_one_base_duration() {
        // A natural alternative reading starts the series at a_1 = D * U
        // (the backlog that accumulates during the outage rather than the
        // outage itself), which scales the whole sum by U:
        //     S'_n = U * S_n,   TRT' = T + R + U * S_n.
        // This test documents the numeric relationship so the two forms are
        // never silently confused: the production estimator uses a_1 = D.
        let mut rng = U01::new(0xC47C_0004);
        for _ in 0..200 {
            let base = 1.0 + rng.next() * 200_000.0;
            let util = rng.next() * 0.99;
            let n = term_count(base, u(util));
            let s = catchup_sum(base, u(util), n);
            let mut variant = 0.0;
            let mut term = base * util;
            for _ in 0..n {
                variant += term;
                term *= util;
            }
            assert_close(variant, s * util, 1e-9);
            // At U = 0.5 the two forms disagree by roughly the base duration
            // itself, which is far outside any measurement tolerance.
            if util > 0.4 {
                assert!(s - variant > 0.5 * base);
            }
        }
    }

    #[test]
    fn estimate_works_in_f32_too() {
        let util = Utilization::<f32>::new(0.5).unwrap();
        let est = estimate_trt(60_000.0f32, 10_000.0, 30_000.0, 20_000.0, util).unwrap();
        assert!((est.trt_avg_ms - 219_999.3).abs() < 1.0);
        assert_eq!(est.terms_used.n_avg, 18);
    }

    #[test]
    fn trt_case_picks_the_matching_field() {
        let est = estimate_trt(60_000.0, 10_000.0, 30_000.0, 20_000.0, u(0.5)).unwrap();
        assert_eq!(TrtCase::Min.pick(&est), est.trt_min_ms);
        assert_eq!(TrtCase::Avg.pick(&est), est.trt_avg_ms);
        assert_eq!(TrtCase::Max.pick(&est), est.trt_max_ms);
    }
}

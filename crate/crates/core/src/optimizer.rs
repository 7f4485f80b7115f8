//! Constraint-driven checkpoint-interval recommendation.
//!
//! Given fitted models and an upper bound C_TRT on the tolerable recovery
//! time, the optimizer inverts the selected availability curve
//! A(ci) = c0 + c1*ci + c2*ci^2 to find the largest checkpoint interval that
//! still meets the bound, then reports the latency the performance curve
//! predicts at that interval. Larger intervals mean less checkpoint overhead,
//! so when the bound admits two intervals the larger one wins.
//!
//! Feasibility is only ever decided inside the profiled domain: a bound met
//! solely where the quadratic extrapolates is reported as out-of-domain
//! rather than silently trusted, with opt-in clamping to the nearest domain
//! endpoint that still satisfies the bound.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::float::{from_f64, to_f64, Float};
use crate::modeling::{predict, ModelFamily, PolyModel};
use crate::trt::TrtCase;

/// Relative slack allowed when checking the bound at a clamped endpoint;
/// also the slack the constraint-satisfaction property guarantees.
const BOUND_REL_TOL: f64 = 1e-6;

/// Threshold below which the quadratic coefficient, viewed in the scaled
/// basis the model was fitted in, is treated as zero (linear fallback).
const QUAD_NEGLIGIBLE: f64 = 1e-12;

// ============================================================================
// Types
// ============================================================================

/// The user's quality-of-service constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QosConstraint<F> {
    /// Upper bound on the tolerable recovery time, milliseconds.
    pub c_trt_ms: F,
    /// Which availability curve to enforce (plan for best, average or worst
    /// failure position).
    pub case_selector: TrtCase,
}

impl<F: Float> QosConstraint<F> {
    /// Checks `c_trt_ms > 0` and finite.
    ///
    /// # Errors
    ///
    /// [`Error::InvalidInput`] otherwise.
    pub fn validate(&self) -> Result<()> {
        if !(self.c_trt_ms > F::zero() && self.c_trt_ms.is_finite()) {
            return Err(Error::InvalidInput(format!(
                "c_trt_ms must be positive and finite, got {}",
                self.c_trt_ms
            )));
        }
        Ok(())
    }
}

/// The optimizer's answer: the recommended interval and its predicted cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recommendation<F> {
    /// Recommended checkpoint interval, milliseconds; always within the
    /// model domain.
    pub ci_ms: F,
    /// The bound the recommendation was computed for, milliseconds.
    pub c_trt_ms: F,
    /// Steady-state latency the performance model predicts at `ci_ms`.
    pub predicted_l_avg_ms: F,
    /// True when the interval is a domain endpoint substituted for an
    /// out-of-domain root.
    pub clamped: bool,
    /// The availability case the constraint was enforced against.
    pub case_used: TrtCase,
}

/// Training goodness of fit for each model of a family, reported alongside
/// recommendations so consumers can judge how much to trust them.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FamilyRSquared<F> {
    /// Performance (latency) model.
    pub p: F,
    /// Best-case availability model.
    pub a_min: F,
    /// Average-case availability model.
    pub a_avg: F,
    /// Worst-case availability model.
    pub a_max: F,
}

impl<F: Float> FamilyRSquared<F> {
    /// Collects the four training R^2 values from a family.
    #[must_use]
    pub fn of(family: &ModelFamily<F>) -> Self {
        Self {
            p: family.perf.r_squared,
            a_min: family.avail_min.r_squared,
            a_avg: family.avail_avg.r_squared,
            a_max: family.avail_max.r_squared,
        }
    }
}

/// A [`Recommendation`] bundled with the family's fit quality; this is the
/// JSON document the pipeline emits.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RecommendationReport<F> {
    /// The recommendation itself, flattened into the document root.
    #[serde(flatten)]
    pub recommendation: Recommendation<F>,
    /// Training R^2 of each model that informed it.
    pub r_squared: FamilyRSquared<F>,
}

impl<F: Float> RecommendationReport<F> {
    /// Bundles a recommendation with its family's fit quality.
    #[must_use]
    pub fn new(recommendation: Recommendation<F>, family: &ModelFamily<F>) -> Self {
        Self {
            recommendation,
            r_squared: FamilyRSquared::of(family),
        }
    }
}

// ============================================================================
// Inversion
// ============================================================================

/// Solves `A(x) = target` for the largest solution inside the model domain.
///
/// With a genuinely quadratic model both roots are computed (numerically
/// stable split form); if both lie in the domain the larger is returned.
/// When the quadratic coefficient is negligible in the scaled basis the
/// model was fitted in — judged as `|c2| * h^2 < 1e-12 * scale`, `h` the
/// domain half-width and `scale` the magnitude of the linear/constant
/// contributions and the target — the equation degrades gracefully to the
/// linear case instead of dividing by a vanishing coefficient.
///
/// # Errors
///
/// - [`Error::InvalidInput`] when `target <= 0` or not finite;
/// - [`Error::Infeasible`] when no real solution exists (negative
///   discriminant, or a constant curve that never meets the target);
/// - [`Error::OutOfDomain`] when real solutions exist but none lies inside
///   the domain; carries the root nearest to the domain so callers may
///   clamp.
pub fn invert_availability<F: Float>(model: &PolyModel<F>, target: F) -> Result<F> {
    if !(target > F::zero() && target.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "target must be positive and finite, got {target}"
        )));
    }
    let [lo, hi] = model.domain;
    let c0 = model.coefficients.first().copied().unwrap_or_else(F::zero);
    let c1 = model.coefficients.get(1).copied().unwrap_or_else(F::zero);
    let c2 = model.coefficients.get(2).copied().unwrap_or_else(F::zero);

    let two = from_f64::<F>(2.0);
    let half_width = (hi - lo) / two;
    let quad_magnitude = c2.abs() * half_width * half_width;
    let reference = (c1.abs() * half_width)
        .max(c0.abs())
        .max(target.abs())
        .max(F::one());
    let negligible_quadratic = quad_magnitude < from_f64::<F>(QUAD_NEGLIGIBLE) * reference;

    let roots: Vec<F> = if negligible_quadratic {
        if c1 == F::zero() {
            // Constant curve: either every interval satisfies the bound
            // (pick the largest) or none does.
            return if c0 == target {
                Ok(hi)
            } else {
                Err(Error::Infeasible {
                    target_ms: to_f64(target),
                })
            };
        }
        vec![(target - c0) / c1]
    } else {
        let four = from_f64::<F>(4.0);
        let discriminant = c1 * c1 - four * c2 * (c0 - target);
        if discriminant < F::zero() {
            return Err(Error::Infeasible {
                target_ms: to_f64(target),
            });
        }
        let sqrt_disc = discriminant.sqrt();
        // Split form: compute the larger-magnitude root additively, derive
        // the other from the product, avoiding cancellation.
        let signed = if c1 >= F::zero() {
            c1 + sqrt_disc
        } else {
            c1 - sqrt_disc
        };
        let q = -(signed / two);
        if q == F::zero() {
            // Happens only when c0 == target: the roots are 0 and -c1/c2.
            vec![F::zero(), -(c1 / c2)]
        } else {
            vec![q / c2, (c0 - target) / q]
        }
    };

    let in_domain = roots
        .iter()
        .copied()
        .filter(|&r| r >= lo && r <= hi)
        .fold(None::<F>, |best, r| match best {
            Some(b) if b >= r => Some(b),
            _ => Some(r),
        });
    if let Some(root) = in_domain {
        return Ok(root);
    }

    let distance = |r: F| -> F {
        if r < lo {
            lo - r
        } else if r > hi {
            r - hi
        } else {
            F::zero()
        }
    };
    let nearest = roots
        .iter()
        .copied()
        .min_by(|&a, &b| {
            distance(a)
                .partial_cmp(&distance(b))
                .expect("root distances are comparable")
        })
        .expect("at least one real root in this branch");
    Err(Error::OutOfDomain {
        nearest_root_ms: to_f64(nearest),
        domain_lo_ms: to_f64(lo),
        domain_hi_ms: to_f64(hi),
    })
}

// ============================================================================
// Recommendation
// ============================================================================

/// Produces the largest-interval recommendation that meets the constraint.
///
/// The availability model named by `q.case_selector` is inverted at
/// `q.c_trt_ms`. When the solution falls outside the profiled domain and
/// `clamp` is set, the nearest domain endpoint whose predicted recovery time
/// still satisfies the bound (within 1e-6 relative) is substituted and the
/// recommendation is marked `clamped`.
///
/// # Errors
///
/// - [`Error::InvalidInput`] for an invalid constraint;
/// - [`Error::Infeasible`] when the curve never meets the bound;
/// - [`Error::OutOfDomain`] when the solution is an extrapolation and
///   clamping is disabled or cannot satisfy the bound either.
pub fn recommend<F: Float>(
    family: &ModelFamily<F>,
    q: &QosConstraint<F>,
    clamp: bool,
) -> Result<Recommendation<F>> {
    q.validate()?;
    let selected = match q.case_selector {
        TrtCase::Min => &family.avail_min,
        TrtCase::Avg => &family.avail_avg,
        TrtCase::Max => &family.avail_max,
    };

    let (ci_ms, clamped) = match invert_availability(selected, q.c_trt_ms) {
        Ok(ci) => (ci, false),
        Err(err @ Error::OutOfDomain { nearest_root_ms, .. }) if clamp => {
            let bound = q.c_trt_ms * (F::one() + from_f64::<F>(BOUND_REL_TOL));
            let nearest_root = from_f64::<F>(nearest_root_ms);
            let mut endpoints = selected.domain;
            if (endpoints[1] - nearest_root).abs() < (endpoints[0] - nearest_root).abs() {
                endpoints.swap(0, 1);
            }
            let chosen = endpoints
                .into_iter()
                .find(|&endpoint| predict(selected, endpoint).value <= bound);
            match chosen {
                Some(endpoint) => (endpoint, true),
                None => return Err(err),
            }
        }
        Err(other) => return Err(other),
    };

    Ok(Recommendation {
        ci_ms,
        c_trt_ms: q.c_trt_ms,
        predicted_l_avg_ms: predict(&family.perf, ci_ms).value,
        clamped,
        case_used: q.case_selector,
    })
}

// ============================================================================
// Tests
// ============================================================================

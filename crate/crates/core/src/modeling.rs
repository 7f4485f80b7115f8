//! Least-squares polynomial models of latency and recovery time as functions
//! of the checkpoint interval.
//!
//! The pipeline fits degree-2 polynomials: one for steady-state latency
//! ("p") and three for the best/average/worst-case recovery time ("a_min",
//! "a_avg", "a_max"). Internally the fit runs on a centered and scaled
//! abscissa x' = (x - mean) / stddev so the normal equations stay
//! well-conditioned for millisecond-range intervals; the reported
//! coefficients are transformed back to the raw basis, lowest power first,
//! so `value = c0 + c1*x + c2*x^2` holds directly in caller units.

use serde::{Deserialize, Serialize};

use crate::error::{Error, ModelKind, Result};
use crate::float::{from_f64, Float};
use crate::profiling::{ProfilingDataset, TrtDataPoint};

// ============================================================================
// Models
// ============================================================================

/// A fitted polynomial with its training domain and goodness of fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyModel<F> {
    /// Raw-basis coefficients, lowest power first (`len == degree + 1`).
    pub coefficients: Vec<F>,
    /// Closed interval of x covered by the training data.
    pub domain: [F; 2],
    /// Coefficient of determination on the training data.
    pub r_squared: F,
}

impl<F: Float> PolyModel<F> {
    /// Polynomial degree (number of coefficients minus one).
    #[must_use]
    pub fn degree(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }
}

/// A model evaluation plus whether it left the training domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction<F> {
    /// The polynomial value at the query point.
    pub value: F,
    /// True when the query lies outside the training domain, where the
    /// polynomial is an extrapolation rather than an interpolation.
    pub extrapolated: bool,
}

/// The four fitted curves the optimizer consumes.
///
/// Serialized with the compact historical keys `p`, `a_min`, `a_avg`,
/// `a_max`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFamily<F> {
    /// Steady-state latency vs. checkpoint interval.
    #[serde(rename = "p")]
    pub perf: PolyModel<F>,
    /// Best-case recovery time vs. checkpoint interval.
    #[serde(rename = "a_min")]
    pub avail_min: PolyModel<F>,
    /// Average-case recovery time vs. checkpoint interval.
    #[serde(rename = "a_avg")]
    pub avail_avg: PolyModel<F>,
    /// Worst-case recovery time vs. checkpoint interval.
    #[serde(rename = "a_max")]
    pub avail_max: PolyModel<F>,
}

impl<F: Float> ModelFamily<F> {
    /// Borrows the model identified by `kind`.
    #[must_use]
    pub fn get(&self, kind: ModelKind) -> &PolyModel<F> {
        match kind {
            ModelKind::Perf => &self.perf,
            ModelKind::AvailMin => &self.avail_min,
            ModelKind::AvailAvg => &self.avail_avg,
            ModelKind::AvailMax => &self.avail_max,
        }
    }
}

// ============================================================================
// Fitting
// ============================================================================

/// Fits a least-squares polynomial of the given degree.
///
/// The abscissa is centered and scaled before the normal equations are
/// solved (Gaussian elimination with partial pivoting), then the
/// coefficients are mapped back to the raw basis. `r_squared` is
/// `1 - SS_res / SS_tot`; when the response has zero variance a fit with
/// negligible residual reports `r_squared = 1`, while a nonzero residual is
/// an error because the ratio is undefined.
///
/// # Errors
///
/// - [`Error::InvalidInput`] for mismatched slice lengths, non-finite
///   values, or a degenerate (numerically singular) system;
/// - [`Error::InsufficientData`] when fewer than `degree + 1` points;
/// - [`Error::DuplicateX`] when two x values coincide exactly;
/// - [`Error::ZeroVariance`] per the rule above.
pub fn fit_poly<F: Float>(xs: &[F], ys: &[F], degree: usize) -> Result<PolyModel<F>> {
    if xs.len() != ys.len() {
        return Err(Error::InvalidInput(format!(
            "xs and ys must have equal length, got {} and {}",
            xs.len(),
            ys.len()
        )));
    }
    let n = xs.len();
    if n < degree + 1 {
        return Err(Error::InsufficientData {
            needed: degree + 1,
            got: n,
        });
    }
    for &x in xs {
        if !x.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite x value {x}")));
        }
    }
    for &y in ys {
        if !y.is_finite() {
            return Err(Error::InvalidInput(format!("non-finite y value {y}")));
        }
    }
    for (i, &a) in xs.iter().enumerate() {
        for &b in &xs[i + 1..] {
            if a == b {
                return Err(Error::DuplicateX {
                    value: crate::float::to_f64(a),
                });
            }
        }
    }

    let n_f = from_f64::<F>(n as f64);
    let mean = xs.iter().copied().sum::<F>() / n_f;
    let variance = xs
        .iter()
        .map(|&x| (x - mean) * (x - mean))
        .sum::<F>()
        / n_f;
    let scale = if variance > F::zero() {
        variance.sqrt()
    } else {
        F::one()
    };

    // Normal equations over the scaled abscissa x' = (x - mean) / scale.
    let scaled: Vec<F> = xs.iter().map(|&x| (x - mean) / scale).collect();
    let size = degree + 1;
    let mut moments = vec![F::zero(); 2 * degree + 1];
    let mut rhs = vec![F::zero(); size];
    for (&x, &y) in scaled.iter().zip(ys) {
        let mut power = F::one();
        for (k, moment) in moments.iter_mut().enumerate() {
            *moment = *moment + power;
            if k < size {
                rhs[k] = rhs[k] + y * power;
            }
            power = power * x;
        }
    }
    let matrix: Vec<Vec<F>> = (0..size)
        .map(|r| (0..size).map(|c| moments[r + c]).collect())
        .collect();
    let scaled_coeffs = solve_linear(matrix, rhs)?;

    // Goodness of fit, evaluated in the scaled basis for stability.
    let y_mean = ys.iter().copied().sum::<F>() / n_f;
    let mut ss_res = F::zero();
    let mut ss_tot = F::zero();
    let mut guard = F::zero();
    let eps = F::epsilon();
    for (&x, &y) in scaled.iter().zip(ys) {
        let fitted = horner(&scaled_coeffs, x);
        ss_res = ss_res + (y - fitted) * (y - fitted);
        ss_tot = ss_tot + (y - y_mean) * (y - y_mean);
        let noise = eps * y.abs().max(F::one());
        guard = guard + noise * noise;
    }
    let r_squared = r_squared_from_sums(ss_res, ss_tot, guard * from_f64::<F>(16.0))?;

    // Map back to the raw basis by composing with (x - mean) / scale.
    let coefficients = compose_with_linear(&scaled_coeffs, -mean / scale, scale.recip());

    let lo = xs.iter().copied().fold(F::infinity(), F::min);
    let hi = xs.iter().copied().fold(F::neg_infinity(), F::max);
    Ok(PolyModel {
        coefficients,
        domain: [lo, hi],
        r_squared,
    })
}

/// Evaluates the model at `x`, flagging extrapolation outside the domain.
#[must_use]
pub fn predict<F: Float>(model: &PolyModel<F>, x: F) -> Prediction<F> {
    Prediction {
        value: horner(&model.coefficients, x),
        extrapolated: x < model.domain[0] || x > model.domain[1],
    }
}

/// Fits the four pipeline models (degree 2) from a dataset and its derived
/// recovery-time points.
///
/// `points[i]` must correspond to `dataset.runs[i]` (same `ci_ms`).
///
/// # Errors
///
/// - [`Error::InvalidInput`] for length or interval mismatches;
/// - [`Error::ModelFit`] wrapping the underlying cause and naming the model
///   that failed.
pub fn fit_family<F: Float>(
    dataset: &ProfilingDataset<F>,
    points: &[TrtDataPoint<F>],
) -> Result<ModelFamily<F>> {
    if dataset.runs.len() != points.len() {
        return Err(Error::InvalidInput(format!(
            "dataset has {} runs but {} trt points were supplied",
            dataset.runs.len(),
            points.len()
        )));
    }
    for (i, (run, point)) in dataset.runs.iter().zip(points).enumerate() {
        if run.ci_ms != point.ci_ms {
            return Err(Error::InvalidInput(format!(
                "point {i} has ci_ms {} but the dataset row has {}",
                point.ci_ms, run.ci_ms
            )));
        }
    }

    let xs: Vec<F> = dataset.runs.iter().map(|r| r.ci_ms).collect();
    let fit = |kind: ModelKind, ys: Vec<F>| -> Result<PolyModel<F>> {
        fit_poly(&xs, &ys, 2).map_err(|e| Error::ModelFit {
            model: kind,
            source: Box::new(e),
        })
    };

    let perf = fit(
        ModelKind::Perf,
        dataset.runs.iter().map(|r| r.l_avg_ms).collect(),
    )?;
    let avail_min = fit(
        ModelKind::AvailMin,
        points.iter().map(|p| p.estimate.trt_min_ms).collect(),
    )?;
    let avail_avg = fit(
        ModelKind::AvailAvg,
        points.iter().map(|p| p.estimate.trt_avg_ms).collect(),
    )?;
    let avail_max = fit(
        ModelKind::AvailMax,
        points.iter().map(|p| p.estimate.trt_max_ms).collect(),
    )?;
    Ok(ModelFamily {
        perf,
        avail_min,
        avail_avg,
        avail_max,
    })
}

// ============================================================================
// Internals
// ============================================================================

/// Horner evaluation of lowest-power-first coefficients.
fn horner<F: Float>(coefficients: &[F], x: F) -> F {
    coefficients
        .iter()
        .rev()
        .fold(F::zero(), |acc, &c| acc * x + c)
}

/// `1 - ss_res / ss_tot` with the zero-variance convention: a residual no
/// larger than `guard` (rounding noise) on flat data is a perfect fit; a
/// larger one makes the ratio undefined.
fn r_squared_from_sums<F: Float>(ss_res: F, ss_tot: F, guard: F) -> Result<F> {
    if ss_tot == F::zero() {
        return if ss_res <= guard {
            Ok(F::one())
        } else {
            Err(Error::ZeroVariance)
        };
    }
    Ok(F::one() - ss_res / ss_tot)
}

/// Gaussian elimination with partial pivoting on a dense square system.
fn solve_linear<F: Float>(mut a: Vec<Vec<F>>, mut b: Vec<F>) -> Result<Vec<F>> {
    let n = b.len();
    for col in 0..n {
        let pivot = (col..n)
            .max_by(|&i, &j| {
                a[i][col]
                    .abs()
                    .partial_cmp(&a[j][col].abs())
                    .expect("finite pivots")
            })
            .expect("non-empty pivot range");
        if a[pivot][col].abs() == F::zero() {
            return Err(Error::InvalidInput(
                "normal equations are singular; the x values are degenerate".to_owned(),
            ));
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..n {
            let factor = a[row][col] / a[col][col];
            for k in col..n {
                a[row][k] = a[row][k] - factor * a[col][k];
            }
            b[row] = b[row] - factor * b[col];
        }
    }
    let mut x = vec![F::zero(); n];
    for col in (0..n).rev() {
        let mut acc = b[col];
        for k in col + 1..n {
            acc = acc - a[col][k] * x[k];
        }
        x[col] = acc / a[col][col];
    }
    Ok(x)
}

/// Composes `p(l(x))` where `p` has the given (lowest-first) coefficients
/// and `l(x) = intercept + slope * x`, returning raw-basis coefficients.
fn compose_with_linear<F: Float>(coefficients: &[F], intercept: F, slope: F) -> Vec<F> {
    let mut raw = vec![*coefficients.last().expect("at least one coefficient")];
    for &next_coefficient in coefficients.iter().rev().skip(1) {
        let mut next = vec![F::zero(); raw.len() + 1];
        for (i, &c) in raw.iter().enumerate() {
            next[i] = next[i] + c * intercept;
            next[i + 1] = next[i + 1] + c * slope;
        }
        next[0] = next[0] + next_coefficient;
        raw = next;
    }
    raw
}

// ============================================================================
// Tests
// ============================================================================

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiling::{derive_trt_points, ProfilingRunMetrics};
    use crate::testutil::{assert_close, U01};
    use num_bigint::BigInt;
    use num_rational::BigRational;
    use num_traits::{One, ToPrimitive, Zero};

    /// Tolerances used across the fitting tests.
    mod tol {
        /// Noiseless coefficient recovery and oracle agreement.
        pub const EXACT: f64 = 1e-9;
        /// Scale-equivariance of transformed coefficients.
        pub const EQUIVARIANCE: f64 = 1e-6;
    }

    // ------------------------------------------------------------------
    // exact rational reference
    // ------------------------------------------------------------------

    /// Degree-2 least squares solved exactly over the rationals: raw-basis
    /// normal equations, Gaussian elimination and R^2 all in `BigRational`,
    /// so conditioning cannot perturb the reference values.
    fn exact_quadratic_fit(xs: &[f64], ys: &[f64]) -> ([f64; 3], f64) {
        let q = |v: f64| BigRational::from_float(v).expect("finite");
        let mut s = vec![BigRational::zero(); 5]; // sums of x^k, k = 0..4
        let mut t = vec![BigRational::zero(); 3]; // sums of y * x^k, k = 0..2
        for (&x, &y) in xs.iter().zip(ys) {
            let qx = q(x);
            let qy = q(y);
            let mut power = BigRational::one();
            for k in 0..5 {
                s[k] += &power;
                if k < 3 {
                    t[k] += &qy * &power;
                }
                power *= &qx;
            }
        }
        let mut a = [
            [s[0].clone(), s[1].clone(), s[2].clone()],
            [s[1].clone(), s[2].clone(), s[3].clone()],
            [s[2].clone(), s[3].clone(), s[4].clone()],
        ];
        let mut b = [t[0].clone(), t[1].clone(), t[2].clone()];
        // Exact elimination: any nonzero pivot suffices.
        for col in 0..3 {
            let pivot = (col..3)
                .find(|&r| !a[r][col].is_zero())
                .expect("distinct xs give a nonsingular system");
            a.swap(col, pivot);
            b.swap(col, pivot);
            for row in col + 1..3 {
                let factor = &a[row][col] / &a[col][col];
                for k in col..3 {
                    let delta = &factor * &a[col][k];
                    a[row][k] -= delta;
                }
                let delta = &factor * &b[col];
                b[row] -= delta;
            }
        }
        let mut c = [BigRational::zero(), BigRational::zero(), BigRational::zero()];
        for col in (0..3).rev() {
            let mut acc = b[col].clone();
            for k in col + 1..3 {
                let delta = &a[col][k] * &c[k];
                acc -= delta;
            }
            c[col] = acc / &a[col][col];
        }

        let n = BigRational::from_integer(BigInt::from(xs.len()));
        let y_mean = ys.iter().map(|&y| q(y)).sum::<BigRational>() / &n;
        let mut ss_res = BigRational::zero();
        let mut ss_tot = BigRational::zero();
        for (&x, &y) in xs.iter().zip(ys) {
            let qx = q(x);
            let qy = q(y);
            let fitted = &c[0] + &c[1] * &qx + &c[2] * (&qx * &qx);
            let r = &qy - &fitted;
            ss_res += &r * &r;
            let d = &qy - &y_mean;
            ss_tot += &d * &d;
        }
        let r2 = BigRational::one() - ss_res / ss_tot;
        (
            [
                c[0].to_f64().unwrap(),
                c[1].to_f64().unwrap(),
                c[2].to_f64().unwrap(),
            ],
            r2.to_f64().unwrap(),
        )
    }

    fn grid(n: usize, lo: f64, hi: f64) -> Vec<f64> {
        (0..n)
            .map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64)
            .collect()
    }

    fn quadratic(c0: f64, c1: f64, c2: f64) -> impl Fn(f64) -> f64 {
        move |x| c0 + c1 * x + c2 * x * x
    }

    // ------------------------------------------------------------------
    // recovery and references
    // ------------------------------------------------------------------

    #[test]
    fn noiseless_quadratic_is_recovered_with_unit_r_squared() {
        let truth = [500.0, -0.01, 2.0e-7];
        let xs = grid(11, 1000.0, 60_000.0);
        let ys: Vec<f64> = xs.iter().map(|&x| quadratic(truth[0], truth[1], truth[2])(x)).collect();
        let model = fit_poly(&xs, &ys, 2).unwrap();
        assert_eq!(model.degree(), 2);
        for (got, want) in model.coefficients.iter().zip(truth) {
            assert_close(*got, want, tol::EXACT);
        }
        assert_close(model.r_squared, 1.0, tol::EXACT);
        assert_eq!(model.domain, [1000.0, 60_000.0]);
    }

    #[test]
    fn noisy_fits_match_the_exact_rational_reference() {
        let mut rng = U01::new(0x30DE_0001);
        for _ in 0..25 {
            let n = 8 + (rng.next() * 8.0) as usize;
            let lo = 500.0 + rng.next() * 2000.0;
            let hi = lo + 20_000.0 + rng.next() * 70_000.0;
            let xs = grid(n, lo, hi);
            let truth = quadratic(
                200.0 + rng.next() * 800.0,
                -0.02 + rng.next() * 0.04,
                (rng.next() - 0.5) * 4.0e-7,
            );
            let ys: Vec<f64> = xs
                .iter()
                .map(|&x| truth(x) + (rng.next() - 0.5) * 40.0)
                .collect();
            let model = fit_poly(&xs, &ys, 2).unwrap();
            let (exact_coeffs, exact_r2) = exact_quadratic_fit(&xs, &ys);
            assert_close(model.r_squared, exact_r2, tol::EXACT);
            // Pointwise agreement with the exact polynomial is the
            // conditioning-free comparison.
            for &x in &xs {
                let exact_value =
                    exact_coeffs[0] + exact_coeffs[1] * x + exact_coeffs[2] * x * x;
                assert_close(predict(&model, x).value, exact_value, tol::EXACT);
            }
        }
    }

    #[test]
    fn fitting_is_equivariant_under_abscissa_scaling() {
        let xs = grid(9, 1000.0, 50_000.0);
        let mut rng = U01::new(0x30DE_0002);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| quadratic(300.0, 0.004, 1.5e-7)(x) + (rng.next() - 0.5) * 10.0)
            .collect();
        let base = fit_poly(&xs, &ys, 2).unwrap();
        for k in [10.0, 1000.0] {
            let scaled_xs: Vec<f64> = xs.iter().map(|&x| x * k).collect();
            let scaled = fit_poly(&scaled_xs, &ys, 2).unwrap();
            for (j, (&got, &want)) in scaled
                .coefficients
                .iter()
                .zip(&base.coefficients)
                .enumerate()
            {
                assert_close(got * k.powi(j as i32), want, tol::EQUIVARIANCE);
            }
            assert_close(scaled.r_squared, base.r_squared, tol::EQUIVARIANCE);
        }
    }

    #[test]
    fn fitted_coefficients_are_a_local_minimum_of_the_residual() {
        let xs = grid(10, 2000.0, 80_000.0);
        let mut rng = U01::new(0x30DE_0003);
        let ys: Vec<f64> = xs
            .iter()
            .map(|&x| quadratic(150.0, -0.002, 8.0e-8)(x) + (rng.next() - 0.5) * 25.0)
            .collect();
        let model = fit_poly(&xs, &ys, 2).unwrap();
        let ss_res = |c: &[f64]| -> f64 {
            xs.iter()
                .zip(&ys)
                .map(|(&x, &y)| {
                    let fitted = c[0] + c[1] * x + c[2] * x * x;
                    (y - fitted) * (y - fitted)
                })
                .sum()
        };
        let fitted_res = ss_res(&model.coefficients);
        let slack = 1e-9 * fitted_res.max(1.0);
        for j in 0..3 {
            for sign in [-1.0, 1.0] {
                let mut perturbed = model.coefficients.clone();
                // Relative nudge, with a floor for near-zero coefficients.
                let delta = 1e-6 * perturbed[j].abs().max(1e-9);
                perturbed[j] += sign * delta;
                assert!(
                    ss_res(&perturbed) + slack >= fitted_res,
                    "perturbing c{j} by {sign}*{delta} must not reduce the residual"
                );
            }
        }
    }

    // ------------------------------------------------------------------
    // r_squared conventions and prediction
    // ------------------------------------------------------------------

    #[test]
    fn constant_data_fits_perfectly() {
        let xs = grid(6, 1000.0, 6000.0);
        let ys = vec![42.0; 6];
        let model = fit_poly(&xs, &ys, 2).unwrap();
        assert_eq!(model.r_squared, 1.0);
        assert_close(predict(&model, 3456.0).value, 42.0, 1e-9);
    }

    #[test]
    fn zero_variance_with_real_residual_is_an_error() {
        assert!(matches!(
            r_squared_from_sums(0.5, 0.0, 1e-20),
            Err(Error::ZeroVariance)
        ));
        assert_eq!(r_squared_from_sums(1e-21, 0.0, 1e-20).unwrap(), 1.0);
        assert_close(r_squared_from_sums(1.0, 4.0, 0.0).unwrap(), 0.75, 1e-15);
    }

    #[test]
    fn predict_flags_extrapolation_only_outside_the_domain() {
        let model = PolyModel {
            coefficients: vec![1.0, 2.0, 3.0],
            domain: [10.0, 20.0],
            r_squared: 1.0,
        };
        let inside = predict(&model, 15.0);
        assert!(!inside.extrapolated);
        assert_eq!(inside.value, 1.0 + 2.0 * 15.0 + 3.0 * 225.0);
        assert!(!predict(&model, 10.0).extrapolated);
        assert!(!predict(&model, 20.0).extrapolated);
        assert!(predict(&model, 9.999).extrapolated);
        assert!(predict(&model, 20.001).extrapolated);
    }

    // ------------------------------------------------------------------
    // argument validation
    // ------------------------------------------------------------------

    #[test]
    fn fit_rejects_bad_inputs() {
        let xs = grid(5, 0.0, 4.0);
        let ys = vec![1.0; 5];
        assert!(matches!(
            fit_poly(&xs, &ys[..4], 2),
            Err(Error::InvalidInput(_))
        ));
        assert!(matches!(
            fit_poly(&xs[..2], &ys[..2], 2),
            Err(Error::InsufficientData { needed: 3, got: 2 })
        ));
        let dup = [1.0, 2.0, 2.0, 4.0];
        assert!(matches!(
            fit_poly(&dup, &ys[..4], 2),
            Err(Error::DuplicateX { value }) if value == 2.0
        ));
        let nan = [1.0, f64::NAN, 3.0];
        assert!(matches!(
            fit_poly(&nan, &ys[..3], 2),
            Err(Error::InvalidInput(_))
        ));
        let bad_y = [1.0, f64::INFINITY, 3.0];
        assert!(matches!(
            fit_poly(&xs[..3], &bad_y, 2),
            Err(Error::InvalidInput(_))
        ));
    }

    // ------------------------------------------------------------------
    // the family
    // ------------------------------------------------------------------

    fn family_dataset() -> ProfilingDataset<f64> {
        let run = |ci: f64| ProfilingRunMetrics {
            ci_ms: ci,
            i_avg_eps: 1000.0,
            i_max_eps: 2000.0,
            l_avg_ms: 100.0 + 1.0e6 / ci,
            r_avg_ms: 2000.0,
            w_avg_ms: 1000.0,
            timeout_ms: 5000.0,
        };
        ProfilingDataset::new((1..=6).map(|k| run(10_000.0 * k as f64)).collect()).unwrap()
    }

    #[test]
    fn fit_family_produces_four_models_over_one_domain() {
        let ds = family_dataset();
        let points = derive_trt_points(&ds).unwrap();
        let family = fit_family(&ds, &points).unwrap();
        for kind in [
            ModelKind::Perf,
            ModelKind::AvailMin,
            ModelKind::AvailAvg,
            ModelKind::AvailMax,
        ] {
            let model = family.get(kind);
            assert_eq!(model.degree(), 2);
            assert_eq!(model.domain, [10_000.0, 60_000.0]);
        }
        // Worst case dominates best case across the training points.
        for run in &ds.runs {
            let hi = predict(&family.avail_max, run.ci_ms).value;
            let lo = predict(&family.avail_min, run.ci_ms).value;
            assert!(
                hi >= lo - 1e-6 * hi.abs().max(1.0),
                "a_max must dominate a_min at ci={}",
                run.ci_ms
            );
        }
    }

    #[test]
    fn fit_family_serializes_with_the_compact_keys() {
        let ds = family_dataset();
        let points = derive_trt_points(&ds).unwrap();
        let family = fit_family(&ds, &points).unwrap();
        let value = serde_json::to_value(&family).unwrap();
        for key in ["p", "a_min", "a_avg", "a_max"] {
            assert!(value[key].is_object(), "missing key {key}");
            assert!(value[key]["coefficients"].is_array());
            assert_eq!(value[key]["coefficients"].as_array().unwrap().len(), 3);
            assert!(value[key]["domain"].is_array());
            assert!(value[key]["r_squared"].is_number());
        }
        let back: ModelFamily<f64> = serde_json::from_value(value).unwrap();
        assert_eq!(back, family);
    }

    #[test]
    fn fit_family_validates_alignment() {
        let ds = family_dataset();
        let points = derive_trt_points(&ds).unwrap();
        assert!(matches!(
            fit_family(&ds, &points[..4]),
            Err(Error::InvalidInput(_))
        ));
        let mut shifted = points.clone();
        shifted[2].ci_ms += 1.0;
        assert!(matches!(
            fit_family(&ds, &shifted),
            Err(Error::InvalidInput(_))
        ));
    }

    #[test]
    fn fit_family_names_the_model_that_failed() {
        // Duplicate intervals slipped in via the public field (bypassing
        // construction) surface as a wrapped fit error naming the first
        // model that sees them.
        let ds = family_dataset();
        let mut broken = ds.clone();
        broken.runs[1].ci_ms = broken.runs[0].ci_ms;
        let points = derive_trt_points(&broken).unwrap();
        match fit_family(&broken, &points) {
            Err(Error::ModelFit { model, source }) => {
                assert_eq!(model, ModelKind::Perf);
                assert!(matches!(*source, Error::DuplicateX { .. }));
            }
            other => panic!("expected ModelFit, got {other:?}"),
        }
    }

    #[test]
    fn f32_fits_are_supported() {
        let xs: Vec<f32> = grid(7, 100.0, 700.0).iter().map(|&x| x as f32).collect();
        let ys: Vec<f32> = xs.iter().map(|&x| 2.0 + 0.5 * x).collect();
        let model = fit_poly(&xs, &ys, 2).unwrap();
        assert!((model.r_squared - 1.0).abs() < 1e-5);
        assert!((predict(&model, 400.0f32).value - 202.0).abs() < 0.05);
    }
}

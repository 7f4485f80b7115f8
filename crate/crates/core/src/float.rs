//! Scalar abstraction for the numeric pipeline.
//!
//! Every quantity in the pipeline is a real number (milliseconds, events per
//! second, dimensionless ratios), so the whole library is generic over the
//! floating-point width. `f64` is the intended default; `f32` is supported
//! for callers that trade precision for footprint. Concrete `f64` aliases for
//! the public types live at the crate root.

use core::fmt;
use core::iter::Sum;

/// Floating-point scalar the pipeline math is generic over.
///
/// This bundles the `num-traits` capabilities the algorithms rely on
/// (arithmetic, transcendentals, conversions) with the formatting and
/// threading bounds the public types need. It is implemented for `f32` and
/// `f64`; implementing it for other scalars is not supported.
pub trait Float:
    num_traits::Float
    + num_traits::FromPrimitive
    + num_traits::ToPrimitive
    + fmt::Debug
    + fmt::Display
    + Default
    + Sum
    + Send
    + Sync
    + 'static
{
}

impl Float for f32 {}
impl Float for f64 {}

/// Converts an `f64` constant into the working scalar.
///
/// Conversion from `f64` is total for both supported scalars (`f32` rounds,
/// possibly to an infinity), so the `expect` is unreachable there.
pub(crate) fn from_f64<F: Float>(value: f64) -> F {
    F::from_f64(value).expect("f64 must convert into the working scalar")
}

/// Converts the working scalar to `f64` for diagnostics and error payloads.
pub(crate) fn to_f64<F: Float>(value: F) -> f64 {
    value.to_f64().expect("the working scalar must convert to f64")
}

/// Converts a tick index into the working scalar.
///
/// Tick counts stay far below 2^24, so the conversion is exact even for
/// `f32`.
pub(crate) fn from_u64<F: Float>(value: u64) -> F {
    F::from_u64(value).expect("u64 tick count must convert into the working scalar")
}

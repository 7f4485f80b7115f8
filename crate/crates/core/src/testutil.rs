//! Shared helpers for the unit tests.

use crate::rng::Stream;

/// Asserts relative closeness: |actual - expected| <= rel * max(|expected|, 1).
///
/// The `max(..., 1)` floor keeps the tolerance meaningful for expectations
/// near zero.
#[track_caller]
pub(crate) fn assert_close(actual: f64, expected: f64, rel: f64) {
    let scale = expected.abs().max(1.0);
    let diff = (actual - expected).abs();
    assert!(
        diff <= rel * scale,
        "expected {expected}, got {actual} (diff {diff}, allowed {})",
        rel * scale
    );
}

/// Seeded uniform-[0,1) generator for property-style test loops.
pub(crate) struct U01(Stream);

impl U01 {
    pub(crate) fn new(seed: u64) -> Self {
        Self(Stream::new(seed))
    }

    pub(crate) fn next(&mut self) -> f64 {
        self.0.u01()
    }
}

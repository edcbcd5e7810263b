//! Scalar abstraction for the probability layer.
//!
//! Everything real-valued in this crate (binomial tails, similarity
//! estimates, filter thresholds) is generic over [`Real`], so the same code
//! runs in `f32` or `f64`. The crate root exports `f64` aliases for the
//! common parameter/verdict types; `f64` is what the CLI and the test
//! suites use.

use num_traits::{Float, FromPrimitive};

/// Floating-point scalar: `f32` or `f64`.
pub trait Real: Float + FromPrimitive + std::fmt::Debug + std::fmt::Display + Send + Sync + 'static {
    /// Lossless-enough conversion from a bin/group count.
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }
}

impl Real for f32 {}
impl Real for f64 {}

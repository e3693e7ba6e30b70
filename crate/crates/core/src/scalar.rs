//! Scalar abstraction shared by every numeric module.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Real floating-point scalar (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + Debug
    + Display
    + Default
    + Sum
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Converts a count.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable")
    }

    /// Tolerance `base`, widened to a small multiple of machine epsilon for
    /// narrow types so that f32 callers get a meaningful slack.
    #[inline]
    fn tol(base: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        let base = Self::lit(base);
        if base > floor {
            base
        } else {
            floor
        }
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Constructor invariants (hermiticity, trace, normalization).
pub const INVARIANT_TOL: f64 = 1e-12;
/// Slack on the smallest eigenvalue in the PSD check.
pub const PSD_TOL: f64 = 1e-10;
/// End-to-end score comparisons.
pub const SCORE_TOL: f64 = 1e-9;
/// Margin required for a strict witnessing verdict.
pub const WITNESS_MARGIN: f64 = 1e-12;

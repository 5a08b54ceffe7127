//! Floating-point abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar type the mixture model, features and metrics are generic over.
///
/// Implemented for `f32` and `f64`. Persistence and the CLI use `f64`.
pub trait Scalar:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + LowerExp
    + Default
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal, rounding to the nearest representable value.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable in scalar type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    /// Tolerance for "sums to one" and symmetry checks: `1e-12` for `f64`,
    /// widened to a few hundred ulps for narrower types.
    #[inline]
    fn check_tol() -> Self {
        Self::lit(1e-12).max(Self::epsilon() * Self::lit(512.0))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// `ln(sum(exp(values)))` without overflow. Returns `-inf` for an empty slice
/// or when every entry is `-inf`.
pub fn log_sum_exp<T: Scalar>(values: &[T]) -> T {
    let max = values.iter().copied().fold(T::neg_infinity(), |acc, v| acc.max(v));
    if max == T::neg_infinity() || max.is_nan() {
        return max;
    }
    if max == T::infinity() {
        return max;
    }
    let sum: T = values.iter().map(|&v| (v - max).exp()).sum();
    max + sum.ln()
}

//! Floating point scalar abstraction shared by every numeric routine.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar the learners are generic over: `f32` or `f64`.
///
/// Besides the arithmetic bounds, each precision carries the numerical
/// thresholds that depend on its machine epsilon.
pub trait Scalar:
    Float
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
{
    /// Largest accepted `‖A·A⁻¹ − I‖_max` after a dense SPD inversion.
    fn solve_tolerance() -> Self;

    /// Schur complement floor below which an incremental inverse is rebuilt
    /// from a ridged Gram matrix; also the ridge that is added.
    fn ridge() -> Self;

    /// Relative eigenvalue cutoff used by pseudoinverses.
    fn pinv_cutoff() -> Self;

    /// Lossy conversion from an `f64` literal.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("f64 literal representable in scalar type")
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count representable in scalar type")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    fn solve_tolerance() -> Self {
        1e-9
    }

    fn ridge() -> Self {
        1e-10
    }

    fn pinv_cutoff() -> Self {
        1e-12
    }
}

impl Scalar for f32 {
    fn solve_tolerance() -> Self {
        1e-4
    }

    fn ridge() -> Self {
        1e-6
    }

    fn pinv_cutoff() -> Self {
        1e-6
    }
}

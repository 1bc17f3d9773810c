//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, ToPrimitive};
use rand::Rng;

/// Floating-point scalar used by networks, predictions and environments.
///
/// Implemented for `f32` and `f64`. `Display` must print the shortest
/// representation that parses back to the same bits, which both primitive
/// floats guarantee; the text formats rely on that for exact round-trips.
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Default
    + Debug
    + Display
    + FromStr
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` literal. Every finite `f64` maps to some value of
    /// the target type, so this never fails for finite inputs.
    #[inline]
    fn lit(v: f64) -> Self {
        Self::from_f64(v).expect("finite literal")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("float converts to f64")
    }

    /// Tolerance used for goal predicates on accumulated positions.
    #[inline]
    fn goal_tolerance() -> Self {
        Self::epsilon().sqrt()
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Draws uniformly from `[lo, hi]`.
#[inline]
pub fn uniform<R: Real, G: Rng + ?Sized>(rng: &mut G, lo: R, hi: R) -> R {
    let u: f64 = rng.random();
    let v = lo + (hi - lo) * R::lit(u);
    // rounding in the conversion can leave the interval by one ulp
    v.max(lo).min(hi)
}

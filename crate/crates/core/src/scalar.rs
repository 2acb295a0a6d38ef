//! Scalar abstraction shared by the numerical modules.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`; used for literal constants.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    /// Exact conversion for small integers (mode indices, counts).
    fn from_int(k: i64) -> Self {
        Self::from_i64(k).expect("integer representable")
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

/// Smallest and largest admissible solver tolerances for `T`.
///
/// For `f64` this is `[1e-15, 1e-6]`. Narrower types get a floor of a few
/// ulps and a ceiling of `sqrt(eps)` so that a usable range always exists.
pub fn tolerance_range<T: Scalar>() -> (T, T) {
    let eps = T::epsilon();
    let lo = T::lit(1e-15).max(eps * T::lit(4.0));
    let hi = T::lit(1e-6).max(eps.sqrt());
    (lo, hi)
}

//! Scalar abstraction shared by every numeric routine in the crate.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating point type the geometry, maps and losses are computed in.
///
/// Implemented for `f32` and `f64`. Map tensors are exchanged as `f32`;
/// gradient checks and anything numerically delicate run in `f64`.
pub trait Scalar:
    Float + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Converts an `f64` literal into this scalar.
    fn lit(x: f64) -> Self;

    /// Converts a pixel index into this scalar.
    fn from_index(i: usize) -> Self;

    fn to_f64_lossy(self) -> f64;

    /// Relative tolerance used by the geometry kernels: a few hundred ulps.
    fn geometric_tolerance() -> Self {
        Self::epsilon() * Self::lit(256.0)
    }
}

macro_rules! impl_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            #[inline]
            fn lit(x: f64) -> Self {
                x as $t
            }

            #[inline]
            fn from_index(i: usize) -> Self {
                i as $t
            }

            #[inline]
            fn to_f64_lossy(self) -> f64 {
                self as f64
            }
        }
    };
}

impl_scalar!(f32);
impl_scalar!(f64);

/// Rounds half away from zero and converts to a signed pixel index.
///
/// Returns `None` for non-finite values or values outside the `i64` range.
#[inline]
pub(crate) fn round_to_index<T: Scalar>(v: T) -> Option<i64> {
    if !v.is_finite() {
        return None;
    }
    v.round().to_i64()
}

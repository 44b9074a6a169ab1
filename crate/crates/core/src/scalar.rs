//! Scalar abstraction shared by all numerical code.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use ndarray::{LinalgScalar, ScalarOperand};
use num_traits::{Float, FromPrimitive, NumAssignOps};

/// Real floating-point type the numerical core is generic over (`f32` or `f64`).
///
/// Binary containers always store values widened to `f64`; narrowing back is
/// exact for both implementors, so round-trips are bit-exact.
pub trait Scalar:
    Float
    + FromPrimitive
    + NumAssignOps
    + LinalgScalar
    + ScalarOperand
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Short tag written into binary containers.
    const TAG: &'static str;

    /// Unit roundoff of the type.
    fn unit_roundoff() -> Self {
        Self::epsilon()
    }
}

impl Scalar for f32 {
    const TAG: &'static str = "f32";
}

impl Scalar for f64 {
    const TAG: &'static str = "f64";
}

/// Converts an `f64` literal into the working scalar type.
#[inline]
pub fn cast<T: Scalar>(x: f64) -> T {
    T::from_f64(x).expect("f64 value representable in scalar type")
}

#[inline]
pub(crate) fn from_usize<T: Scalar>(x: usize) -> T {
    T::from_usize(x).expect("usize representable in scalar type")
}

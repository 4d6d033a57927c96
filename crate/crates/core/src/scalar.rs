//! Scalar abstraction: all numerics are generic over the real field.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_complex::Complex;
use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Real scalar: f32 or f64.
pub trait Real:
    Float + FromPrimitive + ToPrimitive + NumAssign + Sum + Debug + Display + Send + Sync + 'static
{
}

impl Real for f32 {}
impl Real for f64 {}

/// Complex scalar over a real field.
pub type C<R> = Complex<R>;

/// Shorthand for pulling an f64 literal into the generic field.
pub fn r<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("literal representable in scalar type")
}

/// Lossy view of a generic scalar as f64, for reports and exports.
pub fn as_f64<R: Real>(x: R) -> f64 {
    x.to_f64().expect("scalar convertible to f64")
}

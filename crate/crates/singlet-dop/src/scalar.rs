//! Scalar abstraction: all physics in this crate is generic over the
//! floating-point type. `f64` is the validated precision; `f32` compiles and
//! runs but does not resolve the phase-matching solver tolerances.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate.
pub trait Real:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Debug + Display + Send + Sync + 'static
{
    /// Lossy conversion from `f64`, for constants and tolerances.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 constant representable in scalar type")
    }

    /// Conversion to `f64` for interop (RNG distributions, serialization).
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// sin(x)/x with a series expansion near zero.
pub fn sinc<T: Real>(x: T) -> T {
    if x.abs() < T::of(1e-4) {
        let x2 = x * x;
        T::one() - x2 / T::of(6.0) + x2 * x2 / T::of(120.0)
    } else {
        x.sin() / x
    }
}

/// Positive argument x at which sinc²(x) = 1/2; the half-power point of the
/// sinc² conversion-efficiency profile.
pub const HALF_POWER_SINC_ARG: f64 = 1.391_557_378_251_51;

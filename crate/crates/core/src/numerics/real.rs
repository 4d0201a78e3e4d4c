use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst};

/// Floating-point element type used by every kernel.
///
/// `f32` is the training precision and `f64` the verification precision used
/// by gradient checks. Both share the same code paths.
pub trait Real:
    Float + FloatConst + Sum + Default + Debug + Display + Send + Sync + 'static
{
    fn erf(self) -> Self;

    fn erfc(self) -> Self;

    fn from_f64(x: f64) -> Self;

    fn as_f64(self) -> f64;

    fn from_usize(n: usize) -> Self {
        Self::from_f64(n as f64)
    }
}

impl Real for f32 {
    fn erf(self) -> Self {
        libm::erff(self)
    }

    fn erfc(self) -> Self {
        libm::erfcf(self)
    }

    fn from_f64(x: f64) -> Self {
        x as f32
    }

    fn as_f64(self) -> f64 {
        self as f64
    }
}

impl Real for f64 {
    fn erf(self) -> Self {
        libm::erf(self)
    }

    fn erfc(self) -> Self {
        libm::erfc(self)
    }

    fn from_f64(x: f64) -> Self {
        x
    }

    fn as_f64(self) -> f64 {
        self
    }
}

//! Floating-point scalar abstraction shared by every algorithm.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

/// Real scalar the solvers are generic over (`f32` or `f64`).
pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Sum + Default + Debug + Display + Send + Sync + 'static
{
    /// Smallest absolute tolerance that is meaningful at this precision.
    const TOLERANCE_FLOOR: f64;

    /// Converts an `f64` literal. Never fails for finite input.
    #[inline]
    fn of(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 converts to scalar")
    }

    /// `base` raised to the precision floor of this type.
    #[inline]
    fn tol(base: f64) -> Self {
        Self::of(base.max(Self::TOLERANCE_FLOOR))
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f64 {
    const TOLERANCE_FLOOR: f64 = 0.0;
}

impl Scalar for f32 {
    const TOLERANCE_FLOOR: f64 = 1e-5;
}

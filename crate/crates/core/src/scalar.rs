//! Floating-point abstraction for the certification geometry.
//!
//! Rounded edge lengths are always exact integers; only the cone/circle
//! geometry that certifies potential points runs in floating point, and it is
//! generic over [`Scalar`] so the same code serves `f64` (the default) and
//! `f32`.

use std::fmt::{Debug, Display};

use num_traits::{Float, FloatConst, FromPrimitive, ToPrimitive};

pub trait Scalar:
    Float + FloatConst + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Strictness margin used when the caller does not pick one. Large enough
    /// to absorb rounding error at TSPLIB coordinate magnitudes.
    const DEFAULT_MARGIN: f64;

    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 is representable")
    }

    #[inline]
    fn of_len(l: i64) -> Self {
        Self::from_i64(l).expect("length is representable")
    }

    #[inline]
    fn half() -> Self {
        Self::of(0.5)
    }

    /// Clamps into `[-1, 1]` before `acos`; NaN is mapped to 1.
    #[inline]
    fn clamp_unit(self) -> Self {
        if self.is_nan() {
            Self::one()
        } else {
            self.max(-Self::one()).min(Self::one())
        }
    }
}

impl Scalar for f32 {
    const DEFAULT_MARGIN: f64 = 1e-2;
}

impl Scalar for f64 {
    const DEFAULT_MARGIN: f64 = 1e-6;
}

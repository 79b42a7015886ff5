//! Scalar abstraction shared by the numerical modules.
//!
//! Everything that diagonalizes or integrates is written against [`Real`], so the
//! same code runs in `f64` (the default everywhere) or `f32`. The closed-form
//! rational maps only need field arithmetic and are generic over [`Field`], which
//! additionally admits exact rationals such as [`crate::Rational`].

use std::fmt::{Debug, Display};

use nalgebra::{Complex, RealField};
use num_traits::{FromPrimitive, Num, ToPrimitive};

/// Real floating-point scalar usable with dense complex matrices.
pub trait Real: RealField + Copy + FromPrimitive + ToPrimitive + Display + Debug + Default + Send + Sync {
    /// Converts an `f64` literal, panicking only for types that cannot represent it.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in scalar type")
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Field arithmetic over values constructible from integers.
///
/// Implemented for any `Num + FromPrimitive + PartialOrd + Clone`, which covers
/// `f32`, `f64` and `num_rational::Ratio<i64>`.
pub trait Field: Num + FromPrimitive + PartialOrd + Clone + Debug {
    fn int(n: i64) -> Self {
        Self::from_i64(n).expect("integer representable in field")
    }
}

impl<T: Num + FromPrimitive + PartialOrd + Clone + Debug> Field for T {}

/// Shorthand for building a complex number from its parts.
pub(crate) fn cx<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

pub(crate) fn cr<T: Real>(re: T) -> Complex<T> {
    Complex::new(re, T::zero())
}

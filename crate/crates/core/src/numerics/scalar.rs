use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, Neg, SubAssign};

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign};

/// Real floating-point type the numerical kernels are written against (`f32` or `f64`).
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + NumAssign
    + Sum
    + Debug
    + Display
    + Default
    + Send
    + Sync
    + 'static
    + Scalar<Real = Self>
{
    /// Converts an `f64` literal; constants that do not fit saturate like `as`.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).unwrap_or_else(Self::zero)
    }

    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).unwrap_or_else(Self::max_value)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Matrix element: a real or complex number over some [`Real`] base type.
pub trait Scalar:
    Num
    + NumAssign
    + Copy
    + Neg<Output = Self>
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum
    + Debug
    + Default
    + Send
    + Sync
    + 'static
{
    type Real: Real;

    fn modulus(self) -> Self::Real;
    fn from_real(x: Self::Real) -> Self;
    fn conjugate(self) -> Self;
    fn finite(self) -> bool;
}

macro_rules! impl_real_scalar {
    ($t:ty) => {
        impl Scalar for $t {
            type Real = $t;

            #[inline]
            fn modulus(self) -> $t {
                self.abs()
            }
            #[inline]
            fn from_real(x: $t) -> $t {
                x
            }
            #[inline]
            fn conjugate(self) -> $t {
                self
            }
            #[inline]
            fn finite(self) -> bool {
                <$t>::is_finite(self)
            }
        }
    };
}

impl_real_scalar!(f32);
impl_real_scalar!(f64);

impl<T: Real> Scalar for Complex<T> {
    type Real = T;

    #[inline]
    fn modulus(self) -> T {
        self.norm()
    }
    #[inline]
    fn from_real(x: T) -> Self {
        Complex::new(x, T::zero())
    }
    #[inline]
    fn conjugate(self) -> Self {
        Complex::conj(&self)
    }
    #[inline]
    fn finite(self) -> bool {
        Float::is_finite(self.re) && Float::is_finite(self.im)
    }
}

/// Shorthand for `Complex::new(re, im)`.
#[inline]
pub fn c<T: Real>(re: T, im: T) -> Complex<T> {
    Complex::new(re, im)
}

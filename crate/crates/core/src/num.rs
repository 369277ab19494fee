//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All state, operator and spectrum types are generic over [`Real`], which is
//! implemented for `f32` and `f64`. Tolerances are written against `f64` and
//! widened automatically for lower-precision scalars through [`Real::tol`].

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_complex::Complex;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};
use serde::de::DeserializeOwned;
use serde::Serialize;

/// Floating point scalar used throughout the simulator.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + for<'a> Sum<&'a Self>
    + Debug
    + Display
    + FromStr
    + Default
    + Send
    + Sync
    + Serialize
    + DeserializeOwned
    + 'static
{
    /// Converts an `f64` literal into this scalar type.
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable in scalar type")
    }

    /// A tolerance of `x` (stated for `f64`), floored at 64 ulps of this type.
    fn tol(x: f64) -> Self {
        let floor = Self::epsilon() * Self::lit(64.0);
        Self::lit(x).max(floor)
    }

    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar converts to f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// `e^{iθ}`.
pub fn cis<T: Real>(theta: T) -> Complex<T> {
    Complex::new(theta.cos(), theta.sin())
}

pub(crate) fn c<T: Real>(re: f64, im: f64) -> Complex<T> {
    Complex::new(T::lit(re), T::lit(im))
}

pub(crate) fn re<T: Real>(x: T) -> Complex<T> {
    Complex::new(x, T::zero())
}

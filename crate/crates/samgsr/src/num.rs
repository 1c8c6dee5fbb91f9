//! Scalar abstraction for the numeric core.
//!
//! Everything numerical in this crate is generic over [`Real`], which is
//! satisfied by `f32` and `f64`. Concrete aliases for the common `f64`
//! instantiation live at the crate root.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};
use serde::{de::DeserializeOwned, Serialize};

/// Floating-point scalar used throughout the core: `f32` or `f64`.
pub trait Real:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum<Self>
    + Debug
    + Display
    + Serialize
    + DeserializeOwned
    + Send
    + Sync
    + 'static
{
}

impl<T> Real for T where
    T: Float
        + NumAssign
        + FromPrimitive
        + ToPrimitive
        + Sum<T>
        + Debug
        + Display
        + Serialize
        + DeserializeOwned
        + Send
        + Sync
        + 'static
{
}

/// Convert an `f64` constant into the scalar type.
#[inline]
pub(crate) fn real<R: Real>(x: f64) -> R {
    R::from_f64(x).expect("f64 constant representable in scalar type")
}

/// Convert a count into the scalar type.
#[inline]
pub(crate) fn real_usize<R: Real>(n: usize) -> R {
    R::from_usize(n).expect("count representable in scalar type")
}

/// Numerically stable logistic function.
#[inline]
pub fn sigmoid<R: Real>(x: R) -> R {
    if x >= R::zero() {
        R::one() / (R::one() + (-x).exp())
    } else {
        let e = x.exp();
        e / (R::one() + e)
    }
}

//! Scalar abstraction: every estimator in this crate is generic over a
//! floating-point type implementing [`Real`].

use std::fmt;
use std::iter::Sum;
use std::ops::{AddAssign, DivAssign, MulAssign, SubAssign};

use num_traits::{Float, FromPrimitive, ToPrimitive};

/// Floating-point scalar usable throughout the crate (f32 or f64).
pub trait Real:
    Float
    + FromPrimitive
    + ToPrimitive
    + AddAssign
    + SubAssign
    + MulAssign
    + DivAssign
    + Sum<Self>
    + fmt::Display
    + fmt::Debug
    + Send
    + Sync
    + 'static
{
    /// Lift an f64 constant into this scalar type.
    #[inline]
    fn of(v: f64) -> Self {
        Self::from_f64(v).expect("constant not representable")
    }

    #[inline]
    fn lossy_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable")
    }

    /// Working tolerance for iterative solvers, scaled to the type's epsilon.
    #[inline]
    fn solver_eps() -> Self {
        Self::epsilon() * Self::of(32.0)
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// A value plus a flag recording that a boundary clamp was applied while
/// producing it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flagged<T> {
    pub value: T,
    pub clamped: bool,
}

impl<T> Flagged<T> {
    pub fn exact(value: T) -> Self {
        Flagged {
            value,
            clamped: false,
        }
    }

    pub fn clamped(value: T) -> Self {
        Flagged {
            value,
            clamped: true,
        }
    }
}

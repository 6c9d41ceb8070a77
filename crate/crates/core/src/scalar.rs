//! Numeric values used for labels, registers and rewards.

use std::fmt::{Debug, Display};

use num_traits::{FromPrimitive, Num, ToPrimitive};

/// A totally ordered value type on which the min/max/complement lattice over
/// `[0, 1]` can be computed.
///
/// Implemented for `f32`, `f64` and [`num_rational::Rational64`]. NaN is not a
/// valid label, so `PartialOrd` is treated as total.
pub trait Scalar:
    Num + Copy + PartialOrd + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    #[inline]
    fn min_of(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    #[inline]
    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// `1 - self`.
    #[inline]
    fn complement(self) -> Self {
        Self::one() - self
    }

    /// Whether the value lies in the closed unit interval.
    #[inline]
    fn in_unit(self) -> bool {
        self >= Self::zero() && self <= Self::one()
    }

    #[inline]
    fn is_crisp(self) -> bool {
        self == Self::zero() || self == Self::one()
    }

    fn from_f64_checked(v: f64) -> Option<Self> {
        if v.is_finite() {
            Self::from_f64(v)
        } else {
            None
        }
    }

    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl<T> Scalar for T where
    T: Num
        + Copy
        + PartialOrd
        + FromPrimitive
        + ToPrimitive
        + Debug
        + Display
        + Send
        + Sync
        + 'static
{
}

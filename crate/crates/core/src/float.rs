//! Scalar abstraction: all numeric code in this crate is generic over [`Float`].

use std::fmt::{Debug, Display};

use num_traits::{Float as NumFloat, FromPrimitive, ToPrimitive};

/// Floating-point scalar the engine computes with: `f32` or `f64`.
pub trait Float:
    NumFloat + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
    /// Conversion from an `f64` constant. Panics on values a scalar cannot
    /// represent at all (never the case for the finite constants used here).
    #[inline]
    fn c(value: f64) -> Self {
        Self::from_f64(value).expect("finite f64 constant")
    }

    /// Conversion from a count.
    #[inline]
    fn from_count(value: usize) -> Self {
        Self::from_usize(value).expect("count representable as float")
    }
}

impl<T> Float for T where
    T: NumFloat + FromPrimitive + ToPrimitive + Debug + Display + Send + Sync + 'static
{
}

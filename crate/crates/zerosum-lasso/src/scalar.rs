//! Scalar abstraction: every numerical routine in this crate is generic over
//! the floating-point type, with `f32` and `f64` as the provided instances.

use std::fmt::{Debug, Display};
use std::iter::Sum;
use std::str::FromStr;

use num_traits::{Float, FromPrimitive, NumAssign, ToPrimitive};

/// Floating-point scalar used by the solver and the data pipeline.
pub trait Scalar:
    Float
    + NumAssign
    + FromPrimitive
    + ToPrimitive
    + Sum
    + FromStr
    + Debug
    + Display
    + Send
    + Sync
    + 'static
{
    /// Converts an `f64` constant (tolerances, defaults) into this type.
    #[inline]
    fn cast(v: f64) -> Self {
        Self::from_f64(v).expect("finite f64 constant must convert")
    }

    /// Raw bit pattern, widened to 64 bits; used to hash columns when
    /// scanning for duplicates.
    fn bit_pattern(self) -> u64;
}

impl Scalar for f32 {
    #[inline]
    fn bit_pattern(self) -> u64 {
        u64::from(self.to_bits())
    }
}

impl Scalar for f64 {
    #[inline]
    fn bit_pattern(self) -> u64 {
        self.to_bits()
    }
}

//! Floating-point abstraction shared by the numeric modules.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use num_traits::{Float, FromPrimitive, NumAssign};

/// Real scalar used for centroids, distances and correlation values.
///
/// Implemented for `f32` and `f64`. Binary feature sums are exact in both
/// types as long as cluster sizes stay below `2^24`, which keeps incremental
/// centroid updates bit-identical to a from-scratch mean.
pub trait Scalar:
    Float + FromPrimitive + NumAssign + Sum + Debug + Display + Default + Send + Sync + 'static
{
    /// Lifts a binary feature cell into the scalar domain.
    #[inline]
    fn from_bit(bit: u8) -> Self {
        if bit == 0 {
            Self::zero()
        } else {
            Self::one()
        }
    }

    /// Converts a count, panicking only if the count is not representable.
    #[inline]
    fn from_count(n: usize) -> Self {
        Self::from_usize(n).expect("count not representable in scalar type")
    }

    /// Lossy conversion used when reporting values as `f64`.
    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn from_bit_maps_zero_and_one() {
        assert_eq!(f64::from_bit(0), 0.0);
        assert_eq!(f64::from_bit(1), 1.0);
        assert_eq!(f32::from_bit(1), 1.0);
    }

    #[test]
    fn counts_convert_exactly() {
        assert_eq!(f64::from_count(10), 10.0);
        assert_eq!(f32::from_count(1 << 20), 1_048_576.0);
    }
}

//! Fixed-point scalar used for every physics quantity.

use std::ops::{Add, AddAssign, Neg, Sub, SubAssign};

use serde::{Deserialize, Serialize};

/// Signed fixed-point value with 8 fractional bits: one pixel is 256 units.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Fixed(i32);

impl Fixed {
    pub const FRAC_BITS: u32 = 8;
    pub const ONE: Fixed = Fixed(1 << Self::FRAC_BITS);
    pub const ZERO: Fixed = Fixed(0);

    pub const fn from_raw(raw: i32) -> Self {
        Fixed(raw)
    }

    pub const fn raw(self) -> i32 {
        self.0
    }

    pub const fn from_px(px: i32) -> Self {
        Fixed(px << Self::FRAC_BITS)
    }

    /// Whole pixels, rounding toward negative infinity.
    pub const fn to_px(self) -> i32 {
        self.0 >> Self::FRAC_BITS
    }

    pub fn min(self, other: Fixed) -> Fixed {
        Fixed(self.0.min(other.0))
    }

    pub fn max(self, other: Fixed) -> Fixed {
        Fixed(self.0.max(other.0))
    }

    pub fn abs(self) -> Fixed {
        Fixed(self.0.abs())
    }

    pub fn signum(self) -> i32 {
        self.0.signum()
    }
}

impl Add for Fixed {
    type Output = Fixed;
    fn add(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 + rhs.0)
    }
}

impl Sub for Fixed {
    type Output = Fixed;
    fn sub(self, rhs: Fixed) -> Fixed {
        Fixed(self.0 - rhs.0)
    }
}

impl AddAssign for Fixed {
    fn add_assign(&mut self, rhs: Fixed) {
        self.0 += rhs.0;
    }
}

impl SubAssign for Fixed {
    fn sub_assign(&mut self, rhs: Fixed) {
        self.0 -= rhs.0;
    }
}

impl Neg for Fixed {
    type Output = Fixed;
    fn neg(self) -> Fixed {
        Fixed(-self.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn floor_semantics_for_negative_values() {
        assert_eq!(Fixed::from_raw(-1).to_px(), -1);
        assert_eq!(Fixed::from_raw(255).to_px(), 0);
        assert_eq!(Fixed::from_raw(256).to_px(), 1);
    }

    proptest! {
        #[test]
        fn pixel_round_trip_is_lossless(px in -(1 << 22)..(1i32 << 22)) {
            prop_assert_eq!(Fixed::from_px(px).to_px(), px);
        }
    }
}

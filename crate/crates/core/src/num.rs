// SPDX-License-Identifier: Apache-2.0

//! Exact signed integers with an `i128` fast path.
//!
//! Register values are unbounded in principle (vectors wider than 64 bits
//! exist), but almost every value seen in practice fits a machine word.
//! [`Num`] keeps those in an `i128` and only spills to [`BigInt`] when an
//! operation overflows. The representation is canonical: a value that fits
//! an `i128` is never stored as `Big`, so derived equality is value equality.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{Signed, ToPrimitive};

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Num {
    Small(i128),
    Big(BigInt),
}

impl Num {
    pub const ZERO: Num = Num::Small(0);
    pub const ONE: Num = Num::Small(1);

    fn from_big(b: BigInt) -> Num {
        match b.to_i128() {
            Some(v) => Num::Small(v),
            None => Num::Big(b),
        }
    }

    pub fn to_bigint(&self) -> BigInt {
        match self {
            Num::Small(v) => BigInt::from(*v),
            Num::Big(b) => b.clone(),
        }
    }

    pub fn as_i128(&self) -> Option<i128> {
        match self {
            Num::Small(v) => Some(*v),
            Num::Big(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Num::Small(0))
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Num::Small(v) => *v < 0,
            Num::Big(b) => b.is_negative(),
        }
    }

    pub fn signum(&self) -> i32 {
        match self {
            Num::Small(v) => v.signum() as i32,
            Num::Big(b) => {
                if b.is_negative() {
                    -1
                } else {
                    1
                }
            }
        }
    }

    pub fn abs(&self) -> Num {
        match self {
            Num::Small(v) => match v.checked_abs() {
                Some(a) => Num::Small(a),
                None => Num::from_big(BigInt::from(*v).abs()),
            },
            Num::Big(b) => Num::from_big(b.abs()),
        }
    }

    pub fn neg(&self) -> Num {
        match self {
            Num::Small(v) => match v.checked_neg() {
                Some(n) => Num::Small(n),
                None => Num::from_big(-BigInt::from(*v)),
            },
            Num::Big(b) => Num::from_big(-b),
        }
    }

    pub fn add(&self, other: &Num) -> Num {
        if let (Num::Small(a), Num::Small(b)) = (self, other) {
            if let Some(s) = a.checked_add(*b) {
                return Num::Small(s);
            }
        }
        Num::from_big(self.to_bigint() + other.to_bigint())
    }

    pub fn sub(&self, other: &Num) -> Num {
        if let (Num::Small(a), Num::Small(b)) = (self, other) {
            if let Some(s) = a.checked_sub(*b) {
                return Num::Small(s);
            }
        }
        Num::from_big(self.to_bigint() - other.to_bigint())
    }

    pub fn mul(&self, other: &Num) -> Num {
        if let (Num::Small(a), Num::Small(b)) = (self, other) {
            if let Some(p) = a.checked_mul(*b) {
                return Num::Small(p);
            }
        }
        Num::from_big(self.to_bigint() * other.to_bigint())
    }

    /// Exact division; the caller guarantees `other` divides `self`.
    pub fn div_exact(&self, other: &Num) -> Num {
        if let (Num::Small(a), Num::Small(b)) = (self, other) {
            if let Some(q) = a.checked_div(*b) {
                return Num::Small(q);
            }
        }
        Num::from_big(self.to_bigint() / other.to_bigint())
    }

    /// Euclidean remainder, always in `[0, |m|)`.
    pub fn rem_euclid(&self, m: &Num) -> Num {
        if let (Num::Small(a), Num::Small(b)) = (self, m) {
            if let Some(r) = a.checked_rem_euclid(*b) {
                return Num::Small(r);
            }
        }
        let m = m.to_bigint().abs();
        Num::from_big(self.to_bigint().mod_floor(&m))
    }

    /// Nonnegative gcd; `gcd(0, 0) == 0`.
    pub fn gcd(&self, other: &Num) -> Num {
        if let (Num::Small(a), Num::Small(b)) = (self, other) {
            if let (Some(mut x), Some(mut y)) = (a.checked_abs(), b.checked_abs()) {
                while y != 0 {
                    let t = x % y;
                    x = y;
                    y = t;
                }
                return Num::Small(x);
            }
        }
        Num::from_big(self.to_bigint().gcd(&other.to_bigint()))
    }

    /// `true` when `self` is an exact multiple of `m` (`m != 0`).
    pub fn divisible_by(&self, m: &Num) -> bool {
        self.rem_euclid(m).is_zero()
    }
}

impl Ord for Num {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Num::Small(a), Num::Small(b)) => a.cmp(b),
            _ => self.to_bigint().cmp(&other.to_bigint()),
        }
    }
}

impl PartialOrd for Num {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl From<i128> for Num {
    fn from(v: i128) -> Self {
        Num::Small(v)
    }
}

impl From<i64> for Num {
    fn from(v: i64) -> Self {
        Num::Small(v as i128)
    }
}

impl From<u64> for Num {
    fn from(v: u64) -> Self {
        Num::Small(v as i128)
    }
}

impl From<i32> for Num {
    fn from(v: i32) -> Self {
        Num::Small(v as i128)
    }
}

impl From<BigInt> for Num {
    fn from(b: BigInt) -> Self {
        Num::from_big(b)
    }
}

impl From<BigUint> for Num {
    fn from(b: BigUint) -> Self {
        Num::from_big(BigInt::from_biguint(Sign::Plus, b))
    }
}

impl FromStr for Num {
    type Err = num_bigint::ParseBigIntError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if let Ok(v) = s.parse::<i128>() {
            return Ok(Num::Small(v));
        }
        s.parse::<BigInt>().map(Num::from_big)
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Small(v) => write!(f, "{v}"),
            Num::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Default for Num {
    fn default() -> Self {
        Num::ZERO
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn overflow_spills_to_big_and_back() {
        let big = Num::Small(i128::MAX).add(&Num::ONE);
        assert!(matches!(big, Num::Big(_)));
        assert_eq!(big.sub(&Num::ONE), Num::Small(i128::MAX));
        let sq = Num::from(u64::MAX).mul(&Num::from(u64::MAX));
        assert_eq!(sq.to_string(), "340282366920938463426481119284349108225");
    }

    #[test]
    fn gcd_and_rem() {
        assert_eq!(Num::from(12).gcd(&Num::from(-18)), Num::from(6));
        assert_eq!(Num::ZERO.gcd(&Num::ZERO), Num::ZERO);
        assert_eq!(Num::from(-1).rem_euclid(&Num::from(4)), Num::from(3));
        assert_eq!(Num::Small(i128::MIN).abs().to_bigint(), BigInt::from(i128::MIN).abs());
    }

    #[test]
    fn parse_wide_decimal() {
        let n: Num = "1361129467683753853853498429727072845824".parse().unwrap();
        assert!(matches!(n, Num::Big(_)));
        assert_eq!(n.to_string(), "1361129467683753853853498429727072845824");
        assert_eq!("-1".parse::<Num>().unwrap(), Num::from(-1));
    }

    proptest! {
        #[test]
        fn ops_agree_with_bigint(a in any::<i128>(), b in any::<i128>()) {
            let (x, y) = (Num::from(a), Num::from(b));
            let (bx, by) = (BigInt::from(a), BigInt::from(b));
            prop_assert_eq!(x.add(&y).to_bigint(), &bx + &by);
            prop_assert_eq!(x.sub(&y).to_bigint(), &bx - &by);
            prop_assert_eq!(x.mul(&y).to_bigint(), &bx * &by);
            prop_assert_eq!(x.gcd(&y).to_bigint(), bx.gcd(&by));
            prop_assert_eq!(x.cmp(&y), bx.cmp(&by));
            if b != 0 {
                prop_assert_eq!(x.rem_euclid(&y).to_bigint(), bx.mod_floor(&by.abs()));
            }
        }
    }
}

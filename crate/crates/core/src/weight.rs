//! Exact rational edge weights and their extension with infinities.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;

/// An exact rational number, always kept in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Weight(BigRational);

impl Weight {
    pub fn zero() -> Self {
        Weight(BigRational::zero())
    }

    pub fn one() -> Self {
        Weight(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Weight(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `numer / denom`. Panics when `denom == 0`.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Weight(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn from_big(numer: BigInt, denom: BigInt) -> Option<Self> {
        if denom.is_zero() {
            return None;
        }
        Some(Weight(BigRational::new(numer, denom)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Weight(self.0.abs())
    }

    pub fn signum(&self) -> i32 {
        if self.0.is_zero() {
            0
        } else if self.0.is_positive() {
            1
        } else {
            -1
        }
    }

    /// Integer value, when the weight is an integer that fits in `i64`.
    pub fn to_i64(&self) -> Option<i64> {
        if self.0.is_integer() {
            self.0.numer().to_i64()
        } else {
            None
        }
    }

    pub fn recip(&self) -> Option<Self> {
        if self.0.is_zero() {
            None
        } else {
            Some(Weight(self.0.recip()))
        }
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    /// Least common multiple of the denominators of `weights` (1 for an empty
    /// input).
    pub fn common_denominator<'a>(weights: impl IntoIterator<Item = &'a Weight>) -> BigInt {
        weights
            .into_iter()
            .fold(BigInt::one(), |acc, w| acc.lcm(w.denom()))
    }
}

impl From<i64> for Weight {
    fn from(n: i64) -> Self {
        Weight::from_int(n)
    }
}

impl From<BigRational> for Weight {
    fn from(r: BigRational) -> Self {
        Weight(r)
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Weight {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::new(0, format!("invalid rational `{s}`"));
        let s = s.trim();
        match s.split_once('/') {
            None => {
                let n: BigInt = s.parse().map_err(|_| bad())?;
                Ok(Weight(BigRational::from_integer(n)))
            }
            Some((p, q)) => {
                let n: BigInt = p.trim().parse().map_err(|_| bad())?;
                let d: BigInt = q.trim().parse().map_err(|_| bad())?;
                if !d.is_positive() {
                    return Err(bad());
                }
                Ok(Weight(BigRational::new(n, d)))
            }
        }
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($tr:ident, $method:ident, $op:tt) => {
        impl $tr<Weight> for Weight {
            type Output = Weight;
            fn $method(self, rhs: Weight) -> Weight {
                Weight(self.0 $op rhs.0)
            }
        }
        impl<'a> $tr<&'a Weight> for Weight {
            type Output = Weight;
            fn $method(self, rhs: &'a Weight) -> Weight {
                Weight(self.0 $op &rhs.0)
            }
        }
        impl<'a> $tr<&'a Weight> for &'a Weight {
            type Output = Weight;
            fn $method(self, rhs: &'a Weight) -> Weight {
                Weight(&self.0 $op &rhs.0)
            }
        }
    };
}

forward_binop!(Add, add, +);
forward_binop!(Sub, sub, -);
forward_binop!(Mul, mul, *);

impl Div<&Weight> for &Weight {
    type Output = Weight;
    fn div(self, rhs: &Weight) -> Weight {
        assert!(!rhs.is_zero(), "division by zero weight");
        Weight(&self.0 / &rhs.0)
    }
}

impl AddAssign<&Weight> for Weight {
    fn add_assign(&mut self, rhs: &Weight) {
        self.0 += &rhs.0;
    }
}

impl Neg for Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-self.0)
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(-&self.0)
    }
}

impl<'a> Sum<&'a Weight> for Weight {
    fn sum<I: Iterator<Item = &'a Weight>>(iter: I) -> Weight {
        let mut acc = Weight::zero();
        for w in iter {
            acc += w;
        }
        acc
    }
}

/// A value of `ℚ ∪ {−∞, +∞}`, totally ordered.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Extended {
    NegInf,
    Finite(Weight),
    PosInf,
}

impl Extended {
    pub fn finite(&self) -> Option<&Weight> {
        match self {
            Extended::Finite(w) => Some(w),
            _ => None,
        }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Extended::Finite(_))
    }

    fn rank(&self) -> u8 {
        match self {
            Extended::NegInf => 0,
            Extended::Finite(_) => 1,
            Extended::PosInf => 2,
        }
    }

    /// `self + w`; infinities absorb finite summands.
    pub fn add_finite(&self, w: &Weight) -> Extended {
        match self {
            Extended::Finite(x) => Extended::Finite(x + w),
            other => other.clone(),
        }
    }
}

impl From<Weight> for Extended {
    fn from(w: Weight) -> Self {
        Extended::Finite(w)
    }
}

impl PartialOrd for Extended {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Extended {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Extended::Finite(a), Extended::Finite(b)) => a.cmp(b),
            _ => self.rank().cmp(&other.rank()),
        }
    }
}

impl fmt::Display for Extended {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Extended::NegInf => f.write_str("-inf"),
            Extended::PosInf => f.write_str("+inf"),
            Extended::Finite(w) => write!(f, "{w}"),
        }
    }
}

impl FromStr for Extended {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "+inf" | "inf" => Ok(Extended::PosInf),
            "-inf" => Ok(Extended::NegInf),
            other => other.parse().map(Extended::Finite),
        }
    }
}

impl Serialize for Extended {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Extended {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduced_and_exact() {
        let w = Weight::ratio(4, -8);
        assert_eq!(w.to_string(), "-1/2");
        assert!(w.denom() > &BigInt::zero());
        let sum: Weight = [Weight::ratio(1, 3), Weight::ratio(2, 3)].iter().sum();
        assert_eq!(sum, Weight::one());
    }

    #[test]
    fn parse_forms() {
        assert_eq!("3".parse::<Weight>().unwrap(), Weight::from_int(3));
        assert_eq!("-6/4".parse::<Weight>().unwrap(), Weight::ratio(-3, 2));
        assert!("1/0".parse::<Weight>().is_err());
        assert!("1/-2".parse::<Weight>().is_err());
        assert!("x".parse::<Weight>().is_err());
    }

    #[test]
    fn extended_order() {
        let xs = [
            Extended::PosInf,
            Extended::Finite(Weight::from_int(-5)),
            Extended::NegInf,
            Extended::Finite(Weight::from_int(2)),
        ];
        let mut sorted = xs.to_vec();
        sorted.sort();
        assert_eq!(sorted[0], Extended::NegInf);
        assert_eq!(sorted[3], Extended::PosInf);
        assert_eq!("+inf".parse::<Extended>().unwrap(), Extended::PosInf);
    }

    #[test]
    fn common_denominator_lcm() {
        let ws = [Weight::ratio(1, 4), Weight::ratio(1, 6), Weight::from_int(3)];
        assert_eq!(Weight::common_denominator(ws.iter()), BigInt::from(12));
    }
}

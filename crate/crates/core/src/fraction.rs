//! Exact rationals for every parameter and threshold.

use std::fmt;
use std::str::FromStr;

use num::bigint::{BigInt, BigUint};
use num::rational::BigRational;
use num::{Integer, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// Reduced rational with a positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ExactFraction(BigRational);

impl ExactFraction {
    pub fn new(numer: i64, denom: i64) -> Result<Self, Error> {
        if denom == 0 {
            return Err(Error::Parameter("zero denominator".into()));
        }
        Ok(Self(BigRational::new(numer.into(), denom.into())))
    }

    pub fn from_integer(v: i64) -> Self {
        Self(BigRational::from_integer(v.into()))
    }

    pub fn from_big(r: BigRational) -> Self {
        Self(r)
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }

    pub fn zero() -> Self {
        Self(BigRational::zero())
    }

    pub fn one() -> Self {
        Self(BigRational::one())
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    /// True when strictly between 0 and 1.
    pub fn in_open_unit(&self) -> bool {
        self.0.is_positive() && self.0 < BigRational::one()
    }

    pub fn one_minus(&self) -> Self {
        Self(BigRational::one() - &self.0)
    }

    pub fn recip(&self) -> Self {
        Self(self.0.recip())
    }

    pub fn mul_int(&self, v: u64) -> Self {
        Self(&self.0 * BigRational::from_integer(v.into()))
    }

    pub fn floor_u64(&self) -> u64 {
        self.0.floor().to_integer().to_u64().unwrap_or(0)
    }

    pub fn ceil_u64(&self) -> u64 {
        self.0.ceil().to_integer().to_u64().unwrap_or(u64::MAX)
    }

    /// floor(self * v) for nonnegative self.
    pub fn floor_mul(&self, v: u64) -> u64 {
        let n = self.0.numer() * BigInt::from(v);
        n.div_floor(self.0.denom()).to_u64().unwrap_or(0)
    }

    /// ceil(self * v) for nonnegative self.
    pub fn ceil_mul(&self, v: u64) -> u64 {
        let n = self.0.numer() * BigInt::from(v);
        n.div_ceil(self.0.denom()).to_u64().unwrap_or(u64::MAX)
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    /// Smallest integer t with 2^t >= n^self, i.e. ceil(self * log2 n). Requires self > 0, n >= 1.
    pub fn ceil_times_log2(&self, n: u64) -> u64 {
        if n <= 1 {
            return 0;
        }
        // self = a/b; need 2^(b t) >= n^a.
        let a = self.0.numer().to_u32().expect("numerator fits u32");
        let b = self.0.denom().to_u64().expect("denominator fits u64");
        let target = num::pow(BigUint::from(n), a as usize);
        let bits = target.bits();
        // 2^(bits-1) <= target < 2^bits
        let exact_pow2 = target.trailing_zeros() == Some(bits - 1);
        let need = if exact_pow2 { bits - 1 } else { bits };
        need.div_ceil(b)
    }

    /// floor(2^self) for nonnegative self.
    pub fn floor_pow2(&self) -> BigUint {
        let a = self.0.numer().to_u64().expect("nonnegative exponent");
        let b = self.0.denom().to_u32().expect("denominator fits u32");
        (BigUint::one() << a).nth_root(b)
    }
}

impl fmt::Display for ExactFraction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for ExactFraction {
    type Err = Error;

    /// Accepts "NUM/DEN" or a bare integer; decimals are rejected.
    fn from_str(s: &str) -> Result<Self, Error> {
        let bad = || Error::Parameter(format!("not a fraction NUM/DEN: {s:?}"));
        let (n, d) = match s.trim().split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s.trim(), "1"),
        };
        let n: BigInt = n.parse().map_err(|_| bad())?;
        let d: BigInt = d.parse().map_err(|_| bad())?;
        if !d.is_positive() {
            return Err(Error::Parameter(format!("denominator must be positive: {s:?}")));
        }
        Ok(Self(BigRational::new(n, d)))
    }
}

impl Serialize for ExactFraction {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ExactFraction {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl std::ops::Add for &ExactFraction {
    type Output = ExactFraction;
    fn add(self, o: &ExactFraction) -> ExactFraction {
        ExactFraction(&self.0 + &o.0)
    }
}

impl std::ops::Sub for &ExactFraction {
    type Output = ExactFraction;
    fn sub(self, o: &ExactFraction) -> ExactFraction {
        ExactFraction(&self.0 - &o.0)
    }
}

impl std::ops::Mul for &ExactFraction {
    type Output = ExactFraction;
    fn mul(self, o: &ExactFraction) -> ExactFraction {
        ExactFraction(&self.0 * &o.0)
    }
}

impl std::ops::Div for &ExactFraction {
    type Output = ExactFraction;
    fn div(self, o: &ExactFraction) -> ExactFraction {
        ExactFraction(&self.0 / &o.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(s: &str) -> ExactFraction {
        s.parse().unwrap()
    }

    #[test]
    fn parses_and_reduces() {
        assert_eq!(f("2/4").to_string(), "1/2");
        assert_eq!(f("3").to_string(), "3/1");
        assert!("1/0".parse::<ExactFraction>().is_err());
        assert!("1/-2".parse::<ExactFraction>().is_err());
        assert!("0.5".parse::<ExactFraction>().is_err());
    }

    #[test]
    fn floor_and_ceil() {
        assert_eq!(f("1/13").floor_mul(13), 1);
        assert_eq!(f("1/13").floor_mul(12), 0);
        assert_eq!(f("7/3").ceil_mul(3), 7);
        assert_eq!(f("7/3").ceil_mul(1), 3);
    }

    #[test]
    fn log_threshold() {
        assert_eq!(f("2").ceil_times_log2(256), 16);
        assert_eq!(f("2").ceil_times_log2(32), 10);
        assert_eq!(f("1").ceil_times_log2(5), 3);
        assert_eq!(f("1/2").ceil_times_log2(8), 2);
        assert_eq!(f("1").ceil_times_log2(1), 0);
    }

    #[test]
    fn pow2_floor() {
        assert_eq!(f("3/2").floor_pow2(), BigUint::from(2u32));
        assert_eq!(f("3").floor_pow2(), BigUint::from(8u32));
        assert_eq!(f("1/2").floor_pow2(), BigUint::from(1u32));
    }
}

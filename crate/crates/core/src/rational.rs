//! Exact rationals and closed intervals centered at rationals.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Arbitrary-precision rational number kept in reduced form with positive denominator.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Rational(BigRational);

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let d: BigInt = denom.into();
        assert!(!d.is_zero(), "zero denominator");
        Rational(BigRational::new(numer.into(), d))
    }

    pub fn from_integer(n: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    /// Exact value of a finite binary64 number.
    pub fn from_f64(x: f64) -> Option<Self> {
        BigRational::from_float(x).map(Rational)
    }

    /// Largest power of two not exceeding `exp(ln_value)`; exact even far below f64 range.
    pub fn dyadic_below_exp(ln_value: f64) -> Option<Self> {
        if !ln_value.is_finite() {
            return None;
        }
        let e = (ln_value / std::f64::consts::LN_2).floor() as i64;
        let two = BigInt::from(2u32);
        Some(if e >= 0 {
            Rational::from_integer(two.pow(e as u32))
        } else {
            Rational::new(BigInt::one(), two.pow((-e) as u32))
        })
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    /// Representative in `[0, 1)`.
    pub fn frac(&self) -> Self {
        let n = self.0.numer().mod_floor(self.0.denom());
        Rational(BigRational::new(n, self.0.denom().clone()))
    }

    pub fn to_f64(&self) -> f64 {
        ratio_to_f64(self.0.numer(), self.0.denom())
    }

    /// Natural logarithm, accurate for magnitudes outside the f64 range.
    pub fn ln(&self) -> f64 {
        if !self.0.is_positive() {
            return f64::NEG_INFINITY;
        }
        ln_big(self.0.numer()) - ln_big(self.0.denom())
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn min(a: &Rational, b: &Rational) -> Rational {
        if a <= b {
            a.clone()
        } else {
            b.clone()
        }
    }
}

pub(crate) fn ln_big(n: &BigInt) -> f64 {
    let bits = n.bits();
    if bits < 1000 {
        return n.to_f64().unwrap_or(f64::INFINITY).abs().ln();
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().unwrap_or(0.0);
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

fn ratio_to_f64(n: &BigInt, d: &BigInt) -> f64 {
    if let (Some(a), Some(b)) = (n.to_i64(), d.to_i64()) {
        if a.unsigned_abs() < (1u64 << 53) && b.unsigned_abs() < (1u64 << 53) {
            return a as f64 / b as f64;
        }
    }
    // Scale so that the integer quotient carries about 64 significant bits.
    let shift = 64 - (n.bits() as i64 - d.bits() as i64);
    let q = if shift >= 0 {
        (n.abs() << shift as usize) / d
    } else {
        n.abs() / (d << (-shift) as usize)
    };
    let v = q.to_f64().unwrap_or(f64::INFINITY) * 2f64.powi(-(shift.clamp(-4000, 4000) as i32));
    if n.sign() == Sign::Minus {
        -v
    } else {
        v
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_integer() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("not a rational: {s:?}"));
        let s = s.trim();
        match s.split_once('/') {
            Some((n, d)) => {
                let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
                let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
                if d.is_zero() {
                    return Err(bad());
                }
                Ok(Rational::new(n, d))
            }
            None => Ok(Rational::from_integer(BigInt::from_str(s).map_err(|_| bad())?)),
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident) => {
        impl std::ops::$tr<&Rational> for &Rational {
            type Output = Rational;
            fn $m(self, rhs: &Rational) -> Rational {
                Rational(std::ops::$tr::$m(&self.0, &rhs.0))
            }
        }
        impl std::ops::$tr<Rational> for Rational {
            type Output = Rational;
            fn $m(self, rhs: Rational) -> Rational {
                Rational(std::ops::$tr::$m(self.0, rhs.0))
            }
        }
    };
}
binop!(Add, add);
binop!(Sub, sub);
binop!(Mul, mul);
binop!(Div, div);

impl std::ops::Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational::from_integer(n)
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::from_integer(n)
    }
}

impl From<BigUint> for Rational {
    fn from(n: BigUint) -> Self {
        Rational::from_integer(BigInt::from(n))
    }
}

/// Closed interval `[center - half_width, center + half_width]`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Interval {
    pub center: Rational,
    pub half_width: Rational,
}

impl Interval {
    pub fn new(center: Rational, half_width: Rational) -> Self {
        Interval { center, half_width }
    }

    /// `[0, 1]`, the interval preceding the first stage.
    pub fn unit() -> Self {
        Interval::new(Rational::new(1, 2), Rational::new(1, 2))
    }

    pub fn lo(&self) -> Rational {
        &self.center - &self.half_width
    }

    pub fn hi(&self) -> Rational {
        &self.center + &self.half_width
    }

    pub fn length(&self) -> Rational {
        &self.half_width + &self.half_width
    }

    pub fn contains_strictly(&self, x: &Rational) -> bool {
        (x - &self.center).abs() < self.half_width
    }

    /// Smallest gap between the two endpoints of `inner` and those of `self`; positive iff
    /// `inner` lies strictly inside.
    pub fn inner_gap(&self, inner: &Interval) -> Rational {
        let left = &inner.lo() - &self.lo();
        let right = &self.hi() - &inner.hi();
        Rational::min(&left, &right)
    }

    pub fn cmp_width(&self, other: &Interval) -> Ordering {
        self.half_width.cmp(&other.half_width)
    }

    /// Evenly spaced points `center + half_width * (2j/count - 1)`, `j = 0..=count`.
    pub fn grid(&self, count: u32) -> Vec<Rational> {
        let count = count.max(1);
        (0..=count)
            .map(|j| {
                let t = Rational::new(2 * j as i64 - count as i64, count as i64);
                &self.center + &(&self.half_width * &t)
            })
            .collect()
    }
}

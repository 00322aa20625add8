//! Exact rational scalars.
//!
//! Every amount in the crate (endowments, peaks, allotments, water levels,
//! preference weights) is a [`Rational`]. Arithmetic is checked: an
//! operation whose result does not fit panics instead of wrapping, so a
//! reported allocation is either exact or never produced.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, Signed, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::Error;

/// A reduced fraction with positive denominator.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(Ratio<i128>);

impl Rational {
    pub const ZERO: Rational = Rational(Ratio::new_raw(0, 1));
    pub const ONE: Rational = Rational(Ratio::new_raw(1, 1));

    /// Builds `numer / denom` in lowest terms. Panics on a zero denominator.
    pub fn new(numer: i128, denom: i128) -> Self {
        Rational(Ratio::new(numer, denom))
    }

    pub fn integer(value: i128) -> Self {
        Rational(Ratio::from_integer(value))
    }

    pub fn numer(&self) -> i128 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i128 {
        *self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn min(self, other: Self) -> Self {
        if other < self {
            other
        } else {
            self
        }
    }

    pub fn max(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }

    /// Clamps into `[lo, hi]`; requires `lo <= hi`.
    pub fn clamp(self, lo: Self, hi: Self) -> Self {
        debug_assert!(lo <= hi);
        self.max(lo).min(hi)
    }

    pub fn checked_add(&self, rhs: &Self) -> Option<Self> {
        self.0.checked_add(&rhs.0).map(Rational)
    }

    pub fn checked_sub(&self, rhs: &Self) -> Option<Self> {
        self.0.checked_sub(&rhs.0).map(Rational)
    }

    pub fn checked_mul(&self, rhs: &Self) -> Option<Self> {
        self.0.checked_mul(&rhs.0).map(Rational)
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        if rhs.is_zero() {
            return None;
        }
        self.0.checked_div(&rhs.0).map(Rational)
    }

    /// Two raised to an integer exponent.
    pub fn pow2(exponent: i32) -> Self {
        assert!(exponent.unsigned_abs() < 120, "exponent out of range");
        if exponent >= 0 {
            Rational::integer(1i128 << exponent)
        } else {
            Rational::new(1, 1i128 << (-exponent))
        }
    }

    /// Canonical `p/q` form used in every serialized file, including `q = 1`.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }

    /// Decimal rendering. Terminating expansions are exact; anything else is
    /// rounded to `digits` places and prefixed with `~`.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        let numer = self.numer();
        let denom = self.denom();
        let negative = numer < 0;
        let mut rest = numer.unsigned_abs();
        let denom = denom as u128;

        let mut d = denom;
        while d % 2 == 0 {
            d /= 2;
        }
        while d % 5 == 0 {
            d /= 5;
        }
        let terminating = d == 1;

        let whole = rest / denom;
        rest %= denom;
        let mut frac = String::new();
        if terminating {
            while rest != 0 {
                rest *= 10;
                frac.push(char::from(b'0' + (rest / denom) as u8));
                rest %= denom;
            }
        } else {
            // round half up on the last kept digit
            let scale = 10u128.pow(digits as u32);
            let scaled = (rest * scale * 2 + denom) / (denom * 2);
            let (whole, scaled) = if scaled >= scale {
                (whole + 1, scaled - scale)
            } else {
                (whole, scaled)
            };
            let sign = if negative { "-" } else { "" };
            return format!("~{sign}{whole}.{scaled:0digits$}");
        }
        let sign = if negative { "-" } else { "" };
        if frac.is_empty() {
            format!("{sign}{whole}")
        } else {
            format!("{sign}{whole}.{frac}")
        }
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.denom() == 1 {
            write!(f, "{}", self.numer())
        } else {
            write!(f, "{}/{}", self.numer(), self.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = Error;

    /// Accepts `p`, `p/q` and decimal literals such as `-13.5`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || Error::ParseRational(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((num, den)) = t.split_once('/') {
            let num: i128 = num.trim().parse().map_err(|_| err())?;
            let den: i128 = den.trim().parse().map_err(|_| err())?;
            if den == 0 {
                return Err(err());
            }
            return Ok(Rational::new(num, den));
        }
        let (negative, digits) = match t.as_bytes()[0] {
            b'-' => (true, &t[1..]),
            b'+' => (false, &t[1..]),
            _ => (false, t),
        };
        let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > 30
        {
            return Err(err());
        }
        let joined = format!("{int_part}{frac_part}");
        let mut numer: i128 = joined.parse().map_err(|_| err())?;
        if negative {
            numer = -numer;
        }
        let denom = 10i128
            .checked_pow(frac_part.len() as u32)
            .ok_or_else(err)?;
        Ok(Rational::new(numer, denom))
    }
}

macro_rules! checked_binop {
    ($trait:ident, $method:ident, $checked:ident, $sym:literal) => {
        impl $trait for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$checked(&rhs)
                    .unwrap_or_else(|| panic!("rational overflow in {} {} {}", self, $sym, rhs))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                (*self).$method(*rhs)
            }
        }
    };
}

checked_binop!(Add, add, checked_add, "+");
checked_binop!(Sub, sub, checked_sub, "-");
checked_binop!(Mul, mul, checked_mul, "*");
checked_binop!(Div, div, checked_div, "/");

impl AddAssign for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        *self = *self + rhs;
    }
}

impl SubAssign for Rational {
    fn sub_assign(&mut self, rhs: Rational) {
        *self = *self - rhs;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::ZERO, |acc, x| acc + *x)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::integer(v as i128)
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::integer(v as i128)
    }
}

impl From<u32> for Rational {
    fn from(v: u32) -> Self {
        Rational::integer(v as i128)
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational::integer(v as i128)
    }
}

/// Least common multiple of the denominators, used to pick exact grid steps.
pub fn common_denominator<'a, I: IntoIterator<Item = &'a Rational>>(values: I) -> i128 {
    values.into_iter().fold(1i128, |acc, r| acc.lcm(&r.denom()))
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_fraction_string())
    }
}

struct RationalVisitor;

impl Visitor<'_> for RationalVisitor {
    type Value = Rational;

    fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("a rational as \"p/q\", a decimal string, or a JSON number")
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
        v.parse().map_err(E::custom)
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
        Ok(Rational::from(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
        Ok(Rational::integer(v as i128))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Rational, E> {
        // shortest round-trip rendering, so 13.5 and 0.1 come out as written
        if !v.is_finite() {
            return Err(E::custom("non-finite number"));
        }
        format!("{v}").parse().map_err(E::custom)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(RationalVisitor)
    }
}

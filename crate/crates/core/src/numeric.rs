//! Exact rational numbers and possibly-infinite costs.
//!
//! Every probability and cost in the crate is a [`Rational`]. The decision
//! gaps the reductions rely on are exponentially small, so nothing here ever
//! rounds. Floating point only appears in [`Rational::to_f64`] and in the
//! decimal rendering used for human-readable output.

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

/// An exact rational number, always in lowest terms with a positive
/// denominator.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Rational(BigRational);

// BigRational's own ordering walks the continued fraction recursively and
// overflows the stack on the 10^5-bit denominators of the certificates.
impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        (self.0.numer() * other.0.denom()).cmp(&(other.0.numer() * self.0.denom()))
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("cannot parse {0:?} as an exact rational (expected \"num/den\" or an integer)")]
pub struct ParseRationalError(pub String);

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        Rational(BigRational::new(numer.into(), denom.into()))
    }

    pub fn from_bigints(numer: BigInt, denom: BigInt) -> Self {
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer, denom))
    }

    pub fn integer(n: i64) -> Self {
        Rational(BigRational::from_integer(n.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn half() -> Self {
        Rational::new(1, 2)
    }

    /// `2^exp` for any integer exponent.
    pub fn pow2(exp: i64) -> Self {
        let mag = BigInt::one() << exp.unsigned_abs();
        if exp >= 0 {
            Rational(BigRational::from_integer(mag))
        } else {
            Rational(BigRational::new(BigInt::one(), mag))
        }
    }

    pub fn pow(&self, exp: u32) -> Self {
        Rational(num_traits::pow::pow(self.0.clone(), exp as usize))
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

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_integer(&self) -> bool {
        self.0.is_integer()
    }

    /// True for probabilities strictly between 0 and 1.
    pub fn is_proper_probability(&self) -> bool {
        self.is_positive() && *self < Rational::one()
    }

    pub fn in_unit_interval(&self) -> bool {
        !self.is_negative() && *self <= Rational::one()
    }

    pub fn recip(&self) -> Self {
        Rational(self.0.recip())
    }

    pub fn abs(&self) -> Self {
        Rational(self.0.abs())
    }

    pub fn complement(&self) -> Self {
        Rational::one() - self
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or_else(|| {
            // Extreme magnitudes: fall back on the decimal rendering.
            self.to_decimal(20).parse().unwrap_or(f64::NAN)
        })
    }

    /// Smallest integer `k` with `2^k >= self`. Requires `self > 0`.
    pub fn ceil_log2(&self) -> i64 {
        assert!(self.is_positive(), "ceil_log2 of a non-positive value");
        let n = self.numer();
        let d = self.denom();
        // Start from the bit-length estimate and correct by at most a step.
        let mut k = n.bits() as i64 - d.bits() as i64;
        while Rational::pow2(k) < *self {
            k += 1;
        }
        while Rational::pow2(k - 1) >= *self {
            k -= 1;
        }
        k
    }

    /// Returns `Some(z)` when `self == 2^-z` for some `z >= 0`.
    pub fn as_inverse_power_of_two(&self) -> Option<u32> {
        if !self.numer().is_one() {
            return None;
        }
        let d = self.denom();
        let z = d.bits() - 1;
        if BigInt::one() << z == *d {
            u32::try_from(z).ok()
        } else {
            None
        }
    }

    /// Decimal rendering with at most `sig` significant digits, rounded
    /// half-up, trailing zeros trimmed but keeping one fractional digit.
    pub fn to_decimal(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0.0".to_string();
        }
        let negative = self.is_negative();
        let value = self.abs();
        // Find e with 10^e <= value < 10^(e+1).
        let ten = Rational::integer(10);
        let mut e: i64 =
            value.numer().to_string().len() as i64 - value.denom().to_string().len() as i64;
        while pow_rat(&ten, e) > value {
            e -= 1;
        }
        while pow_rat(&ten, e + 1) <= value {
            e += 1;
        }
        let scale = pow_rat(&ten, sig as i64 - 1 - e);
        let scaled = &value * &scale;
        let (q, r) = scaled.numer().div_rem(scaled.denom());
        let mut digits_int = q;
        if r * BigInt::from(2) >= *scaled.denom() {
            digits_int += 1;
        }
        let mut digits = digits_int.to_string();
        if digits.len() > sig {
            // Rounding carried into a new leading digit.
            digits.pop();
            e += 1;
        }
        let (int_part, frac_part) = if e >= 0 {
            let int_len = (e + 1) as usize;
            if int_len >= digits.len() {
                let mut int = digits.clone();
                int.push_str(&"0".repeat(int_len - digits.len()));
                (int, String::new())
            } else {
                (digits[..int_len].to_string(), digits[int_len..].to_string())
            }
        } else {
            let mut frac = "0".repeat((-e - 1) as usize);
            frac.push_str(&digits);
            ("0".to_string(), frac)
        };
        let mut frac = frac_part.trim_end_matches('0').to_string();
        if frac.is_empty() {
            frac.push('0');
        }
        format!("{}{}.{}", if negative { "-" } else { "" }, int_part, frac)
    }

    /// Scientific rendering `d.ddde±x` with `sig` significant digits, for
    /// values too small or large for [`Rational::to_decimal`].
    pub fn to_scientific(&self, sig: usize) -> String {
        assert!(sig >= 1);
        if self.is_zero() {
            return "0e0".to_string();
        }
        let ten = Rational::integer(10);
        let value = self.abs();
        let mut e: i64 =
            value.numer().to_string().len() as i64 - value.denom().to_string().len() as i64;
        while pow_rat(&ten, e) > value {
            e -= 1;
        }
        while pow_rat(&ten, e + 1) <= value {
            e += 1;
        }
        let mut mantissa = (&value * &pow_rat(&ten, -e)).to_decimal(sig);
        if mantissa.starts_with("10") {
            e += 1;
            mantissa = (&value * &pow_rat(&ten, -e)).to_decimal(sig);
        }
        format!(
            "{}{mantissa}e{e}",
            if self.is_negative() { "-" } else { "" }
        )
    }

    /// Compact rendering: integers as `n`, everything else as `num/den`.
    pub fn to_compact(&self) -> String {
        if self.is_integer() {
            self.numer().to_string()
        } else {
            self.to_string()
        }
    }

    pub fn as_big(&self) -> &BigRational {
        &self.0
    }
}

fn pow_rat(base: &Rational, exp: i64) -> Rational {
    if exp >= 0 {
        base.pow(exp as u32)
    } else {
        base.pow((-exp) as u32).recip()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl FromStr for Rational {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseRationalError(s.to_string());
        let t = s.trim();
        match t.split_once('/') {
            Some((n, d)) => {
                let n: BigInt = n.trim().parse().map_err(|_| err())?;
                let d: BigInt = d.trim().parse().map_err(|_| err())?;
                if d.is_zero() {
                    return Err(err());
                }
                Ok(Rational(BigRational::new(n, d)))
            }
            None => {
                let n: BigInt = t.parse().map_err(|_| err())?;
                Ok(Rational(BigRational::from_integer(n)))
            }
        }
    }
}

impl From<i64> for Rational {
    fn from(n: i64) -> Self {
        Rational::integer(n)
    }
}

impl From<BigInt> for Rational {
    fn from(n: BigInt) -> Self {
        Rational(BigRational::from_integer(n))
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational((&self.0).$method(rhs.0))
            }
        }
        impl<'a, 'b> $trait<&'b Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'b Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);
forward_binop!(Div, div);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl AddAssign<Rational> for Rational {
    fn add_assign(&mut self, rhs: Rational) {
        self.0 += rhs.0;
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
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

/// A traversal or sensing cost. `Infinite` absorbs addition and is larger
/// than every finite cost; it is never a big sentinel number.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Cost {
    Finite(Rational),
    Infinite,
}

impl Cost {
    pub fn zero() -> Self {
        Cost::Finite(Rational::zero())
    }

    pub fn finite(n: i64) -> Self {
        Cost::Finite(Rational::integer(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Cost::Finite(_))
    }

    pub fn as_finite(&self) -> Option<&Rational> {
        match self {
            Cost::Finite(r) => Some(r),
            Cost::Infinite => None,
        }
    }

    /// Scales by a probability. `0 * Infinite` is treated as 0 because
    /// zero-probability branches never contribute to an expectation.
    pub fn scale(&self, p: &Rational) -> Cost {
        if p.is_zero() {
            return Cost::zero();
        }
        match self {
            Cost::Finite(r) => Cost::Finite(r * p),
            Cost::Infinite => Cost::Infinite,
        }
    }

    pub fn add_rational(&self, r: &Rational) -> Cost {
        match self {
            Cost::Finite(x) => Cost::Finite(x + r),
            Cost::Infinite => Cost::Infinite,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Cost::Finite(r) => r.to_f64(),
            Cost::Infinite => f64::INFINITY,
        }
    }

    /// `"num/den (decimal)"`, or `"inf"`.
    pub fn pretty(&self) -> String {
        match self {
            Cost::Finite(r) => format!("{} ({})", r, r.to_decimal(20)),
            Cost::Infinite => "inf".to_string(),
        }
    }
}

impl From<Rational> for Cost {
    fn from(r: Rational) -> Self {
        Cost::Finite(r)
    }
}

impl Add for Cost {
    type Output = Cost;
    fn add(self, rhs: Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl<'a> Add<&'a Cost> for &'a Cost {
    type Output = Cost;
    fn add(self, rhs: &'a Cost) -> Cost {
        match (self, rhs) {
            (Cost::Finite(a), Cost::Finite(b)) => Cost::Finite(a + b),
            _ => Cost::Infinite,
        }
    }
}

impl Sum for Cost {
    fn sum<I: Iterator<Item = Cost>>(iter: I) -> Cost {
        iter.fold(Cost::zero(), |acc, x| acc + x)
    }
}

impl PartialOrd for Cost {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Cost {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Cost::Finite(a), Cost::Finite(b)) => a.cmp(b),
            (Cost::Finite(_), Cost::Infinite) => Ordering::Less,
            (Cost::Infinite, Cost::Finite(_)) => Ordering::Greater,
            (Cost::Infinite, Cost::Infinite) => Ordering::Equal,
        }
    }
}

impl fmt::Display for Cost {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cost::Finite(r) => write!(f, "{r}"),
            Cost::Infinite => f.write_str("inf"),
        }
    }
}

impl FromStr for Cost {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.trim() == "inf" {
            Ok(Cost::Infinite)
        } else {
            s.parse().map(Cost::Finite)
        }
    }
}

impl Serialize for Cost {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Cost {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Convenience constructor used heavily in tests and generators.
pub fn q(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn display_always_num_over_den() {
        assert_eq!(Rational::integer(5).to_string(), "5/1");
        assert_eq!(q(6, 8).to_string(), "3/4");
        assert_eq!(q(3, -6).to_string(), "-1/2");
    }

    #[test]
    fn parse_accepts_fraction_and_integer() {
        assert_eq!("3/4".parse::<Rational>().unwrap(), q(3, 4));
        assert_eq!("7".parse::<Rational>().unwrap(), Rational::integer(7));
        assert!("1/0".parse::<Rational>().is_err());
        assert!("0.5".parse::<Rational>().is_err());
    }

    #[test]
    fn scientific() {
        assert_eq!(q(1, 8).to_scientific(3), "1.25e-1");
        assert_eq!(Rational::integer(40270000).to_scientific(4), "4.027e7");
        assert_eq!(q(-999, 1000).to_scientific(2), "-1.0e0");
        assert_eq!(Rational::pow2(-2000).to_scientific(3), "8.71e-603");
    }

    #[test]
    fn ordering_survives_huge_denominators() {
        let a = Rational::pow2(-100_000);
        let b = &a + &Rational::pow2(-100_001);
        assert!(a < b);
        assert!(b.complement() < a.complement());
    }

    #[test]
    fn pow2_both_signs() {
        assert_eq!(Rational::pow2(3), Rational::integer(8));
        assert_eq!(Rational::pow2(-7), q(1, 128));
        assert_eq!(Rational::pow2(0), Rational::one());
    }

    #[test]
    fn ceil_log2_matches_definition() {
        assert_eq!(Rational::integer(8).ceil_log2(), 3);
        assert_eq!(Rational::integer(96).ceil_log2(), 7);
        assert_eq!(q(73, 2).ceil_log2(), 6);
        assert_eq!(q(1, 3).ceil_log2(), -1);
        assert_eq!(Rational::one().ceil_log2(), 0);
    }

    #[test]
    fn inverse_power_of_two_detection() {
        assert_eq!(q(1, 64).as_inverse_power_of_two(), Some(6));
        assert_eq!(Rational::one().as_inverse_power_of_two(), Some(0));
        assert_eq!(q(3, 64).as_inverse_power_of_two(), None);
        assert_eq!(q(1, 3).as_inverse_power_of_two(), None);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(Rational::integer(5).to_decimal(20), "5.0");
        assert_eq!(q(263, 512).to_decimal(20), "0.513671875");
        assert_eq!(q(1, 3).to_decimal(20), "0.33333333333333333333");
        assert_eq!(q(2, 3).to_decimal(5), "0.66667");
        assert_eq!(Rational::integer(25705).to_decimal(20), "25705.0");
        assert_eq!(q(1, 1 << 20).to_decimal(3), "0.000000954");
        assert_eq!(q(-1, 4).to_decimal(20), "-0.25");
        assert_eq!(q(999_999, 1_000_000).to_decimal(3), "1.0");
    }

    #[test]
    fn infinite_cost_absorbs_and_dominates() {
        let inf = Cost::Infinite;
        assert_eq!(inf.clone() + Cost::finite(3), Cost::Infinite);
        assert!(Cost::finite(1_000_000) < inf);
        assert_eq!(inf.scale(&Rational::zero()), Cost::zero());
        assert_eq!(inf.scale(&q(1, 2)), Cost::Infinite);
        assert_eq!("inf".parse::<Cost>().unwrap(), Cost::Infinite);
    }

    proptest! {
        #[test]
        fn serde_round_trip(n in -10_000i64..10_000, d in 1i64..10_000) {
            let r = q(n, d);
            let json = serde_json::to_string(&r).unwrap();
            let back: Rational = serde_json::from_str(&json).unwrap();
            prop_assert_eq!(back, r);
        }

        #[test]
        fn ceil_log2_brackets(n in 1i64..100_000, d in 1i64..1000) {
            let r = q(n, d);
            let k = r.ceil_log2();
            prop_assert!(Rational::pow2(k) >= r);
            prop_assert!(Rational::pow2(k - 1) < r);
        }
    }
}

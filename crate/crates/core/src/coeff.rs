//! Exact rational coefficients.
//!
//! Almost every coefficient met while iterating the map is a small integer, so
//! [`Coeff`] keeps those inline as an `i64` and only falls back to a boxed
//! [`BigRational`] on overflow or for proper fractions. The representation is
//! normalised: a value that is an integer fitting in `i64` is always `Int`,
//! which makes the derived `Eq` and `Hash` agree with numeric equality.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Clone, PartialEq, Eq, Hash)]
pub enum Coeff {
    Int(i64),
    Big(Box<BigRational>),
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CoeffError {
    #[error("invalid rational literal {0:?}")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
}

impl Coeff {
    pub const ZERO: Coeff = Coeff::Int(0);
    pub const ONE: Coeff = Coeff::Int(1);

    pub fn from_big(r: BigRational) -> Self {
        if r.is_integer() {
            if let Some(v) = r.numer().to_i64() {
                return Coeff::Int(v);
            }
        }
        Coeff::Big(Box::new(r))
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Self::from_big(BigRational::new(num.into(), den.into()))
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Coeff::Int(v) => BigRational::from_integer((*v).into()),
            Coeff::Big(b) => (**b).clone(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Coeff::Int(0))
    }

    pub fn is_one(&self) -> bool {
        matches!(self, Coeff::Int(1))
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Coeff::Int(v) => *v > 0,
            Coeff::Big(b) => b.is_positive(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match self {
            Coeff::Int(_) => true,
            Coeff::Big(b) => b.is_integer(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match self {
            Coeff::Int(v) => (*v).into(),
            Coeff::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match self {
            Coeff::Int(_) => BigInt::one(),
            Coeff::Big(b) => b.denom().clone(),
        }
    }

    /// Multiplicative inverse; `None` for zero.
    pub fn recip(&self) -> Option<Coeff> {
        if self.is_zero() {
            return None;
        }
        Some(Self::from_big(self.to_big().recip()))
    }

    pub fn checked_div(&self, other: &Coeff) -> Option<Coeff> {
        other.recip().map(|r| self * &r)
    }

    pub fn pow(&self, e: u32) -> Coeff {
        let mut acc = Coeff::ONE;
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }
}

impl Default for Coeff {
    fn default() -> Self {
        Coeff::ZERO
    }
}

impl From<i64> for Coeff {
    fn from(v: i64) -> Self {
        Coeff::Int(v)
    }
}

impl From<BigInt> for Coeff {
    fn from(v: BigInt) -> Self {
        Coeff::from_big(BigRational::from_integer(v))
    }
}

impl From<BigRational> for Coeff {
    fn from(v: BigRational) -> Self {
        Coeff::from_big(v)
    }
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, rhs: &'a Coeff) -> Coeff {
        if let (Coeff::Int(a), Coeff::Int(b)) = (self, rhs) {
            if let Some(s) = a.checked_add(*b) {
                return Coeff::Int(s);
            }
        }
        Coeff::from_big(self.to_big() + rhs.to_big())
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, rhs: &'a Coeff) -> Coeff {
        if let (Coeff::Int(a), Coeff::Int(b)) = (self, rhs) {
            if let Some(s) = a.checked_sub(*b) {
                return Coeff::Int(s);
            }
        }
        Coeff::from_big(self.to_big() - rhs.to_big())
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, rhs: &'a Coeff) -> Coeff {
        if let (Coeff::Int(a), Coeff::Int(b)) = (self, rhs) {
            if let Some(s) = a.checked_mul(*b) {
                return Coeff::Int(s);
            }
        }
        Coeff::from_big(self.to_big() * rhs.to_big())
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        if let Coeff::Int(a) = self {
            if let Some(s) = a.checked_neg() {
                return Coeff::Int(s);
            }
        }
        Coeff::from_big(-self.to_big())
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(self, rhs: Coeff) -> Coeff {
        &self + &rhs
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, rhs: Coeff) -> Coeff {
        &self - &rhs
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, rhs: Coeff) -> Coeff {
        &self * &rhs
    }
}

impl AddAssign<&Coeff> for Coeff {
    fn add_assign(&mut self, rhs: &Coeff) {
        if let (Coeff::Int(a), Coeff::Int(b)) = (&*self, rhs) {
            if let Some(s) = a.checked_add(*b) {
                *self = Coeff::Int(s);
                return;
            }
        }
        *self = &*self + rhs;
    }
}

impl PartialOrd for Coeff {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Coeff {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Coeff::Int(a), Coeff::Int(b)) => a.cmp(b),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl fmt::Display for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coeff::Int(v) => write!(f, "{v}"),
            Coeff::Big(b) => write!(f, "{b}"),
        }
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Coeff {
    type Err = CoeffError;

    /// Accepts `"3"`, `"-3"`, `"+3"`, `"p/q"`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        let bad = || CoeffError::Parse(s.to_string());
        let parse_int = |x: &str| -> Result<BigInt, CoeffError> {
            let x = x.trim();
            let x = x.strip_prefix('+').unwrap_or(x);
            if x.is_empty() || !x.trim_start_matches('-').chars().all(|c| c.is_ascii_digit()) {
                return Err(bad());
            }
            x.parse::<BigInt>().map_err(|_| bad())
        };
        match t.split_once('/') {
            None => Ok(Coeff::from(parse_int(t)?)),
            Some((n, d)) => {
                let n = parse_int(n)?;
                let d = parse_int(d)?;
                if d.is_zero() {
                    return Err(CoeffError::ZeroDenominator(s.to_string()));
                }
                Ok(Coeff::from_big(BigRational::new(n, d)))
            }
        }
    }
}

impl Serialize for Coeff {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Coeff {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Reduce a rational modulo a prime `p < 2^32`. `None` when `p` divides the denominator.
pub fn coeff_mod(c: &Coeff, p: u64) -> Option<u64> {
    let to_mod = |v: &BigInt| -> u64 {
        let m = v.mod_floor(&BigInt::from(p));
        m.to_u64().expect("residue fits in u64")
    };
    match c {
        Coeff::Int(v) => Some((*v as i128).rem_euclid(p as i128) as u64),
        Coeff::Big(b) => {
            let den = to_mod(b.denom());
            if den == 0 {
                return None;
            }
            let num = to_mod(b.numer());
            Some(num * mod_inverse(den, p) % p)
        }
    }
}

/// Inverse of a nonzero residue modulo a prime, by Fermat.
pub fn mod_inverse(a: u64, p: u64) -> u64 {
    debug_assert!(!a.is_multiple_of(p));
    mod_pow(a, p - 2, p)
}

pub fn mod_pow(mut base: u64, mut exp: u64, p: u64) -> u64 {
    let mut acc = 1u64 % p;
    base %= p;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = acc * base % p;
        }
        base = base * base % p;
        exp >>= 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overflow_promotes_to_big() {
        let a = Coeff::Int(i64::MAX);
        let b = &a + &Coeff::ONE;
        assert!(matches!(b, Coeff::Big(_)));
        let c = &b - &Coeff::ONE;
        assert_eq!(c, Coeff::Int(i64::MAX));
        let sq = &a * &a;
        assert_eq!(sq.to_big(), BigRational::from_integer(BigInt::from(i64::MAX) * BigInt::from(i64::MAX)));
    }

    #[test]
    fn fractions_round_trip_text() {
        for s in ["1/2", "-3/4", "7", "0", "-12"] {
            let c: Coeff = s.parse().unwrap();
            assert_eq!(c.to_string(), s);
        }
        let c: Coeff = "4/2".parse().unwrap();
        assert_eq!(c, Coeff::Int(2));
        assert!("1/0".parse::<Coeff>().is_err());
        assert!("x".parse::<Coeff>().is_err());
        assert!("".parse::<Coeff>().is_err());
    }

    #[test]
    fn modular_reduction() {
        assert_eq!(coeff_mod(&Coeff::Int(-1), 7), Some(6));
        assert_eq!(coeff_mod(&Coeff::ratio(1, 3), 7), Some(5));
        assert_eq!(coeff_mod(&Coeff::ratio(1, 7), 7), None);
    }
}

//! Rational points of the circle group, written additively.
//!
//! A [`CircleValue`] `v` stands for the root of unity `exp(2πi·v)`. Values are
//! kept as reduced fractions in `[0, 1)`, so equality is structural.

use std::fmt;
use std::ops::{Add, AddAssign, Neg, Sub};
use std::str::FromStr;

use num_integer::Integer;
use num_rational::Ratio;
use num_traits::{Signed, Zero};

use crate::error::{Error, Result};

/// Largest denominator accepted when parsing circle values from text.
pub const MAX_PARSED_DENOMINATOR: i64 = 1 << 24;

#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct CircleValue(Ratio<i64>);

impl CircleValue {
    pub fn zero() -> Self {
        CircleValue(Ratio::zero())
    }

    /// `numer/denom mod 1`. Panics on a zero denominator.
    pub fn new(numer: i64, denom: i64) -> Self {
        assert!(denom != 0, "zero denominator");
        let (numer, denom) = if denom < 0 {
            (-(numer as i128), -(denom as i128))
        } else {
            (numer as i128, denom as i128)
        };
        let r = numer.rem_euclid(denom);
        let g = r.gcd(&denom).max(1);
        CircleValue(Ratio::new_raw((r / g) as i64, (denom / g) as i64))
    }

    pub fn from_ratio(r: Ratio<i64>) -> Self {
        CircleValue::new(*r.numer(), *r.denom())
    }

    pub fn numer(&self) -> i64 {
        *self.0.numer()
    }

    pub fn denom(&self) -> i64 {
        *self.0.denom()
    }

    pub fn as_ratio(&self) -> Ratio<i64> {
        self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Order of the value in `Q/Z`.
    pub fn order(&self) -> i64 {
        self.denom()
    }

    pub fn mul_int(&self, k: i64) -> Self {
        let n = (self.numer() as i128 * k as i128).rem_euclid(self.denom() as i128);
        CircleValue::new(n as i64, self.denom())
    }

    /// One preimage of `self` under multiplication by `k` (`k != 0`).
    pub fn div_int(&self, k: i64) -> Self {
        assert!(k != 0, "division by zero");
        let d = self.denom() as i128 * (k as i128).abs();
        let n = if k < 0 {
            -(self.numer() as i128)
        } else {
            self.numer() as i128
        };
        let d = i64::try_from(d).expect("circle value denominator overflow");
        CircleValue::new(n as i64, d)
    }

    /// Canonical text form `p/q`.
    pub fn to_fraction_string(&self) -> String {
        format!("{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Debug for CircleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl fmt::Display for CircleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer(), self.denom())
    }
}

impl Add for CircleValue {
    type Output = CircleValue;
    fn add(self, rhs: CircleValue) -> CircleValue {
        let a = self.numer() as i128;
        let b = self.denom() as i128;
        let c = rhs.numer() as i128;
        let d = rhs.denom() as i128;
        let l = b.lcm(&d);
        let n = (a * (l / b) + c * (l / d)).rem_euclid(l);
        let g = n.gcd(&l).max(1);
        let den = i64::try_from(l / g).expect("circle value denominator overflow");
        CircleValue(Ratio::new_raw((n / g) as i64, den))
    }
}

impl AddAssign for CircleValue {
    fn add_assign(&mut self, rhs: CircleValue) {
        *self = *self + rhs;
    }
}

impl Neg for CircleValue {
    type Output = CircleValue;
    fn neg(self) -> CircleValue {
        CircleValue::new(-self.numer(), self.denom())
    }
}

impl Sub for CircleValue {
    type Output = CircleValue;
    fn sub(self, rhs: CircleValue) -> CircleValue {
        self + (-rhs)
    }
}

impl std::iter::Sum for CircleValue {
    fn sum<I: Iterator<Item = CircleValue>>(iter: I) -> CircleValue {
        iter.fold(CircleValue::zero(), |a, b| a + b)
    }
}

/// Parses `p/q` or `p` into a fraction with small, nonzero denominator.
pub(crate) fn parse_small_fraction(s: &str) -> Result<Ratio<i64>> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let n: i64 = n
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let d: i64 = d
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if d == 0 {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    if d.abs() > MAX_PARSED_DENOMINATOR || n == i64::MIN || d == i64::MIN {
        return Err(Error::Parse(format!("denominator out of range in {s:?}")));
    }
    let r = Ratio::new(n, d);
    if r.denom().is_negative() {
        return Err(Error::Parse(format!("bad fraction {s:?}")));
    }
    Ok(r)
}

impl FromStr for CircleValue {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Ok(CircleValue::from_ratio(parse_small_fraction(s)?))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reduces_into_unit_interval() {
        assert_eq!(CircleValue::new(3, 2), CircleValue::new(1, 2));
        assert_eq!(CircleValue::new(-1, 3), CircleValue::new(2, 3));
        assert_eq!(CircleValue::new(4, -6), CircleValue::new(1, 3));
        assert!(CircleValue::new(5, 5).is_zero());
    }

    #[test]
    fn arithmetic() {
        let h = CircleValue::new(1, 2);
        assert!((h + h).is_zero());
        assert_eq!(CircleValue::new(1, 3) + CircleValue::new(1, 6), h);
        assert_eq!(CircleValue::new(1, 4).mul_int(6), h);
        assert_eq!(h.div_int(2).mul_int(2), h);
        assert_eq!(h.div_int(-3).mul_int(-3), h);
        assert_eq!(-CircleValue::new(1, 4), CircleValue::new(3, 4));
    }

    #[test]
    fn parse() {
        assert_eq!(
            "1/2".parse::<CircleValue>().unwrap(),
            CircleValue::new(1, 2)
        );
        assert_eq!(
            "-5/4".parse::<CircleValue>().unwrap(),
            CircleValue::new(3, 4)
        );
        assert_eq!("2".parse::<CircleValue>().unwrap(), CircleValue::zero());
        assert!("1/0".parse::<CircleValue>().is_err());
        assert!("x".parse::<CircleValue>().is_err());
    }
}

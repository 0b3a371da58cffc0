//! Nonzero complex scalars of the form `r·exp(2πiθ)` with `r` a positive
//! rational and `θ ∈ Q/Z`.
//!
//! Block values of invariant cocycles live here. Rationals are the case
//! `θ ∈ {0, 1/2}`; roots of unity are the case `r = 1`. The set is a group
//! under multiplication, and equality is exact.

use std::fmt;
use std::ops::{Div, Mul};
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::circle::CircleValue;
use crate::error::{Error, Result};
use crate::linalg::Q;

/// Longest numerator or denominator, in decimal digits, accepted by the parser.
pub const MAX_PARSED_DIGITS: usize = 64;

#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Scalar {
    modulus: Q,
    phase: CircleValue,
}

impl Scalar {
    pub fn one() -> Self {
        Scalar {
            modulus: Q::one(),
            phase: CircleValue::zero(),
        }
    }

    pub fn minus_one() -> Self {
        Scalar::from_phase(CircleValue::new(1, 2))
    }

    pub fn new(modulus: Q, phase: CircleValue) -> Result<Self> {
        if !modulus.is_positive() {
            return Err(Error::Precondition(format!(
                "modulus {modulus} is not positive"
            )));
        }
        Ok(Scalar { modulus, phase })
    }

    pub fn from_phase(phase: CircleValue) -> Self {
        Scalar {
            modulus: Q::one(),
            phase,
        }
    }

    pub fn from_rational(r: &Q) -> Result<Self> {
        if r.is_zero() {
            return Err(Error::SingularBlock("zero scalar".into()));
        }
        Ok(Scalar {
            modulus: r.abs(),
            phase: if r.is_negative() {
                CircleValue::new(1, 2)
            } else {
                CircleValue::zero()
            },
        })
    }

    pub fn from_int(n: i64) -> Result<Self> {
        Scalar::from_rational(&Q::from_integer(BigInt::from(n)))
    }

    pub fn modulus(&self) -> &Q {
        &self.modulus
    }

    pub fn phase(&self) -> CircleValue {
        self.phase
    }

    pub fn is_one(&self) -> bool {
        self.modulus.is_one() && self.phase.is_zero()
    }

    pub fn is_root_of_unity(&self) -> bool {
        self.modulus.is_one()
    }

    /// The rational value, when the phase is `0` or `1/2`.
    pub fn as_rational(&self) -> Option<Q> {
        if self.phase.is_zero() {
            Some(self.modulus.clone())
        } else if self.phase == CircleValue::new(1, 2) {
            Some(-self.modulus.clone())
        } else {
            None
        }
    }

    pub fn inv(&self) -> Scalar {
        Scalar {
            modulus: self.modulus.recip(),
            phase: -self.phase,
        }
    }

    pub fn pow(&self, k: i64) -> Scalar {
        let m = if k >= 0 {
            num_traits::pow(self.modulus.clone(), k as usize)
        } else {
            num_traits::pow(self.modulus.recip(), k.unsigned_abs() as usize)
        };
        Scalar {
            modulus: m,
            phase: self.phase.mul_int(k),
        }
    }
}

impl Mul for &Scalar {
    type Output = Scalar;
    fn mul(self, rhs: &Scalar) -> Scalar {
        Scalar {
            modulus: &self.modulus * &rhs.modulus,
            phase: self.phase + rhs.phase,
        }
    }
}

impl Mul for Scalar {
    type Output = Scalar;
    fn mul(self, rhs: Scalar) -> Scalar {
        &self * &rhs
    }
}

impl Div for &Scalar {
    type Output = Scalar;
    #[allow(clippy::suspicious_arithmetic_impl)]
    fn div(self, rhs: &Scalar) -> Scalar {
        self * &rhs.inv()
    }
}

impl Div for Scalar {
    type Output = Scalar;
    fn div(self, rhs: Scalar) -> Scalar {
        &self / &rhs
    }
}

impl std::iter::Product for Scalar {
    fn product<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::one(), |a, b| a * b)
    }
}

fn fmt_q(q: &Q) -> String {
    format!("{}/{}", q.numer(), q.denom())
}

/// Text form: `p/q` for rationals, `p/q@a/b` for `(p/q)·exp(2πi·a/b)` otherwise.
impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.as_rational() {
            Some(r) => write!(f, "{}", fmt_q(&r)),
            None => write!(f, "{}@{}", fmt_q(&self.modulus), self.phase),
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Parses an exact rational `p/q` or `p`, with bounded digit counts.
pub fn parse_rational(s: &str) -> Result<Q> {
    let s = s.trim();
    let (n, d) = match s.split_once('/') {
        Some((n, d)) => (n.trim(), d.trim()),
        None => (s, "1"),
    };
    let digits = |x: &str| x.trim_start_matches(['-', '+']).len();
    if digits(n) > MAX_PARSED_DIGITS || digits(d) > MAX_PARSED_DIGITS {
        return Err(Error::Parse(format!("rational {s:?} is too long")));
    }
    let n: BigInt = n
        .parse()
        .map_err(|_| Error::Parse(format!("bad numerator in {s:?}")))?;
    let d: BigInt = d
        .parse()
        .map_err(|_| Error::Parse(format!("bad denominator in {s:?}")))?;
    if d.is_zero() {
        return Err(Error::Parse(format!("zero denominator in {s:?}")));
    }
    Ok(Q::new(n, d))
}

impl FromStr for Scalar {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.split_once('@') {
            None => {
                let r = parse_rational(s)?;
                Scalar::from_rational(&r).map_err(|_| Error::Parse(format!("zero scalar {s:?}")))
            }
            Some((m, p)) => {
                let m = parse_rational(m)?;
                if !m.is_positive() {
                    return Err(Error::Parse(format!("modulus in {s:?} must be positive")));
                }
                Scalar::new(m, p.parse()?)
            }
        }
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

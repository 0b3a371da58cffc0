use std::fmt;
use std::ops::{Add, Neg, Sub};
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest absolute coordinate accepted by the parser.
pub const MAX_PARSED_COORD: i64 = 1 << 20;

/// An integral weight in fundamental-weight coordinates; `coords[i] = μ(i)`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Weight(Vec<i64>);

impl Weight {
    pub fn new(coords: Vec<i64>) -> Self {
        Weight(coords)
    }

    pub fn zero(rank: usize) -> Self {
        Weight(vec![0; rank])
    }

    /// The fundamental weight `ω_i` (0-based `i`).
    pub fn fundamental(rank: usize, i: usize) -> Self {
        let mut w = Weight::zero(rank);
        w.0[i] = 1;
        w
    }

    pub fn rank(&self) -> usize {
        self.0.len()
    }

    pub fn coords(&self) -> &[i64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> i64 {
        self.0[i]
    }

    pub fn is_dominant(&self) -> bool {
        self.0.iter().all(|&x| x >= 0)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&x| x == 0)
    }

    /// Sum of coordinates; the truncation bounds are stated in terms of it.
    pub fn coord_sum(&self) -> i64 {
        self.0.iter().sum()
    }

    pub fn scale(&self, k: i64) -> Weight {
        Weight(self.0.iter().map(|x| x * k).collect())
    }

    pub fn check_rank(&self, rank: usize) -> Result<()> {
        if self.rank() != rank {
            return Err(Error::WeightRank {
                weight: self.to_string(),
                found: self.rank(),
                rank,
            });
        }
        Ok(())
    }

    pub fn check_dominant(&self) -> Result<()> {
        if !self.is_dominant() {
            return Err(Error::NotDominant(self.to_string()));
        }
        Ok(())
    }
}

/// All dominant weights of the given rank with coordinate sum at most `bound`,
/// ordered by coordinate sum and then lexicographically.
pub fn dominant_weights_up_to(rank: usize, bound: i64) -> Vec<Weight> {
    fn rec(rank: usize, left: i64, prefix: &mut Vec<i64>, out: &mut Vec<Weight>) {
        if prefix.len() == rank {
            out.push(Weight(prefix.clone()));
            return;
        }
        for x in 0..=left {
            prefix.push(x);
            rec(rank, left - x, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    if bound >= 0 {
        rec(rank, bound, &mut Vec::new(), &mut out);
    }
    out.sort_by(|a, b| a.coord_sum().cmp(&b.coord_sum()).then_with(|| a.cmp(b)));
    out
}

impl Add for &Weight {
    type Output = Weight;
    fn add(self, rhs: &Weight) -> Weight {
        assert_eq!(self.rank(), rhs.rank(), "weight rank mismatch");
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }
}

impl Sub for &Weight {
    type Output = Weight;
    fn sub(self, rhs: &Weight) -> Weight {
        assert_eq!(self.rank(), rhs.rank(), "weight rank mismatch");
        Weight(self.0.iter().zip(&rhs.0).map(|(a, b)| a - b).collect())
    }
}

impl Add for Weight {
    type Output = Weight;
    fn add(self, rhs: Weight) -> Weight {
        &self + &rhs
    }
}

impl Sub for Weight {
    type Output = Weight;
    fn sub(self, rhs: Weight) -> Weight {
        &self - &rhs
    }
}

impl Neg for &Weight {
    type Output = Weight;
    fn neg(self) -> Weight {
        Weight(self.0.iter().map(|x| -x).collect())
    }
}

impl fmt::Display for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, x) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Weight {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({self})")
    }
}

impl FromStr for Weight {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let s = s
            .strip_prefix('(')
            .and_then(|x| x.strip_suffix(')'))
            .unwrap_or(s);
        if s.is_empty() {
            return Err(Error::Parse("empty weight".into()));
        }
        let coords = s
            .split(',')
            .map(|p| {
                let x: i64 = p
                    .trim()
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad weight coordinate {p:?}")))?;
                if x.abs() > MAX_PARSED_COORD {
                    return Err(Error::Parse(format!("weight coordinate {x} out of range")));
                }
                Ok(x)
            })
            .collect::<Result<Vec<_>>>()?;
        if coords.len() > super::dynkin::MAX_RANK {
            return Err(Error::Parse("weight has too many coordinates".into()));
        }
        Ok(Weight(coords))
    }
}

impl Serialize for Weight {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_roundtrip() {
        let w: Weight = "1,0,2".parse().unwrap();
        assert_eq!(w.coords(), &[1, 0, 2]);
        assert_eq!(w.to_string(), "1,0,2");
        assert_eq!("(3, -1)".parse::<Weight>().unwrap().coords(), &[3, -1]);
        assert!("".parse::<Weight>().is_err());
        assert!("1,,2".parse::<Weight>().is_err());
        assert!("1;2".parse::<Weight>().is_err());
    }

    #[test]
    fn dominant_enumeration() {
        let ws = dominant_weights_up_to(2, 2);
        assert_eq!(ws.len(), 6);
        assert_eq!(ws[0], Weight::zero(2));
        assert!(ws.iter().all(|w| w.is_dominant() && w.coord_sum() <= 2));
        assert!(dominant_weights_up_to(3, -1).is_empty());
    }
}

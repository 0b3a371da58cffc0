//! Dynkin types and their Cartan matrices.
//!
//! Nodes follow Bourbaki numbering (1-based in text, 0-based in code):
//!
//! * `A_n`: the chain `1 - 2 - … - n`.
//! * `B_n`: chain, `α_1 … α_{n-1}` long, `α_n` short.
//! * `C_n`: chain, `α_1 … α_{n-1}` short, `α_n` long.
//! * `D_n`: chain `1 - … - (n-2)`, with both `n-1` and `n` attached to `n-2`.
//! * `E_6, E_7, E_8`: chain `1 - 3 - 4 - 5 - …`, node `2` attached to `4`.
//! * `F_4`: `1 - 2 => 3 - 4`, `α_1, α_2` long.
//! * `G_2`: `α_1` short, `α_2` long.
//!
//! The Cartan matrix uses `A[i][j] = <α_j, α_i^∨>`, so column `j` holds the
//! fundamental-weight coordinates of `α_j`. The symmetrizers `d_i` are
//! `(α_i, α_i)/2` normalized so that short roots have `d_i = 1`; they satisfy
//! `d_i A[i][j] = d_j A[j][i]`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::linalg::{determinant, IntMatrix};

/// Largest rank accepted by the parser.
pub const MAX_RANK: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
}

impl Family {
    pub fn letter(self) -> char {
        match self {
            Family::A => 'A',
            Family::B => 'B',
            Family::C => 'C',
            Family::D => 'D',
            Family::E => 'E',
            Family::F => 'F',
            Family::G => 'G',
        }
    }

    fn from_letter(c: char) -> Option<Family> {
        Some(match c.to_ascii_uppercase() {
            'A' => Family::A,
            'B' => Family::B,
            'C' => Family::C,
            'D' => Family::D,
            'E' => Family::E,
            'F' => Family::F,
            'G' => Family::G,
            _ => return None,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DynkinType {
    family: Family,
    rank: usize,
}

impl DynkinType {
    pub fn new(family: Family, rank: usize) -> Result<Self> {
        let ok = match family {
            Family::A => rank >= 1,
            Family::B | Family::C => rank >= 2,
            Family::D => rank >= 3,
            Family::E => (6..=8).contains(&rank),
            Family::F => rank == 4,
            Family::G => rank == 2,
        };
        if !ok || rank > MAX_RANK {
            return Err(Error::InvalidType(format!("{}{}", family.letter(), rank)));
        }
        Ok(DynkinType { family, rank })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Every simple type of rank at most `max_rank`, in a fixed order
    /// (`D_3` included even though it coincides with `A_3`).
    pub fn all_up_to_rank(max_rank: usize) -> Vec<DynkinType> {
        let mut out = Vec::new();
        for family in [
            Family::A,
            Family::B,
            Family::C,
            Family::D,
            Family::E,
            Family::F,
            Family::G,
        ] {
            for rank in 1..=max_rank {
                if let Ok(t) = DynkinType::new(family, rank) {
                    out.push(t);
                }
            }
        }
        out
    }

    pub fn cartan_matrix(&self) -> CartanMatrix {
        cartan_matrix(*self)
    }
}

impl fmt::Display for DynkinType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.family.letter(), self.rank)
    }
}

impl FromStr for DynkinType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let mut chars = s.chars();
        let family = chars
            .next()
            .and_then(Family::from_letter)
            .ok_or_else(|| Error::InvalidType(s.to_string()))?;
        let digits = chars.as_str().trim_start_matches('_');
        if digits.is_empty() || digits.len() > 3 || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(Error::InvalidType(s.to_string()));
        }
        let rank: usize = digits
            .parse()
            .map_err(|_| Error::InvalidType(s.to_string()))?;
        DynkinType::new(family, rank)
    }
}

impl Serialize for DynkinType {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for DynkinType {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CartanMatrix {
    ty: DynkinType,
    entries: IntMatrix,
    symmetrizers: Vec<i64>,
}

impl CartanMatrix {
    pub fn dynkin_type(&self) -> DynkinType {
        self.ty
    }

    pub fn rank(&self) -> usize {
        self.entries.len()
    }

    pub fn entries(&self) -> &IntMatrix {
        &self.entries
    }

    /// `A[i][j] = <α_j, α_i^∨>`.
    pub fn get(&self, i: usize, j: usize) -> i64 {
        self.entries[i][j]
    }

    pub fn symmetrizers(&self) -> &[i64] {
        &self.symmetrizers
    }

    pub fn determinant(&self) -> i64 {
        determinant(&self.entries)
    }

    /// Fundamental-weight coordinates of the simple root `α_j` (column `j`).
    pub fn simple_root(&self, j: usize) -> Vec<i64> {
        self.entries.iter().map(|row| row[j]).collect()
    }

    /// `(α_i, α_j) = d_i A[i][j]`.
    pub fn root_inner(&self, i: usize, j: usize) -> i64 {
        self.symmetrizers[i] * self.entries[i][j]
    }
}

/// The Cartan matrix and symmetrizers of a Dynkin type in Bourbaki numbering.
pub fn cartan_matrix(ty: DynkinType) -> CartanMatrix {
    let n = ty.rank;
    let mut a = vec![vec![0i64; n]; n];
    for (i, row) in a.iter_mut().enumerate() {
        row[i] = 2;
    }
    let mut link = |i: usize, j: usize| {
        a[i][j] = -1;
        a[j][i] = -1;
    };
    let mut d = vec![1i64; n];
    match ty.family {
        Family::A => {
            for i in 0..n - 1 {
                link(i, i + 1);
            }
        }
        Family::B => {
            for i in 0..n - 1 {
                link(i, i + 1);
            }
            // α_n short
            a[n - 1][n - 2] = -2;
            d = vec![2; n];
            d[n - 1] = 1;
        }
        Family::C => {
            for i in 0..n - 1 {
                link(i, i + 1);
            }
            // α_n long
            a[n - 2][n - 1] = -2;
            d[n - 1] = 2;
        }
        Family::D => {
            for i in 0..n - 2 {
                link(i, i + 1);
            }
            link(n - 3, n - 1);
        }
        Family::E => {
            link(0, 2);
            link(1, 3);
            for i in 2..n - 1 {
                link(i, i + 1);
            }
        }
        Family::F => {
            link(0, 1);
            link(1, 2);
            link(2, 3);
            a[2][1] = -2;
            d = vec![2, 2, 1, 1];
        }
        Family::G => {
            link(0, 1);
            a[0][1] = -3;
            d = vec![1, 3];
        }
    }
    CartanMatrix {
        ty,
        entries: a,
        symmetrizers: d,
    }
}

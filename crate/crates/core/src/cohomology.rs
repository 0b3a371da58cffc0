//! Second cohomology of finite abelian groups with coefficients in the circle.
//!
//! Everything is written additively: a 2-cocycle is a function
//! `c: A × A → Q/Z` with `c(x,y) + c(x+y,z) = c(y,z) + c(x,y+z)`, and its
//! commutator `b(x,y) = c(x,y) - c(y,x)` is an alternating bicharacter. The
//! commutator map identifies `H²(A; T)` with the group of alternating
//! bicharacters on `A`.

use num_integer::gcd;
use serde::{Deserialize, Serialize};

use crate::circle::CircleValue;
use crate::error::{Error, Result};
use crate::lattice::{FiniteAbelianGroup, GroupElement};
use crate::linalg::solve_mod_one;

/// Largest group order for which full cocycle tables are built.
pub const MAX_TABLE_ORDER: u64 = 256;

fn fmt_elem(x: &[u64]) -> String {
    format!("{x:?}")
}

fn check_table_order(group: &FiniteAbelianGroup) -> Result<usize> {
    if group.order() > MAX_TABLE_ORDER {
        return Err(Error::TooLarge(format!(
            "group of order {} exceeds the table limit {MAX_TABLE_ORDER}",
            group.order()
        )));
    }
    Ok(group.order() as usize)
}

/// A normalized-or-not 2-cocycle, stored as its full table.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cocycle2 {
    group: FiniteAbelianGroup,
    table: Vec<CircleValue>,
}

impl Cocycle2 {
    /// Builds a cocycle from a table indexed by `index_of(x) * |A| + index_of(y)`,
    /// verifying the cocycle identity.
    pub fn new(group: FiniteAbelianGroup, table: Vec<CircleValue>) -> Result<Self> {
        let n = check_table_order(&group)?;
        if table.len() != n * n {
            return Err(Error::InvalidGroup(format!(
                "cocycle table has {} entries, expected {}",
                table.len(),
                n * n
            )));
        }
        let c = Cocycle2 { group, table };
        c.check_identity()?;
        Ok(c)
    }

    pub fn from_fn(
        group: FiniteAbelianGroup,
        f: impl Fn(&[u64], &[u64]) -> CircleValue,
    ) -> Result<Self> {
        let n = check_table_order(&group)?;
        let elems = group.elements();
        let mut table = Vec::with_capacity(n * n);
        for x in &elems {
            for y in &elems {
                table.push(f(x, y));
            }
        }
        Cocycle2::new(group, table)
    }

    pub fn zero(group: FiniteAbelianGroup) -> Result<Self> {
        let n = check_table_order(&group)?;
        Ok(Cocycle2 {
            group,
            table: vec![CircleValue::zero(); n * n],
        })
    }

    /// `δa(x,y) = a(x) + a(y) - a(x+y)`, with `a` indexed like the group elements.
    pub fn coboundary(group: FiniteAbelianGroup, a: &[CircleValue]) -> Result<Self> {
        let n = check_table_order(&group)?;
        if a.len() != n {
            return Err(Error::InvalidGroup(
                "cochain length differs from group order".into(),
            ));
        }
        let elems = group.elements();
        let mut table = Vec::with_capacity(n * n);
        for x in &elems {
            for y in &elems {
                let s = group.add(x, y);
                table.push(a[group.index_of(x)] + a[group.index_of(y)] - a[group.index_of(&s)]);
            }
        }
        Ok(Cocycle2 { group, table })
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn value(&self, x: &[u64], y: &[u64]) -> CircleValue {
        let n = self.group.order() as usize;
        self.table[self.group.index_of(x) * n + self.group.index_of(y)]
    }

    pub fn table(&self) -> &[CircleValue] {
        &self.table
    }

    pub fn add(&self, other: &Cocycle2) -> Result<Cocycle2> {
        if self.group != other.group {
            return Err(Error::InvalidGroup(
                "cocycles live on different groups".into(),
            ));
        }
        Ok(Cocycle2 {
            group: self.group.clone(),
            table: self
                .table
                .iter()
                .zip(&other.table)
                .map(|(a, b)| *a + *b)
                .collect(),
        })
    }

    pub fn is_symmetric(&self) -> bool {
        let elems = self.group.elements();
        elems
            .iter()
            .all(|x| elems.iter().all(|y| self.value(x, y) == self.value(y, x)))
    }

    pub fn check_identity(&self) -> Result<()> {
        let g = &self.group;
        let elems = g.elements();
        for x in &elems {
            for y in &elems {
                let xy = g.add(x, y);
                let cxy = self.value(x, y);
                for z in &elems {
                    let yz = g.add(y, z);
                    if cxy + self.value(&xy, z) != self.value(y, z) + self.value(x, &yz) {
                        return Err(Error::NotACocycle {
                            x: fmt_elem(x),
                            y: fmt_elem(y),
                            z: fmt_elem(z),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// A bicharacter given by its values on pairs of invariant-factor generators.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bicharacter {
    group: FiniteAbelianGroup,
    matrix: Vec<Vec<CircleValue>>,
}

impl Bicharacter {
    /// Checks that every entry is compatible with the generator orders, so the
    /// bilinear extension is well defined on `A × A`.
    pub fn new(group: FiniteAbelianGroup, matrix: Vec<Vec<CircleValue>>) -> Result<Self> {
        let k = group.num_generators();
        if matrix.len() != k || matrix.iter().any(|r| r.len() != k) {
            return Err(Error::InvalidGroup(
                "bicharacter matrix has wrong shape".into(),
            ));
        }
        let f = group.factors();
        for i in 0..k {
            for j in 0..k {
                let g = gcd(f[i], f[j]) as i64;
                if !matrix[i][j].mul_int(g).is_zero() {
                    return Err(Error::NotBiQuasicharacter(format!(
                        "value {} on generators ({}, {}) has order not dividing {g}",
                        matrix[i][j],
                        i + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Bicharacter { group, matrix })
    }

    pub fn zero(group: FiniteAbelianGroup) -> Self {
        let k = group.num_generators();
        Bicharacter {
            group,
            matrix: vec![vec![CircleValue::zero(); k]; k],
        }
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    pub fn matrix(&self) -> &[Vec<CircleValue>] {
        &self.matrix
    }

    pub fn eval(&self, x: &[u64], y: &[u64]) -> CircleValue {
        let mut acc = CircleValue::zero();
        for (i, &xi) in x.iter().enumerate() {
            if xi == 0 {
                continue;
            }
            for (j, &yj) in y.iter().enumerate() {
                if yj != 0 {
                    acc += self.matrix[i][j].mul_int((xi * yj) as i64);
                }
            }
        }
        acc
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(CircleValue::is_zero)
    }

    /// `b(x,x) = 0` for every `x`.
    pub fn is_alternating(&self) -> bool {
        let k = self.matrix.len();
        (0..k).all(|i| {
            self.matrix[i][i].is_zero() && (0..k).all(|j| self.matrix[i][j] == -self.matrix[j][i])
        })
    }

    pub fn add(&self, other: &Bicharacter) -> Result<Bicharacter> {
        if self.group != other.group {
            return Err(Error::InvalidGroup(
                "bicharacters live on different groups".into(),
            ));
        }
        let matrix = self
            .matrix
            .iter()
            .zip(&other.matrix)
            .map(|(r, s)| r.iter().zip(s).map(|(a, b)| *a + *b).collect())
            .collect();
        Ok(Bicharacter {
            group: self.group.clone(),
            matrix,
        })
    }
}

/// `H²(A; T)`, realized as the group of alternating bicharacters on `A`:
/// for `A = ⊕ Z/n_i` it is `⊕_{i<j} Z/gcd(n_i, n_j)`.
pub fn h2(group: &FiniteAbelianGroup) -> FiniteAbelianGroup {
    let f = group.factors();
    let mut orders = Vec::new();
    for i in 0..f.len() {
        for j in i + 1..f.len() {
            orders.push(gcd(f[i], f[j]));
        }
    }
    FiniteAbelianGroup::from_cyclic_orders(&orders).expect("gcds are positive")
}

/// Every alternating bicharacter on `A`, enumerated by the coordinates
/// `(b_{12}, b_{13}, …, b_{k-1,k})` with `b_{ij} ∈ (1/gcd(n_i,n_j))Z/Z`, in
/// mixed-radix order with the last pair varying fastest. Index 0 is zero.
pub fn alternating_bicharacters(group: &FiniteAbelianGroup) -> Vec<Bicharacter> {
    let f = group.factors();
    let k = f.len();
    let pairs: Vec<(usize, usize, u64)> = (0..k)
        .flat_map(|i| (i + 1..k).map(move |j| (i, j)))
        .map(|(i, j)| (i, j, gcd(f[i], f[j])))
        .collect();
    let total: u64 = pairs.iter().map(|p| p.2).product();
    let mut out = Vec::with_capacity(total as usize);
    for mut idx in 0..total {
        let mut m = vec![vec![CircleValue::zero(); k]; k];
        for &(i, j, g) in pairs.iter().rev() {
            let v = CircleValue::new((idx % g) as i64, g as i64);
            idx /= g;
            m[i][j] = v;
            m[j][i] = -v;
        }
        out.push(Bicharacter {
            group: group.clone(),
            matrix: m,
        });
    }
    out
}

/// `b(x,y) = c(x,y) - c(y,x)`, recorded on generator pairs.
pub fn cocycle_commutator(c: &Cocycle2) -> Result<Bicharacter> {
    c.check_identity()?;
    let g = c.group();
    let k = g.num_generators();
    let gens: Vec<GroupElement> = (0..k).map(|i| g.generator(i)).collect();
    let matrix = (0..k)
        .map(|i| {
            (0..k)
                .map(|j| c.value(&gens[i], &gens[j]) - c.value(&gens[j], &gens[i]))
                .collect()
        })
        .collect();
    Bicharacter::new(g.clone(), matrix)
}

/// The bilinear lift `c(x,y) = Σ_{i<j} x_i y_j b(e_i, e_j)` of an alternating
/// bicharacter; its commutator is `b`.
pub fn bicharacter_to_cocycle(b: &Bicharacter) -> Result<Cocycle2> {
    if !b.is_alternating() {
        return Err(Error::NotAlternating(format!("{:?}", b.matrix())));
    }
    let k = b.matrix().len();
    let m = b.matrix();
    Cocycle2::from_fn(b.group().clone(), |x, y| {
        let mut acc = CircleValue::zero();
        for i in 0..k {
            for j in i + 1..k {
                if x[i] != 0 && y[j] != 0 {
                    acc += m[i][j].mul_int((x[i] * y[j]) as i64);
                }
            }
        }
        acc
    })
}

/// Outcome of the coboundary test on a finite group.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CoboundaryDecision {
    /// `c(x,y) = a(x) + a(y) - a(x+y)`; `a` is indexed like the group elements.
    Coboundary { witness: Vec<CircleValue> },
    /// The commutator is nonzero at the recorded pair.
    NotCoboundary {
        commutator: Bicharacter,
        x: GroupElement,
        y: GroupElement,
    },
}

impl CoboundaryDecision {
    pub fn is_coboundary(&self) -> bool {
        matches!(self, CoboundaryDecision::Coboundary { .. })
    }
}

/// A cocycle on a finite abelian group is a coboundary iff it is symmetric.
/// On the symmetric side the witness is found by solving the linear system
/// `a(x) + a(y) - a(x+y) = c(x,y)` over `Q/Z`, then checked by substitution.
pub fn is_coboundary_finite(c: &Cocycle2) -> Result<CoboundaryDecision> {
    let commutator = cocycle_commutator(c)?;
    let g = c.group();
    let elems = g.elements();
    for x in &elems {
        for y in &elems {
            if c.value(x, y) != c.value(y, x) {
                return Ok(CoboundaryDecision::NotCoboundary {
                    commutator,
                    x: x.clone(),
                    y: y.clone(),
                });
            }
        }
    }
    let n = elems.len();
    let mut rows = Vec::with_capacity(n * n);
    let mut rhs = Vec::with_capacity(n * n);
    for x in &elems {
        for y in &elems {
            let mut row = vec![0i64; n];
            row[g.index_of(x)] += 1;
            row[g.index_of(y)] += 1;
            row[g.index_of(&g.add(x, y))] -= 1;
            rows.push(row);
            rhs.push(c.value(x, y));
        }
    }
    let witness = solve_mod_one(&rows, &rhs, n)
        .expect("symmetric cocycles on finite abelian groups are coboundaries");
    let check = Cocycle2::coboundary(g.clone(), &witness)?;
    assert_eq!(
        check.table(),
        c.table(),
        "coboundary witness failed substitution"
    );
    Ok(CoboundaryDecision::Coboundary { witness })
}

#[derive(Serialize, Deserialize)]
struct TableJson {
    factors: Vec<u64>,
    entries: Vec<(Vec<u64>, Vec<u64>, String)>,
}

fn parse_entries(
    group: &FiniteAbelianGroup,
    entries: Vec<(Vec<u64>, Vec<u64>, String)>,
) -> Result<Vec<(GroupElement, GroupElement, CircleValue)>> {
    entries
        .into_iter()
        .map(|(x, y, v)| {
            if !group.contains(&x) || !group.contains(&y) {
                return Err(Error::Json(format!(
                    "element {x:?} or {y:?} not in {group}"
                )));
            }
            Ok((x, y, v.parse::<CircleValue>()?))
        })
        .collect()
}

impl Cocycle2 {
    pub fn to_json(&self) -> serde_json::Value {
        let elems = self.group.elements();
        let mut entries = Vec::new();
        for x in &elems {
            for y in &elems {
                entries.push((x.clone(), y.clone(), self.value(x, y).to_fraction_string()));
            }
        }
        serde_json::to_value(TableJson {
            factors: self.group.factors().to_vec(),
            entries,
        })
        .expect("serializable")
    }

    /// Parses the table form; every pair must appear exactly once.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: TableJson = serde_json::from_str(s)?;
        let group = FiniteAbelianGroup::new(raw.factors)?;
        let n = check_table_order(&group)?;
        let mut table: Vec<Option<CircleValue>> = vec![None; n * n];
        for (x, y, v) in parse_entries(&group, raw.entries)? {
            let slot = &mut table[group.index_of(&x) * n + group.index_of(&y)];
            if slot.is_some() {
                return Err(Error::Json(format!("duplicate entry for ({x:?}, {y:?})")));
            }
            *slot = Some(v);
        }
        let table = table
            .into_iter()
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Json("cocycle table is incomplete".into()))?;
        Cocycle2::new(group, table)
    }
}

impl Bicharacter {
    pub fn to_json(&self) -> serde_json::Value {
        let elems = self.group.elements();
        let mut entries = Vec::new();
        for x in &elems {
            for y in &elems {
                entries.push((x.clone(), y.clone(), self.eval(x, y).to_fraction_string()));
            }
        }
        serde_json::to_value(TableJson {
            factors: self.group.factors().to_vec(),
            entries,
        })
        .expect("serializable")
    }

    /// Parses a table; generator pairs must be present and every listed entry
    /// must agree with the bilinear extension.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: TableJson = serde_json::from_str(s)?;
        let group = FiniteAbelianGroup::new(raw.factors)?;
        check_table_order(&group)?;
        let entries = parse_entries(&group, raw.entries)?;
        let k = group.num_generators();
        let mut matrix = vec![vec![None; k]; k];
        for (x, y, v) in &entries {
            let gi = (0..k).find(|&i| *x == group.generator(i));
            let gj = (0..k).find(|&j| *y == group.generator(j));
            if let (Some(i), Some(j)) = (gi, gj) {
                matrix[i][j] = Some(*v);
            }
        }
        let matrix = matrix
            .into_iter()
            .map(|r| r.into_iter().collect::<Option<Vec<_>>>())
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Json("bicharacter table lacks a generator pair".into()))?;
        let b = Bicharacter::new(group, matrix)?;
        for (x, y, v) in &entries {
            if b.eval(x, y) != *v {
                return Err(Error::NotBiQuasicharacter(format!(
                    "entry ({x:?}, {y:?}) = {v} disagrees with the bilinear extension"
                )));
            }
        }
        Ok(b)
    }
}

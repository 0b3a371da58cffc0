//! Finite abelian groups in invariant-factor form, and the quotient `P/Q`.

use std::fmt;

use num_integer::Integer;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};

use super::dynkin::{cartan_matrix, DynkinType};
use super::weight::Weight;
use crate::error::{Error, Result};
use crate::linalg::{smith_normal_form, IntMatrix};

/// Element of a [`FiniteAbelianGroup`]: one residue per invariant factor.
pub type GroupElement = Vec<u64>;

/// `Z/n_1 × … × Z/n_k` with `2 <= n_1 | n_2 | … | n_k`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<u64>", into = "Vec<u64>")]
pub struct FiniteAbelianGroup {
    factors: Vec<u64>,
}

impl FiniteAbelianGroup {
    pub fn trivial() -> Self {
        FiniteAbelianGroup { factors: vec![] }
    }

    pub fn cyclic(n: u64) -> Self {
        FiniteAbelianGroup::from_cyclic_orders(&[n]).expect("positive order")
    }

    /// Validates an invariant-factor list.
    pub fn new(factors: Vec<u64>) -> Result<Self> {
        if factors.iter().any(|&n| n < 2) {
            return Err(Error::InvalidGroup(format!(
                "invariant factors must be >= 2, got {factors:?}"
            )));
        }
        if factors.windows(2).any(|w| w[1] % w[0] != 0) {
            return Err(Error::InvalidGroup(format!(
                "invariant factors must form a divisibility chain, got {factors:?}"
            )));
        }
        let g = FiniteAbelianGroup { factors };
        if g.checked_order().is_none() {
            return Err(Error::TooLarge("group order overflows".into()));
        }
        Ok(g)
    }

    /// `Z/m_1 × … × Z/m_k` for arbitrary positive `m_i`, brought to invariant
    /// factors.
    pub fn from_cyclic_orders(orders: &[u64]) -> Result<Self> {
        if orders.contains(&0) {
            return Err(Error::InvalidGroup("cyclic orders must be positive".into()));
        }
        let mut total: u64 = 1;
        for &m in orders {
            total = total
                .checked_mul(m)
                .filter(|&t| t <= i64::MAX as u64)
                .ok_or_else(|| Error::TooLarge("group order overflows".into()))?;
        }
        let diag: IntMatrix = (0..orders.len())
            .map(|i| {
                (0..orders.len())
                    .map(|j| if i == j { orders[i] as i64 } else { 0 })
                    .collect()
            })
            .collect();
        let d = smith_normal_form(&diag).diagonal();
        FiniteAbelianGroup::new(d.into_iter().filter(|&x| x > 1).map(|x| x as u64).collect())
    }

    pub fn factors(&self) -> &[u64] {
        &self.factors
    }

    /// Number of invariant factors (minimal number of generators).
    pub fn num_generators(&self) -> usize {
        self.factors.len()
    }

    fn checked_order(&self) -> Option<u64> {
        self.factors.iter().try_fold(1u64, |a, &b| a.checked_mul(b))
    }

    pub fn order(&self) -> u64 {
        self.checked_order().expect("validated on construction")
    }

    pub fn is_trivial(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn is_cyclic(&self) -> bool {
        self.factors.len() <= 1
    }

    pub fn exponent(&self) -> u64 {
        self.factors.last().copied().unwrap_or(1)
    }

    pub fn zero(&self) -> GroupElement {
        vec![0; self.factors.len()]
    }

    /// The `i`-th invariant-factor generator.
    pub fn generator(&self, i: usize) -> GroupElement {
        let mut e = self.zero();
        e[i] = 1 % self.factors[i];
        e
    }

    pub fn add(&self, x: &[u64], y: &[u64]) -> GroupElement {
        self.factors
            .iter()
            .zip(x.iter().zip(y))
            .map(|(&n, (&a, &b))| (a + b) % n)
            .collect()
    }

    pub fn neg(&self, x: &[u64]) -> GroupElement {
        self.factors
            .iter()
            .zip(x)
            .map(|(&n, &a)| (n - a % n) % n)
            .collect()
    }

    pub fn mul_int(&self, x: &[u64], k: i64) -> GroupElement {
        self.factors
            .iter()
            .zip(x)
            .map(|(&n, &a)| ((a as i128 * k as i128).rem_euclid(n as i128)) as u64)
            .collect()
    }

    /// Reduces integer coordinates modulo the invariant factors.
    pub fn reduce(&self, coords: &[i64]) -> GroupElement {
        self.factors
            .iter()
            .zip(coords)
            .map(|(&n, &a)| a.rem_euclid(n as i64) as u64)
            .collect()
    }

    pub fn contains(&self, x: &[u64]) -> bool {
        x.len() == self.factors.len() && x.iter().zip(&self.factors).all(|(a, n)| a < n)
    }

    /// Mixed-radix index with the last coordinate varying fastest.
    pub fn index_of(&self, x: &[u64]) -> usize {
        let mut idx = 0usize;
        for (&n, &a) in self.factors.iter().zip(x) {
            idx = idx * n as usize + a as usize;
        }
        idx
    }

    pub fn element_at(&self, mut idx: usize) -> GroupElement {
        let mut out = vec![0u64; self.factors.len()];
        for (slot, &n) in out.iter_mut().zip(&self.factors).rev() {
            *slot = (idx % n as usize) as u64;
            idx /= n as usize;
        }
        out
    }

    /// All elements in index order.
    pub fn elements(&self) -> Vec<GroupElement> {
        (0..self.order() as usize)
            .map(|i| self.element_at(i))
            .collect()
    }

    pub fn element_order(&self, x: &[u64]) -> u64 {
        self.factors
            .iter()
            .zip(x)
            .map(|(&n, &a)| n / num_integer::gcd(n, a))
            .fold(1, num_integer::lcm)
    }
}

impl TryFrom<Vec<u64>> for FiniteAbelianGroup {
    type Error = Error;
    fn try_from(v: Vec<u64>) -> Result<Self> {
        FiniteAbelianGroup::new(v)
    }
}

impl From<FiniteAbelianGroup> for Vec<u64> {
    fn from(g: FiniteAbelianGroup) -> Vec<u64> {
        g.factors
    }
}

impl fmt::Display for FiniteAbelianGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "trivial");
        }
        for (i, n) in self.factors.iter().enumerate() {
            if i > 0 {
                write!(f, " × ")?;
            }
            write!(f, "Z/{n}")?;
        }
        Ok(())
    }
}

/// `P/Q` together with the integer matrix that sends fundamental-weight
/// coordinates to group elements.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PqProjection {
    ty: DynkinType,
    group: FiniteAbelianGroup,
    matrix: IntMatrix,
}

impl PqProjection {
    pub fn dynkin_type(&self) -> DynkinType {
        self.ty
    }

    pub fn group(&self) -> &FiniteAbelianGroup {
        &self.group
    }

    /// One row per invariant factor, one column per fundamental weight.
    pub fn matrix(&self) -> &IntMatrix {
        &self.matrix
    }

    pub fn project(&self, w: &Weight) -> GroupElement {
        assert_eq!(w.rank(), self.ty.rank(), "weight rank mismatch");
        let coords: Vec<i64> = self
            .matrix
            .iter()
            .map(|row| row.iter().zip(w.coords()).map(|(a, b)| a * b).sum())
            .collect();
        self.group.reduce(&coords)
    }

    /// A weight projecting to `x`, found as a nonnegative combination of
    /// fundamental weights.
    pub fn preimage(&self, x: &[u64]) -> Weight {
        let rank = self.ty.rank();
        let n = self.group.order() as usize;
        let mut reps: Vec<Option<Weight>> = vec![None; n];
        let zero = Weight::zero(rank);
        reps[self.group.index_of(&self.project(&zero))] = Some(zero.clone());
        let mut frontier = vec![zero];
        while let Some(w) = frontier.pop() {
            for i in 0..rank {
                let next = &w + &Weight::fundamental(rank, i);
                let idx = self.group.index_of(&self.project(&next));
                if reps[idx].is_none() {
                    reps[idx] = Some(next.clone());
                    frontier.push(next);
                }
            }
        }
        reps[self.group.index_of(x)]
            .clone()
            .expect("fundamental weights generate P/Q")
    }
}

/// `P/Q` as the cokernel of the Cartan matrix acting on weight coordinates.
pub fn fundamental_group(ty: DynkinType) -> PqProjection {
    let cartan = cartan_matrix(ty);
    let snf = smith_normal_form(cartan.entries());
    let diag = snf.diagonal();
    let mut factors = Vec::new();
    let mut matrix = Vec::new();
    for (i, &d) in diag.iter().enumerate() {
        assert!(d != 0, "Cartan matrices are nonsingular");
        if d > 1 {
            factors.push(d as u64);
            matrix.push(
                snf.u[i]
                    .iter()
                    .map(|x| x.mod_floor(&d.into()).to_i64().expect("reduced below d"))
                    .collect(),
            );
        }
    }
    PqProjection {
        ty,
        group: FiniteAbelianGroup::new(factors).expect("SNF yields a divisibility chain"),
        matrix,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ty(s: &str) -> DynkinType {
        s.parse().unwrap()
    }

    #[test]
    fn group_normalization() {
        assert_eq!(
            FiniteAbelianGroup::from_cyclic_orders(&[2, 3])
                .unwrap()
                .factors(),
            &[6]
        );
        assert_eq!(
            FiniteAbelianGroup::from_cyclic_orders(&[4, 2])
                .unwrap()
                .factors(),
            &[2, 4]
        );
        assert_eq!(
            FiniteAbelianGroup::from_cyclic_orders(&[1, 1])
                .unwrap()
                .factors(),
            &[] as &[u64]
        );
        assert!(FiniteAbelianGroup::new(vec![2, 3]).is_err());
        assert!(FiniteAbelianGroup::new(vec![1]).is_err());
        assert!(FiniteAbelianGroup::from_cyclic_orders(&[0]).is_err());
    }

    #[test]
    fn element_indexing() {
        let g = FiniteAbelianGroup::new(vec![2, 4]).unwrap();
        for (i, e) in g.elements().iter().enumerate() {
            assert_eq!(g.index_of(e), i);
        }
        assert_eq!(g.element_order(&[1, 2]), 2);
        assert_eq!(g.element_order(&[0, 1]), 4);
        assert_eq!(g.add(&[1, 3], &[1, 3]), vec![0, 2]);
        assert_eq!(g.neg(&[1, 3]), vec![1, 1]);
    }

    #[test]
    fn known_fundamental_groups() {
        assert_eq!(fundamental_group(ty("D4")).group().factors(), &[2, 2]);
        assert_eq!(fundamental_group(ty("A2")).group().factors(), &[3]);
        assert!(fundamental_group(ty("E8")).group().is_trivial());
        assert_eq!(fundamental_group(ty("D5")).group().factors(), &[4]);
        assert_eq!(fundamental_group(ty("E6")).group().factors(), &[3]);
        assert_eq!(fundamental_group(ty("E7")).group().factors(), &[2]);
    }

    #[test]
    fn simple_roots_project_to_zero() {
        for t in DynkinType::all_up_to_rank(8) {
            let p = fundamental_group(t);
            let c = cartan_matrix(t);
            for j in 0..t.rank() {
                let alpha = Weight::new(c.simple_root(j));
                assert_eq!(p.project(&alpha), p.group().zero(), "{t} α_{}", j + 1);
            }
            for x in p.group().elements() {
                assert_eq!(p.project(&p.preimage(&x)), x);
            }
        }
    }
}

//! Cocycles on the monoid `P₊` of dominant weights, truncated to pairs whose
//! coordinate sums add up to at most a bound `H`.
//!
//! Values are nonzero [`Scalar`]s written multiplicatively. The commutator of
//! a cocycle is a skew bi-quasicharacter on the truncation; when its values
//! are roots of unity it extends bilinearly to all of `P`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circle::CircleValue;
use crate::cohomology::{Bicharacter, Cocycle2};
use crate::error::{Error, Result};
use crate::lattice::{
    cartan_matrix, dominant_weights_up_to, fundamental_group, DynkinType, Weight,
};
use crate::scalar::Scalar;

/// Pair key used in the JSON form: `"1,0|0,2"`.
pub fn pair_key(mu: &Weight, eta: &Weight) -> String {
    format!("{mu}|{eta}")
}

fn parse_pair_key(s: &str, rank: usize) -> Result<(Weight, Weight)> {
    let (a, b) = s
        .split_once('|')
        .ok_or_else(|| Error::Parse(format!("pair key {s:?} lacks '|'")))?;
    let (mu, eta): (Weight, Weight) = (a.parse()?, b.parse()?);
    mu.check_rank(rank)?;
    eta.check_rank(rank)?;
    Ok((mu, eta))
}

/// Largest number of dominant weights a truncation may contain.
pub const MAX_TRUNCATION_WEIGHTS: u128 = 4096;

/// Rejects truncations with more than [`MAX_TRUNCATION_WEIGHTS`] dominant weights.
pub fn check_truncation_size(rank: usize, bound: i64) -> Result<()> {
    if bound < 0 {
        return Err(Error::Precondition(format!(
            "negative truncation bound {bound}"
        )));
    }
    // number of dominant weights with coordinate sum <= bound is C(bound + rank, rank)
    let mut count: u128 = 1;
    for k in 1..=rank as u128 {
        count = count * (bound as u128 + k) / k;
        if count > MAX_TRUNCATION_WEIGHTS {
            return Err(Error::TooLarge(format!(
                "truncation of rank {rank} and bound {bound} has more than {MAX_TRUNCATION_WEIGHTS} weights"
            )));
        }
    }
    Ok(())
}

pub(crate) fn truncated_pairs(rank: usize, bound: i64) -> Vec<(Weight, Weight)> {
    let ws = dominant_weights_up_to(rank, bound);
    let mut out = Vec::new();
    for mu in &ws {
        for eta in &ws {
            if mu.coord_sum() + eta.coord_sum() <= bound {
                out.push((mu.clone(), eta.clone()));
            }
        }
    }
    out
}

/// A cocycle on the truncated dominant monoid.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidCocycle {
    ty: DynkinType,
    bound: i64,
    values: BTreeMap<(Weight, Weight), Scalar>,
}

impl MonoidCocycle {
    /// Validates the domain (every pair with `|μ|+|η| ≤ H`, nothing else) and
    /// the cocycle identity on triples with `|μ|+|η|+|ν| ≤ H`.
    pub fn new(
        ty: DynkinType,
        bound: i64,
        values: BTreeMap<(Weight, Weight), Scalar>,
    ) -> Result<Self> {
        check_truncation_size(ty.rank(), bound)?;
        let expected = truncated_pairs(ty.rank(), bound);
        if expected.len() != values.len() || expected.iter().any(|p| !values.contains_key(p)) {
            return Err(Error::Precondition(format!(
                "monoid cocycle table must cover exactly the {} dominant pairs with coordinate sum <= {bound}",
                expected.len()
            )));
        }
        let c = MonoidCocycle { ty, bound, values };
        c.check_identity()?;
        Ok(c)
    }

    pub fn from_fn(
        ty: DynkinType,
        bound: i64,
        f: impl Fn(&Weight, &Weight) -> Scalar,
    ) -> Result<Self> {
        check_truncation_size(ty.rank(), bound)?;
        let values = truncated_pairs(ty.rank(), bound)
            .into_iter()
            .map(|(m, e)| {
                let v = f(&m, &e);
                ((m, e), v)
            })
            .collect();
        MonoidCocycle::new(ty, bound, values)
    }

    /// `a(μ)·a(η)·a(μ+η)⁻¹`.
    pub fn coboundary(ty: DynkinType, bound: i64, a: &BTreeMap<Weight, Scalar>) -> Result<Self> {
        for w in dominant_weights_up_to(ty.rank(), bound) {
            if !a.contains_key(&w) {
                return Err(Error::Precondition(format!("cochain is undefined at {w}")));
            }
        }
        MonoidCocycle::from_fn(ty, bound, |m, e| &(&a[m] * &a[e]) / &a[&(m + e)])
    }

    pub fn dynkin_type(&self) -> DynkinType {
        self.ty
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn value(&self, mu: &Weight, eta: &Weight) -> Option<&Scalar> {
        self.values.get(&(mu.clone(), eta.clone()))
    }

    pub fn values(&self) -> &BTreeMap<(Weight, Weight), Scalar> {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.values().all(Scalar::is_one)
    }

    /// `c(μ,η)·c(μ+η,ν) = c(η,ν)·c(μ,η+ν)` on every triple inside the bound.
    pub fn check_identity(&self) -> Result<()> {
        let ws = dominant_weights_up_to(self.ty.rank(), self.bound);
        for mu in &ws {
            for eta in &ws {
                for nu in &ws {
                    if mu.coord_sum() + eta.coord_sum() + nu.coord_sum() > self.bound {
                        continue;
                    }
                    let v = |a: &Weight, b: &Weight| &self.values[&(a.clone(), b.clone())];
                    let lhs = v(mu, eta) * v(&(mu + eta), nu);
                    let rhs = v(eta, nu) * v(mu, &(eta + nu));
                    if lhs != rhs {
                        return Err(Error::NotACocycle {
                            x: mu.to_string(),
                            y: eta.to_string(),
                            z: nu.to_string(),
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// `c'(μ,η) = c(proj μ, proj η)`.
pub fn restrict_to_monoid(ty: DynkinType, c: &Cocycle2, bound: i64) -> Result<MonoidCocycle> {
    let proj = fundamental_group(ty);
    if proj.group() != c.group() {
        return Err(Error::InvalidGroup(format!(
            "cocycle lives on {}, but P/Q of {ty} is {}",
            c.group(),
            proj.group()
        )));
    }
    MonoidCocycle::from_fn(ty, bound, |m, e| {
        Scalar::from_phase(c.value(&proj.project(m), &proj.project(e)))
    })
}

/// `b(μ,η) = c(μ,η)·c(η,μ)⁻¹` on the truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MonoidCommutator {
    ty: DynkinType,
    bound: i64,
    values: BTreeMap<(Weight, Weight), Scalar>,
}

impl MonoidCommutator {
    pub fn value(&self, mu: &Weight, eta: &Weight) -> Option<&Scalar> {
        self.values.get(&(mu.clone(), eta.clone()))
    }

    pub fn values(&self) -> &BTreeMap<(Weight, Weight), Scalar> {
        &self.values
    }

    pub fn is_trivial(&self) -> bool {
        self.values.values().all(Scalar::is_one)
    }

    /// First pair, in table order, where `b ≠ 1`.
    pub fn first_nontrivial(&self) -> Option<(&Weight, &Weight, &Scalar)> {
        self.values
            .iter()
            .find(|(_, v)| !v.is_one())
            .map(|((m, e), v)| (m, e, v))
    }
}

pub fn monoid_commutator(c: &MonoidCocycle) -> MonoidCommutator {
    let values = c
        .values
        .iter()
        .map(|((m, e), v)| {
            (
                (m.clone(), e.clone()),
                v / &c.values[&(e.clone(), m.clone())],
            )
        })
        .collect();
    MonoidCommutator {
        ty: c.ty,
        bound: c.bound,
        values,
    }
}

/// A skew bicharacter on `P`, given on pairs of fundamental weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBicharacter {
    ty: DynkinType,
    matrix: Vec<Vec<CircleValue>>,
}

impl LatticeBicharacter {
    pub fn new(ty: DynkinType, matrix: Vec<Vec<CircleValue>>) -> Result<Self> {
        let r = ty.rank();
        if matrix.len() != r || matrix.iter().any(|row| row.len() != r) {
            return Err(Error::Precondition(
                "bicharacter matrix must be rank × rank".into(),
            ));
        }
        for i in 0..r {
            for j in 0..r {
                if matrix[i][j] != -matrix[j][i] {
                    return Err(Error::NotAlternating(format!(
                        "entries ({}, {}) and ({}, {}) are not opposite",
                        i + 1,
                        j + 1,
                        j + 1,
                        i + 1
                    )));
                }
            }
        }
        Ok(LatticeBicharacter { ty, matrix })
    }

    pub fn zero(ty: DynkinType) -> Self {
        let r = ty.rank();
        LatticeBicharacter {
            ty,
            matrix: vec![vec![CircleValue::zero(); r]; r],
        }
    }

    pub fn dynkin_type(&self) -> DynkinType {
        self.ty
    }

    pub fn matrix(&self) -> &[Vec<CircleValue>] {
        &self.matrix
    }

    pub fn is_zero(&self) -> bool {
        self.matrix.iter().flatten().all(CircleValue::is_zero)
    }

    pub fn eval(&self, x: &Weight, y: &Weight) -> CircleValue {
        let mut acc = CircleValue::zero();
        for (i, &a) in x.coords().iter().enumerate() {
            for (j, &b) in y.coords().iter().enumerate() {
                if a != 0 && b != 0 {
                    acc += self.matrix[i][j].mul_int(a * b);
                }
            }
        }
        acc
    }

    /// First `(i, j)` with `b(α_i, ω_j) ≠ 0`, 0-based.
    pub fn root_kernel_violation(&self) -> Option<(usize, usize)> {
        let cartan = cartan_matrix(self.ty);
        let r = self.ty.rank();
        for i in 0..r {
            let alpha = Weight::new(cartan.simple_root(i));
            for j in 0..r {
                if !self.eval(&alpha, &Weight::fundamental(r, j)).is_zero() {
                    return Some((i, j));
                }
            }
        }
        None
    }

    /// The bicharacter on `P/Q` through which `b` factors.
    pub fn descend_to_pq(&self) -> Result<Bicharacter> {
        if let Some((i, j)) = self.root_kernel_violation() {
            return Err(Error::Precondition(format!(
                "b(α_{}, ω_{}) ≠ 0, so b does not factor through P/Q",
                i + 1,
                j + 1
            )));
        }
        let proj = fundamental_group(self.ty);
        let g = proj.group();
        let lifts: Vec<Weight> = (0..g.num_generators())
            .map(|k| proj.preimage(&g.generator(k)))
            .collect();
        let matrix = lifts
            .iter()
            .map(|x| lifts.iter().map(|y| self.eval(x, y)).collect())
            .collect();
        Bicharacter::new(g.clone(), matrix)
    }
}

/// `b(α_i, ω_j) = 0` for all simple roots and fundamental weights.
pub fn kernel_contains_roots(b: &LatticeBicharacter) -> bool {
    b.root_kernel_violation().is_none()
}

/// Result of [`extend_to_lattice`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeExtension {
    pub bicharacter: LatticeBicharacter,
    /// Number of table entries `b(μ,η)` the bilinear extension was checked against.
    pub representations_checked: usize,
}

/// Extends a commutator table to a bicharacter on `P`.
///
/// Additivity in each argument is checked on every triple inside the bound,
/// the generator values are read off at pairs of fundamental weights, and the
/// bilinear extension is compared with every table entry. Since each
/// `λ ∈ P` is a difference of dominant weights, agreement on the table is
/// agreement on every representation `λ = μ − μ'` inside the truncation.
pub fn extend_to_lattice(b: &MonoidCommutator) -> Result<LatticeExtension> {
    let r = b.ty.rank();
    if b.bound < 2 && r > 0 {
        return Err(Error::Precondition(
            "extension needs truncation bound >= 2".into(),
        ));
    }
    let ws = dominant_weights_up_to(r, b.bound);
    let get = |x: &Weight, y: &Weight| &b.values[&(x.clone(), y.clone())];
    for m in &ws {
        for m2 in &ws {
            for e in &ws {
                if m.coord_sum() + m2.coord_sum() + e.coord_sum() > b.bound {
                    continue;
                }
                let s = m + m2;
                if *get(&s, e) != get(m, e) * get(m2, e) || *get(e, &s) != get(e, m) * get(e, m2) {
                    return Err(Error::NotBiQuasicharacter(format!(
                        "additivity fails at ({m}) + ({m2}) against ({e})"
                    )));
                }
            }
        }
    }
    let mut matrix = vec![vec![CircleValue::zero(); r]; r];
    for (i, row) in matrix.iter_mut().enumerate() {
        for (j, slot) in row.iter_mut().enumerate() {
            let v = get(&Weight::fundamental(r, i), &Weight::fundamental(r, j));
            if !v.is_root_of_unity() {
                return Err(Error::NotRootOfUnity(v.to_string()));
            }
            *slot = v.phase();
        }
    }
    let bicharacter = LatticeBicharacter::new(b.ty, matrix)?;
    for ((m, e), v) in &b.values {
        if Scalar::from_phase(bicharacter.eval(m, e)) != *v {
            return Err(Error::NotBiQuasicharacter(format!(
                "bilinear extension disagrees with the table at ({m}, {e})"
            )));
        }
    }
    Ok(LatticeExtension {
        bicharacter,
        representations_checked: b.values.len(),
    })
}

/// Outcome of [`monoid_coboundary_witness`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum MonoidWitness {
    /// `c(μ,η) = a(μ)·a(η)·a(μ+η)⁻¹` on every pair of the truncation.
    Coboundary { a: BTreeMap<Weight, Scalar> },
    /// The table is not symmetric at `(μ, η)`, or no cochain fits there.
    NotCoboundary {
        mu: Weight,
        eta: Weight,
        reason: String,
    },
}

impl MonoidWitness {
    pub fn is_coboundary(&self) -> bool {
        matches!(self, MonoidWitness::Coboundary { .. })
    }
}

/// Decides whether `c` is a coboundary on the truncation.
///
/// A non-symmetric table is rejected with its first asymmetric pair. For a
/// symmetric one the cochain is built by recursion on the coordinate sum:
/// `a(0) = c(0,0)`, `a(ω_i) = 1`, and `a(μ) = a(ω_i)·a(μ−ω_i)·c(ω_i, μ−ω_i)⁻¹`
/// for the first `i` with `μ(i) > 0`. Any two witnesses differ by a character
/// of `P₊`, so this choice loses nothing; the result is checked against every
/// pair before it is returned.
pub fn monoid_coboundary_witness(c: &MonoidCocycle) -> MonoidWitness {
    if let Some((m, e, v)) = monoid_commutator(c).first_nontrivial() {
        return MonoidWitness::NotCoboundary {
            mu: m.clone(),
            eta: e.clone(),
            reason: format!("c(μ,η)/c(η,μ) = {v} ≠ 1"),
        };
    }
    let r = c.ty.rank();
    let zero = Weight::zero(r);
    let mut a: BTreeMap<Weight, Scalar> = BTreeMap::new();
    for mu in dominant_weights_up_to(r, c.bound) {
        let v = if mu.is_zero() {
            c.values[&(zero.clone(), zero.clone())].clone()
        } else if mu.coord_sum() == 1 {
            Scalar::one()
        } else {
            let i = (0..r).find(|&i| mu.get(i) > 0).expect("nonzero weight");
            let w = Weight::fundamental(r, i);
            let rest = &mu - &w;
            &(&a[&w] * &a[&rest]) / &c.values[&(w, rest)]
        };
        a.insert(mu, v);
    }
    for ((m, e), v) in &c.values {
        if &(&a[m] * &a[e]) / &a[&(m + e)] != *v {
            return MonoidWitness::NotCoboundary {
                mu: m.clone(),
                eta: e.clone(),
                reason: "no cochain reproduces the table here".into(),
            };
        }
    }
    MonoidWitness::Coboundary { a }
}

#[derive(Serialize, Deserialize)]
struct MonoidJson {
    #[serde(rename = "type")]
    ty: DynkinType,
    bound: i64,
    values: BTreeMap<String, Scalar>,
}

/// Largest truncation bound accepted from JSON.
pub const MAX_PARSED_BOUND: i64 = 64;

impl MonoidCocycle {
    pub fn to_json(&self) -> serde_json::Value {
        let values = self
            .values
            .iter()
            .map(|((m, e), v)| (pair_key(m, e), v.clone()))
            .collect();
        serde_json::to_value(MonoidJson {
            ty: self.ty,
            bound: self.bound,
            values,
        })
        .expect("serializable")
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        let raw: MonoidJson = serde_json::from_str(s)?;
        if !(0..=MAX_PARSED_BOUND).contains(&raw.bound) {
            return Err(Error::TooLarge(format!(
                "bound {} outside 0..={MAX_PARSED_BOUND}",
                raw.bound
            )));
        }
        let mut values = BTreeMap::new();
        for (k, v) in raw.values {
            let pair = parse_pair_key(&k, raw.ty.rank())?;
            if values.insert(pair, v).is_some() {
                return Err(Error::Json(format!("duplicate key {k:?}")));
            }
        }
        MonoidCocycle::new(raw.ty, raw.bound, values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{alternating_bicharacters, bicharacter_to_cocycle};
    use crate::lattice::FiniteAbelianGroup;

    fn ty(s: &str) -> DynkinType {
        s.parse().unwrap()
    }

    fn d4_class() -> Cocycle2 {
        let g = fundamental_group(ty("D4")).group().clone();
        bicharacter_to_cocycle(&alternating_bicharacters(&g)[1]).unwrap()
    }

    #[test]
    fn zero_cocycle_restricts_to_one() {
        let c = Cocycle2::zero(FiniteAbelianGroup::cyclic(3)).unwrap();
        let m = restrict_to_monoid(ty("A2"), &c, 4).unwrap();
        assert!(m.is_trivial());
        assert!(monoid_commutator(&m).is_trivial());
        assert!(restrict_to_monoid(ty("A1"), &c, 4).is_err());
    }

    #[test]
    fn d4_restriction_is_sign_valued_and_skew() {
        let m = restrict_to_monoid(ty("D4"), &d4_class(), 3).unwrap();
        assert!(m
            .values()
            .values()
            .all(|v| v.is_one() || *v == Scalar::minus_one()));
        let b = monoid_commutator(&m);
        assert!(!b.is_trivial());
        let ext = extend_to_lattice(&b).unwrap();
        assert!(!ext.bicharacter.is_zero());
        assert!(kernel_contains_roots(&ext.bicharacter));
        let down = ext.bicharacter.descend_to_pq().unwrap();
        assert_eq!(
            down,
            crate::cohomology::cocycle_commutator(&d4_class()).unwrap()
        );
        assert!(!monoid_coboundary_witness(&m).is_coboundary());
    }

    #[test]
    fn a1_restriction_depends_on_parity() {
        let g = FiniteAbelianGroup::cyclic(2);
        let c = Cocycle2::from_fn(g, |x, y| CircleValue::new((x[0] * y[0]) as i64, 2)).unwrap();
        let m = restrict_to_monoid(ty("A1"), &c, 6).unwrap();
        for ((a, b), v) in m.values() {
            let odd = a.get(0) % 2 == 1 && b.get(0) % 2 == 1;
            assert_eq!(
                *v,
                if odd {
                    Scalar::minus_one()
                } else {
                    Scalar::one()
                }
            );
        }
        match monoid_coboundary_witness(&m) {
            MonoidWitness::Coboundary { a } => {
                let back = MonoidCocycle::coboundary(ty("A1"), 6, &a).unwrap();
                assert_eq!(back, m);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn random_bicharacter_misses_roots() {
        let third = CircleValue::new(1, 3);
        let b = LatticeBicharacter::new(
            ty("A2"),
            vec![
                vec![CircleValue::zero(), third],
                vec![-third, CircleValue::zero()],
            ],
        )
        .unwrap();
        assert_eq!(b.root_kernel_violation(), Some((0, 0)));
        assert!(b.descend_to_pq().is_err());
        assert!(kernel_contains_roots(&LatticeBicharacter::zero(ty("A2"))));
    }

    #[test]
    fn identity_violation_is_reported() {
        let bad = MonoidCocycle::from_fn(ty("A1"), 3, |m, e| {
            if m.get(0) == 1 && e.get(0) == 2 {
                Scalar::from_int(2).unwrap()
            } else {
                Scalar::one()
            }
        });
        assert!(matches!(bad, Err(Error::NotACocycle { .. })));
    }

    #[test]
    fn json_roundtrip() {
        let m = restrict_to_monoid(ty("D4"), &d4_class(), 2).unwrap();
        let s = m.to_json().to_string();
        assert_eq!(MonoidCocycle::from_json_str(&s).unwrap(), m);
        assert!(MonoidCocycle::from_json_str(r#"{"type":"A1","bound":1,"values":{}}"#).is_err());
    }
}

//! Finite-dimensional irreducible `U_q(g)`-modules at a generic rational `q`,
//! their tensor products, and intertwiners between them.
//!
//! Conventions: `K_i` acts on a vector of weight `λ` by `q_i^{λ(i)}` with
//! `q_i = q^{d_i}`, `[E_i, F_j] = δ_ij (K_i − K_i⁻¹)/(q_i − q_i⁻¹)`, and
//!
//! ```text
//! Δ(E_i) = E_i ⊗ 1 + K_i ⊗ E_i
//! Δ(F_i) = F_i ⊗ K_i⁻¹ + 1 ⊗ F_i
//! Δ(K_i) = K_i ⊗ K_i
//! ```
//!
//! Under this coproduct `ξ_μ ⊗ ξ_η` is a highest weight vector.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use num_traits::{One, Signed, Zero};
use serde_json::json;

use crate::error::{Error, Result};
use crate::lattice::{cartan_matrix, CartanMatrix, DynkinType, Family, RootSystem, Weight};
use crate::linalg::{QMatrix, Q};
use crate::scalar::parse_rational;

/// Environment variable overriding the default deformation parameter.
pub const DEFAULT_Q_ENV: &str = "QCAT_DEFAULT_Q";

/// Largest module the builder will attempt.
pub const MAX_MODULE_DIM: u128 = 4096;

/// A rational deformation parameter `q ∉ {0, 1, −1}`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct QParam(Q);

impl QParam {
    pub fn new(q: Q) -> Result<Self> {
        if q.is_zero() || q.abs().is_one() {
            return Err(Error::DegenerateQ(format!("{}/{}", q.numer(), q.denom())));
        }
        Ok(QParam(q))
    }

    /// `q = 2`, or the value of `QCAT_DEFAULT_Q` when set.
    pub fn default_q() -> Result<Self> {
        match std::env::var(DEFAULT_Q_ENV) {
            Ok(s) => s.parse(),
            Err(_) => QParam::new(Q::from_integer(2.into())),
        }
    }

    pub fn value(&self) -> &Q {
        &self.0
    }

    /// `q^d`.
    pub fn power(&self, d: i64) -> Q {
        q_pow(&self.0, d)
    }
}

impl FromStr for QParam {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        QParam::new(parse_rational(s)?)
    }
}

impl fmt::Display for QParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.0.numer(), self.0.denom())
    }
}

impl fmt::Debug for QParam {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "q={self}")
    }
}

fn q_pow(x: &Q, n: i64) -> Q {
    if n >= 0 {
        num_traits::pow(x.clone(), n as usize)
    } else {
        num_traits::pow(x.recip(), n.unsigned_abs() as usize)
    }
}

/// `[n]_{q_i} = (q_i^n − q_i^{−n}) / (q_i − q_i^{−1})`.
pub fn q_int(n: i64, qi: &Q) -> Result<Q> {
    if qi.is_zero() || qi.abs().is_one() {
        return Err(Error::DegenerateQ(format!("{}/{}", qi.numer(), qi.denom())));
    }
    Ok((q_pow(qi, n) - q_pow(qi, -n)) / (qi - qi.recip()))
}

/// Sparse vector over the rationals, keyed by basis index.
pub type SVec = BTreeMap<usize, Q>;

fn add_scaled(acc: &mut SVec, v: &SVec, s: &Q) {
    if s.is_zero() {
        return;
    }
    for (&k, x) in v {
        add_entry(acc, k, x * s);
    }
}

fn add_entry(acc: &mut SVec, k: usize, x: Q) {
    if x.is_zero() {
        return;
    }
    let slot = acc.entry(k).or_insert_with(Q::zero);
    *slot += x;
    if slot.is_zero() {
        acc.remove(&k);
    }
}

pub fn svec_scale(v: &SVec, s: &Q) -> SVec {
    let mut out = SVec::new();
    add_scaled(&mut out, v, s);
    out
}

/// `a·u + b·v`.
pub fn svec_combine(a: &Q, u: &SVec, b: &Q, v: &SVec) -> SVec {
    let mut out = SVec::new();
    add_scaled(&mut out, u, a);
    add_scaled(&mut out, v, b);
    out
}

/// Whether `U_q(g)`-modules of this type are built explicitly.
pub fn is_whitelisted(ty: DynkinType) -> bool {
    matches!(
        (ty.family(), ty.rank()),
        (Family::A, 1) | (Family::A, 2) | (Family::B, 2)
    )
}

/// Sparse matrix stored by columns: `cols[b]` lists `(row, coefficient)`.
type SparseCols = Vec<Vec<(usize, Q)>>;

/// An irreducible module `V_μ` with explicit generator matrices.
///
/// Basis vector 0 is `ξ_μ`. Every other basis vector is `F_i` applied to an
/// earlier one, recorded in `origin`. Vectors are ordered by depth below `μ`,
/// then by weight.
#[derive(Clone)]
pub struct ModuleRep {
    ty: DynkinType,
    cartan: CartanMatrix,
    q: QParam,
    highest: Weight,
    weights: Vec<Weight>,
    depth: Vec<usize>,
    origin: Vec<Option<(usize, usize)>>,
    e: Vec<SparseCols>,
    f: Vec<SparseCols>,
    by_weight: BTreeMap<Weight, Vec<usize>>,
}

impl fmt::Debug for ModuleRep {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "V_{:?}[{}, dim {}]", self.highest, self.ty, self.dim())
    }
}

impl ModuleRep {
    pub fn dynkin_type(&self) -> DynkinType {
        self.ty
    }

    pub fn q(&self) -> &QParam {
        &self.q
    }

    pub fn highest_weight(&self) -> &Weight {
        &self.highest
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[Weight] {
        &self.weights
    }

    pub fn weight(&self, b: usize) -> &Weight {
        &self.weights[b]
    }

    pub fn depth(&self, b: usize) -> usize {
        self.depth[b]
    }

    /// `(i, parent)` with `v_b = F_i v_parent`; `None` for `ξ_μ`.
    pub fn origin(&self, b: usize) -> Option<(usize, usize)> {
        self.origin[b]
    }

    pub fn basis_of_weight(&self, w: &Weight) -> &[usize] {
        self.by_weight.get(w).map_or(&[], Vec::as_slice)
    }

    pub fn distinct_weights(&self) -> impl Iterator<Item = &Weight> {
        self.by_weight.keys()
    }

    /// `q_i`.
    pub fn qi(&self, i: usize) -> Q {
        self.q.power(self.cartan.symmetrizers()[i])
    }

    pub fn apply_e(&self, i: usize, b: usize) -> SVec {
        let mut v = SVec::new();
        for (r, x) in &self.e[i][b] {
            add_entry(&mut v, *r, x.clone());
        }
        v
    }

    pub fn apply_f(&self, i: usize, b: usize) -> SVec {
        let mut v = SVec::new();
        for (r, x) in &self.f[i][b] {
            add_entry(&mut v, *r, x.clone());
        }
        v
    }

    fn dense(cols: &SparseCols, dim: usize) -> QMatrix {
        let mut m = QMatrix::zeros(dim, dim);
        for (c, entries) in cols.iter().enumerate() {
            for (r, x) in entries {
                m.set(*r, c, x.clone());
            }
        }
        m
    }

    pub fn e_matrix(&self, i: usize) -> QMatrix {
        ModuleRep::dense(&self.e[i], self.dim())
    }

    pub fn f_matrix(&self, i: usize) -> QMatrix {
        ModuleRep::dense(&self.f[i], self.dim())
    }

    /// `K_i^{power}` as a diagonal matrix.
    pub fn k_matrix(&self, i: usize, power: i64) -> QMatrix {
        let qi = self.qi(i);
        let mut m = QMatrix::zeros(self.dim(), self.dim());
        for (b, w) in self.weights.iter().enumerate() {
            m.set(b, b, q_pow(&qi, power * w.get(i)));
        }
        m
    }

    fn same_module(&self, other: &ModuleRep) -> bool {
        self.ty == other.ty && self.q == other.q && self.highest == other.highest
    }

    /// Checks the defining relations as matrix identities, `E_i ξ = 0`, and
    /// the dimension against the Weyl formula.
    pub fn check_relations(self: &Arc<Self>) -> Result<()> {
        for i in 0..self.ty.rank() {
            if !self.e[i][0].is_empty() {
                return Err(Error::Intertwiner(format!("E_{} ξ ≠ 0", i + 1)));
            }
        }
        let expected = RootSystem::new(self.ty).weyl_dim(&self.highest)?;
        if self.dim() as u128 != expected {
            return Err(Error::DimensionMismatch {
                ty: self.ty.to_string(),
                weight: self.highest.to_string(),
                built: self.dim(),
                expected,
            });
        }
        TensorSpace::new(vec![self.clone()])?.check_relations()
    }

    pub fn to_json(&self) -> serde_json::Value {
        let sparse = |cols: &SparseCols| -> Vec<serde_json::Value> {
            let mut out = Vec::new();
            for (c, entries) in cols.iter().enumerate() {
                for (r, x) in entries {
                    out.push(json!([r, c, format!("{}/{}", x.numer(), x.denom())]));
                }
            }
            out
        };
        json!({
            "type": self.ty.to_string(),
            "highest_weight": self.highest.to_string(),
            "q": self.q.to_string(),
            "dim": self.dim(),
            "basis_weights": self.weights.iter().map(Weight::to_string).collect::<Vec<_>>(),
            "E": self.e.iter().map(sparse).collect::<Vec<_>>(),
            "F": self.f.iter().map(sparse).collect::<Vec<_>>(),
        })
    }
}

/// Builds `V_μ` as the irreducible quotient of the module freely generated
/// from `ξ_μ` by the `F_i`.
///
/// Depth by depth, every `F_i v` with `v` one level up is a candidate. A
/// vector below the top is zero in the irreducible quotient exactly when all
/// `E_j` kill it, and `E_j F_i v = F_i E_j v + δ_ij [λ(i)]_{q_i} v` only needs
/// data from the two levels above. Stacking the `E_j` images of the
/// candidates of one weight into a matrix, its pivot columns give a basis and
/// its reduced echelon form gives every candidate in that basis.
pub fn build_module(ty: DynkinType, mu: &Weight, q: &QParam) -> Result<ModuleRep> {
    if !is_whitelisted(ty) {
        return Err(Error::OutsideWhitelist(ty.to_string()));
    }
    mu.check_rank(ty.rank())?;
    mu.check_dominant()?;
    let rs = RootSystem::new(ty);
    let expected = rs.weyl_dim(mu)?;
    if expected > MAX_MODULE_DIM {
        return Err(Error::TooLarge(format!("V_{mu} has dimension {expected}")));
    }
    let cartan = cartan_matrix(ty);
    let r = ty.rank();
    let qis: Vec<Q> = (0..r).map(|i| q.power(cartan.symmetrizers()[i])).collect();
    let alphas: Vec<Weight> = (0..r).map(|i| Weight::new(cartan.simple_root(i))).collect();

    let mut m = ModuleRep {
        ty,
        cartan: cartan.clone(),
        q: q.clone(),
        highest: mu.clone(),
        weights: vec![mu.clone()],
        depth: vec![0],
        origin: vec![None],
        e: vec![vec![Vec::new()]; r],
        f: vec![vec![Vec::new()]; r],
        by_weight: BTreeMap::new(),
    };
    let mut level: Vec<usize> = vec![0];
    let mut d = 0;
    while !level.is_empty() {
        d += 1;
        if m.dim() as u128 > expected {
            break;
        }
        let mut groups: BTreeMap<Weight, Vec<(usize, usize)>> = BTreeMap::new();
        for &b in &level {
            for i in 0..r {
                groups
                    .entry(&m.weights[b] - &alphas[i])
                    .or_default()
                    .push((i, b));
            }
        }
        let mut next = Vec::new();
        let mut f_updates: Vec<(usize, usize, Vec<(usize, Q)>)> = Vec::new();
        for (w, cands) in groups {
            // E_j F_i b in the basis of the level above, for every candidate
            let images: Vec<Vec<SVec>> = cands
                .iter()
                .map(|&(i, b)| {
                    (0..r)
                        .map(|j| {
                            let mut v = SVec::new();
                            for (c, x) in &m.e[j][b] {
                                for (t, y) in &m.f[i][*c] {
                                    add_entry(&mut v, *t, x * y);
                                }
                            }
                            if i == j {
                                let s = q_int(m.weights[b].get(i), &qis[i]).expect("q validated");
                                add_entry(&mut v, b, s);
                            }
                            v
                        })
                        .collect()
                })
                .collect();
            let mut row_keys: Vec<(usize, usize)> = images
                .iter()
                .flat_map(|per_j| {
                    per_j
                        .iter()
                        .enumerate()
                        .flat_map(|(j, v)| v.keys().map(move |&k| (j, k)))
                })
                .collect();
            row_keys.sort_unstable();
            row_keys.dedup();
            let row_of: HashMap<(usize, usize), usize> =
                row_keys.iter().enumerate().map(|(n, &k)| (k, n)).collect();
            let mut mat = QMatrix::zeros(row_keys.len(), cands.len());
            for (c, per_j) in images.iter().enumerate() {
                for (j, v) in per_j.iter().enumerate() {
                    for (k, x) in v {
                        mat.set(row_of[&(j, *k)], c, x.clone());
                    }
                }
            }
            let rref = mat.rref();
            let mut new_index = Vec::with_capacity(rref.pivots.len());
            for &p in &rref.pivots {
                let idx = m.weights.len();
                let (i, b) = cands[p];
                m.weights.push(w.clone());
                m.depth.push(d);
                m.origin.push(Some((i, b)));
                for j in 0..r {
                    m.e[j].push(images[p][j].iter().map(|(k, x)| (*k, x.clone())).collect());
                    m.f[j].push(Vec::new());
                }
                m.by_weight.entry(w.clone()).or_default().push(idx);
                new_index.push(idx);
                next.push(idx);
            }
            for (c, &(i, b)) in cands.iter().enumerate() {
                let col: Vec<(usize, Q)> = (0..rref.pivots.len())
                    .filter_map(|row| {
                        let x = rref.matrix.get(row, c);
                        (!x.is_zero()).then(|| (new_index[row], x.clone()))
                    })
                    .collect();
                f_updates.push((i, b, col));
            }
        }
        for (i, b, col) in f_updates {
            m.f[i][b] = col;
        }
        level = next;
    }
    m.by_weight.entry(mu.clone()).or_default().insert(0, 0);
    if m.dim() as u128 != expected {
        return Err(Error::DimensionMismatch {
            ty: ty.to_string(),
            weight: mu.to_string(),
            built: m.dim(),
            expected,
        });
    }
    Ok(m)
}

/// Modules of one type and one `q`, built on demand and shared.
#[derive(Debug)]
pub struct ModuleCache {
    ty: DynkinType,
    q: QParam,
    modules: HashMap<Weight, Arc<ModuleRep>>,
}

impl ModuleCache {
    pub fn new(ty: DynkinType, q: QParam) -> Self {
        ModuleCache {
            ty,
            q,
            modules: HashMap::new(),
        }
    }

    pub fn dynkin_type(&self) -> DynkinType {
        self.ty
    }

    pub fn q(&self) -> &QParam {
        &self.q
    }

    pub fn get(&mut self, mu: &Weight) -> Result<Arc<ModuleRep>> {
        if let Some(m) = self.modules.get(mu) {
            return Ok(m.clone());
        }
        let m = Arc::new(build_module(self.ty, mu, &self.q)?);
        self.modules.insert(mu.clone(), m.clone());
        Ok(m)
    }
}

/// `V_1 ⊗ … ⊗ V_k` with basis `e_{b_1} ⊗ … ⊗ e_{b_k}` indexed in mixed radix,
/// first factor most significant.
#[derive(Debug, Clone)]
pub struct TensorSpace {
    factors: Vec<Arc<ModuleRep>>,
    strides: Vec<usize>,
    dim: usize,
}

impl TensorSpace {
    pub fn new(factors: Vec<Arc<ModuleRep>>) -> Result<Self> {
        if factors.is_empty() {
            return Err(Error::Precondition("tensor space needs a factor".into()));
        }
        let (ty, q) = (factors[0].ty, &factors[0].q);
        if factors.iter().any(|f| f.ty != ty || &f.q != q) {
            return Err(Error::Precondition(
                "tensor factors differ in type or q".into(),
            ));
        }
        let mut strides = vec![1usize; factors.len()];
        let mut dim = 1usize;
        for p in (0..factors.len()).rev() {
            strides[p] = dim;
            dim = dim
                .checked_mul(factors[p].dim())
                .ok_or_else(|| Error::TooLarge("tensor dimension overflows".into()))?;
        }
        Ok(TensorSpace {
            factors,
            strides,
            dim,
        })
    }

    pub fn factors(&self) -> &[Arc<ModuleRep>] {
        &self.factors
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn rank(&self) -> usize {
        self.factors[0].ty.rank()
    }

    pub fn encode(&self, parts: &[usize]) -> usize {
        parts.iter().zip(&self.strides).map(|(a, s)| a * s).sum()
    }

    pub fn decode(&self, mut idx: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.factors.len());
        for s in &self.strides {
            out.push(idx / s);
            idx %= s;
        }
        out
    }

    pub fn weight_of(&self, idx: usize) -> Weight {
        let parts = self.decode(idx);
        let mut w = Weight::zero(self.rank());
        for (p, b) in parts.into_iter().enumerate() {
            w = &w + self.factors[p].weight(b);
        }
        w
    }

    /// `ξ ⊗ … ⊗ ξ`.
    pub fn top_vector(&self) -> SVec {
        let mut v = SVec::new();
        v.insert(0, Q::one());
        v
    }

    /// `Δ^{(k)}(E_i)`: `E_i` in slot `p`, `K_i` on the earlier slots.
    pub fn apply_e(&self, i: usize, v: &SVec) -> SVec {
        self.apply_raising_or_lowering(i, v, true)
    }

    /// `Δ^{(k)}(F_i)`: `F_i` in slot `p`, `K_i⁻¹` on the later slots.
    pub fn apply_f(&self, i: usize, v: &SVec) -> SVec {
        self.apply_raising_or_lowering(i, v, false)
    }

    fn apply_raising_or_lowering(&self, i: usize, v: &SVec, raising: bool) -> SVec {
        let qi = self.factors[0].qi(i);
        let k = self.factors.len();
        let mut out = SVec::new();
        for (&idx, c) in v {
            let parts = self.decode(idx);
            let exps: Vec<i64> = parts
                .iter()
                .enumerate()
                .map(|(p, &b)| self.factors[p].weight(b).get(i))
                .collect();
            for p in 0..k {
                let kexp: i64 = if raising {
                    exps[..p].iter().sum()
                } else {
                    -exps[p + 1..].iter().sum::<i64>()
                };
                let scale = c * q_pow(&qi, kexp);
                let module = &self.factors[p];
                let col = if raising {
                    &module.e[i][parts[p]]
                } else {
                    &module.f[i][parts[p]]
                };
                for (r, x) in col {
                    let target = idx - parts[p] * self.strides[p] + r * self.strides[p];
                    add_entry(&mut out, target, &scale * x);
                }
            }
        }
        out
    }

    /// `Δ^{(k)}(K_i^{power})`.
    pub fn apply_k(&self, i: usize, power: i64, v: &SVec) -> SVec {
        let qi = self.factors[0].qi(i);
        v.iter()
            .map(|(&idx, c)| (idx, c * q_pow(&qi, power * self.weight_of(idx).get(i))))
            .collect()
    }

    /// Basis indices of the weight space of weight `nu`, ascending.
    pub fn weight_space(&self, nu: &Weight) -> Vec<usize> {
        fn rec(ts: &TensorSpace, p: usize, left: &Weight, base: usize, out: &mut Vec<usize>) {
            let module = &ts.factors[p];
            if p + 1 == ts.factors.len() {
                for &b in module.basis_of_weight(left) {
                    out.push(base + b * ts.strides[p]);
                }
                return;
            }
            for w in module.distinct_weights() {
                let rest = left - w;
                for &b in module.basis_of_weight(w) {
                    rec(ts, p + 1, &rest, base + b * ts.strides[p], out);
                }
            }
        }
        let mut out = Vec::new();
        rec(self, 0, nu, 0, &mut out);
        out.sort_unstable();
        out
    }

    /// Basis of `{w of weight ν : Δ(E_i) w = 0 for all i}`, echelon-normalized
    /// with respect to the ascending weight-space basis.
    pub fn highest_weight_vectors(&self, nu: &Weight) -> Vec<SVec> {
        let space = self.weight_space(nu);
        if space.is_empty() {
            return Vec::new();
        }
        let images: Vec<Vec<SVec>> = space
            .iter()
            .map(|&idx| {
                let mut v = SVec::new();
                v.insert(idx, Q::one());
                (0..self.rank()).map(|i| self.apply_e(i, &v)).collect()
            })
            .collect();
        let mut keys: Vec<(usize, usize)> = images
            .iter()
            .flat_map(|per_i| {
                per_i
                    .iter()
                    .enumerate()
                    .flat_map(|(i, v)| v.keys().map(move |&k| (i, k)))
            })
            .collect();
        keys.sort_unstable();
        keys.dedup();
        let row_of: HashMap<(usize, usize), usize> =
            keys.iter().enumerate().map(|(n, &k)| (k, n)).collect();
        let mut mat = QMatrix::zeros(keys.len(), space.len());
        for (c, per_i) in images.iter().enumerate() {
            for (i, v) in per_i.iter().enumerate() {
                for (k, x) in v {
                    mat.set(row_of[&(i, *k)], c, x.clone());
                }
            }
        }
        mat.nullspace()
            .into_iter()
            .map(|coeffs| {
                space
                    .iter()
                    .zip(coeffs)
                    .filter(|(_, x)| !x.is_zero())
                    .map(|(&idx, x)| (idx, x))
                    .collect()
            })
            .collect()
    }

    /// Whether `v` is killed by every `Δ(E_i)` and lies in the weight space `nu`.
    pub fn is_highest_weight_vector(&self, v: &SVec, nu: &Weight) -> bool {
        v.keys().all(|&idx| &self.weight_of(idx) == nu)
            && (0..self.rank()).all(|i| self.apply_e(i, v).is_empty())
    }

    /// Checks `[E_i, F_j] = δ_ij (K_i − K_i⁻¹)/(q_i − q_i⁻¹)` on every basis
    /// vector, and that `E_i`, `F_i` shift weights by `±α_i` (which is the
    /// `K`-conjugation relation).
    pub fn check_relations(&self) -> Result<()> {
        let r = self.rank();
        let cartan = &self.factors[0].cartan;
        for idx in 0..self.dim {
            let mut v = SVec::new();
            v.insert(idx, Q::one());
            let w = self.weight_of(idx);
            for i in 0..r {
                let alpha = Weight::new(cartan.simple_root(i));
                let ev = self.apply_e(i, &v);
                let fv = self.apply_f(i, &v);
                if ev.keys().any(|&t| self.weight_of(t) != &w + &alpha)
                    || fv.keys().any(|&t| self.weight_of(t) != &w - &alpha)
                {
                    return Err(Error::Intertwiner(format!(
                        "E_{0} or F_{0} does not shift weights by α_{0} at basis vector {idx}",
                        i + 1
                    )));
                }
                for j in 0..r {
                    let ef = self.apply_e(i, &self.apply_f(j, &v));
                    let fe = self.apply_f(j, &self.apply_e(i, &v));
                    let comm = svec_combine(&Q::one(), &ef, &-Q::one(), &fe);
                    let expected = if i == j {
                        let qi = self.factors[0].qi(i);
                        svec_scale(&v, &q_int(w.get(i), &qi)?)
                    } else {
                        SVec::new()
                    };
                    if comm != expected {
                        return Err(Error::Intertwiner(format!(
                            "[E_{}, F_{}] relation fails at basis vector {idx} of weight {w}",
                            i + 1,
                            j + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    fn dense_of(&self, apply: impl Fn(&SVec) -> SVec) -> QMatrix {
        let mut m = QMatrix::zeros(self.dim, self.dim);
        for c in 0..self.dim {
            let mut v = SVec::new();
            v.insert(c, Q::one());
            for (r, x) in apply(&v) {
                m.set(r, c, x);
            }
        }
        m
    }

    pub fn e_matrix(&self, i: usize) -> QMatrix {
        self.dense_of(|v| self.apply_e(i, v))
    }

    pub fn f_matrix(&self, i: usize) -> QMatrix {
        self.dense_of(|v| self.apply_f(i, v))
    }

    pub fn k_matrix(&self, i: usize, power: i64) -> QMatrix {
        self.dense_of(|v| self.apply_k(i, power, v))
    }

    /// Replaces slot `p` by the target of `m`: `(ι ⊗ … ⊗ m ⊗ … ⊗ ι)(v)`.
    pub fn substitute(&self, v: &SVec, p: usize, m: &Morphism) -> Result<(TensorSpace, SVec)> {
        if !self.factors[p].same_module(&m.source) {
            return Err(Error::Precondition(format!(
                "slot {p} holds {:?}, morphism starts at {:?}",
                self.factors[p], m.source
            )));
        }
        let mut factors = self.factors[..p].to_vec();
        factors.extend(m.target.factors.iter().cloned());
        factors.extend(self.factors[p + 1..].iter().cloned());
        let space = TensorSpace::new(factors)?;
        let inner_k = m.target.factors.len();
        let out = self.substitute_into(&space, v, p, inner_k, m);
        Ok((space, out))
    }

    fn substitute_into(
        &self,
        space: &TensorSpace,
        v: &SVec,
        p: usize,
        inner_k: usize,
        m: &Morphism,
    ) -> SVec {
        let mut out = SVec::new();
        for (&idx, c) in v {
            let parts = self.decode(idx);
            let mut base = 0;
            for (s, &b) in parts.iter().enumerate() {
                if s < p {
                    base += b * space.strides[s];
                } else if s > p {
                    base += b * space.strides[s + inner_k - 1];
                }
            }
            // inner indices are mixed radix over the inner factors, so they
            // shift by the stride of the last inner slot
            let shift = space.strides[p + inner_k - 1];
            for (inner, x) in &m.columns[parts[p]] {
                add_entry(&mut out, base + inner * shift, c * x);
            }
        }
        out
    }
}

/// A module map `V_λ → V_1 ⊗ … ⊗ V_k`, stored by the images of the basis.
#[derive(Debug, Clone)]
pub struct Morphism {
    source: Arc<ModuleRep>,
    target: TensorSpace,
    columns: Vec<SVec>,
}

impl Morphism {
    /// The map sending `ξ_λ ↦ v`, extended by `v_b = F_i v_parent ↦ Δ(F_i)(image of parent)`.
    /// Fails unless `v` is a highest weight vector of weight `λ`.
    pub fn from_highest_weight_image(
        source: Arc<ModuleRep>,
        target: TensorSpace,
        v: SVec,
    ) -> Result<Self> {
        if !target.is_highest_weight_vector(&v, source.highest_weight()) {
            return Err(Error::Intertwiner(format!(
                "image of ξ_{} is not a highest weight vector of that weight",
                source.highest_weight()
            )));
        }
        let mut columns: Vec<SVec> = Vec::with_capacity(source.dim());
        columns.push(v);
        for b in 1..source.dim() {
            let (i, parent) = source
                .origin(b)
                .expect("non-top basis vectors have an origin");
            let img = target.apply_f(i, &columns[parent]);
            columns.push(img);
        }
        Ok(Morphism {
            source,
            target,
            columns,
        })
    }

    pub fn source(&self) -> &Arc<ModuleRep> {
        &self.source
    }

    pub fn target(&self) -> &TensorSpace {
        &self.target
    }

    pub fn columns(&self) -> &[SVec] {
        &self.columns
    }

    pub fn image_of_top(&self) -> &SVec {
        &self.columns[0]
    }

    pub fn scale(&self, s: &Q) -> Morphism {
        Morphism {
            source: self.source.clone(),
            target: self.target.clone(),
            columns: self.columns.iter().map(|c| svec_scale(c, s)).collect(),
        }
    }

    /// `(ι ⊗ … ⊗ inner ⊗ … ⊗ ι) ∘ self`, with `inner` in slot `p`.
    pub fn then_substitute(&self, p: usize, inner: &Morphism) -> Result<Morphism> {
        let (space, first) = self.target.substitute(&self.columns[0], p, inner)?;
        let inner_k = inner.target.factors.len();
        let mut columns = vec![first];
        for c in &self.columns[1..] {
            columns.push(self.target.substitute_into(&space, c, p, inner_k, inner));
        }
        Ok(Morphism {
            source: self.source.clone(),
            target: space,
            columns,
        })
    }

    /// `f ∘ g = Δ(g) ∘ f` for every generator, checked on every basis vector.
    pub fn check_intertwiner(&self) -> Result<()> {
        let r = self.source.ty.rank();
        for b in 0..self.source.dim() {
            if !self.columns[b]
                .keys()
                .all(|&idx| &self.target.weight_of(idx) == self.source.weight(b))
            {
                return Err(Error::Intertwiner(format!(
                    "column {b} has the wrong weight"
                )));
            }
            for i in 0..r {
                for raising in [true, false] {
                    let lhs = if raising {
                        self.target.apply_e(i, &self.columns[b])
                    } else {
                        self.target.apply_f(i, &self.columns[b])
                    };
                    let col = if raising {
                        &self.source.e[i][b]
                    } else {
                        &self.source.f[i][b]
                    };
                    let mut rhs = SVec::new();
                    for (t, x) in col {
                        add_scaled(&mut rhs, &self.columns[*t], x);
                    }
                    if lhs != rhs {
                        return Err(Error::Intertwiner(format!(
                            "{}_{} fails to commute on basis vector {b}",
                            if raising { "E" } else { "F" },
                            i + 1
                        )));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn to_dense(&self) -> QMatrix {
        let mut m = QMatrix::zeros(self.target.dim(), self.source.dim());
        for (c, col) in self.columns.iter().enumerate() {
            for (r, x) in col {
                m.set(*r, c, x.clone());
            }
        }
        m
    }

    pub fn to_json(&self) -> serde_json::Value {
        let mut entries = Vec::new();
        for (c, col) in self.columns.iter().enumerate() {
            for (r, x) in col {
                entries.push(json!([r, c, format!("{}/{}", x.numer(), x.denom())]));
            }
        }
        json!({
            "type": self.source.ty.to_string(),
            "q": self.source.q.to_string(),
            "source": self.source.highest.to_string(),
            "target": self.target.factors.iter().map(|f| f.highest.to_string()).collect::<Vec<_>>(),
            "rows": self.target.dim(),
            "cols": self.source.dim(),
            "entries": entries,
        })
    }
}

fn alpha(ty: DynkinType, i: usize) -> Weight {
    Weight::new(cartan_matrix(ty).simple_root(i))
}

/// `T_{μ,η}: V_{μ+η} → V_μ ⊗ V_η`, `ξ_{μ+η} ↦ ξ_μ ⊗ ξ_η`.
pub fn morphism_t(cache: &mut ModuleCache, mu: &Weight, eta: &Weight) -> Result<Morphism> {
    let target = TensorSpace::new(vec![cache.get(mu)?, cache.get(eta)?])?;
    let source = cache.get(&(mu + eta))?;
    let v = target.top_vector();
    Morphism::from_highest_weight_image(source, target, v)
}

/// `τ_{i;μ,η}: V_{μ+η−α_i} → V_μ ⊗ V_η`,
/// `ξ ↦ [μ(i)]_{q_i} ξ_μ ⊗ F_i ξ_η − q_i^{μ(i)} [η(i)]_{q_i} F_i ξ_μ ⊗ ξ_η`.
pub fn morphism_tau(
    cache: &mut ModuleCache,
    i: usize,
    mu: &Weight,
    eta: &Weight,
) -> Result<Morphism> {
    let ty = cache.dynkin_type();
    if i >= ty.rank() {
        return Err(Error::Precondition(format!(
            "no simple root α_{} in {ty}",
            i + 1
        )));
    }
    mu.check_rank(ty.rank())?;
    eta.check_rank(ty.rank())?;
    if mu.get(i) < 1 || eta.get(i) < 1 {
        return Err(Error::Precondition(format!(
            "τ_{} needs μ({0}), η({0}) >= 1, got μ = {mu}, η = {eta}",
            i + 1
        )));
    }
    let vm = cache.get(mu)?;
    let ve = cache.get(eta)?;
    let qi = vm.qi(i);
    let target = TensorSpace::new(vec![vm.clone(), ve.clone()])?;
    let mut v = SVec::new();
    let a = q_int(mu.get(i), &qi)?;
    let b = -(q_pow(&qi, mu.get(i)) * q_int(eta.get(i), &qi)?);
    for (y, x) in ve.apply_f(i, 0) {
        add_entry(&mut v, target.encode(&[0, y]), &a * x);
    }
    for (y, x) in vm.apply_f(i, 0) {
        add_entry(&mut v, target.encode(&[y, 0]), &b * x);
    }
    let source = cache.get(&(&(mu + eta) - &alpha(ty, i)))?;
    Morphism::from_highest_weight_image(source, target, v)
}

/// How the two sides of the τ identity are compared.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TauCheckMode {
    /// Compare the full matrices of both sides.
    FullMatrix,
    /// Compare the images of `ξ`. Both sides are module maps out of an
    /// irreducible module, so they agree iff they agree on `ξ`.
    GeneratorImage,
}

/// Outcome of [`check_tau_identity`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TauCheck {
    pub holds: bool,
    /// The two morphisms on the left are linearly independent.
    pub independent: bool,
    /// Dimension of the highest weight space of weight `μ+η+ν−α_i` in `V_μ⊗V_η⊗V_ν`.
    pub multiplicity: usize,
    /// Entries compared on each side.
    pub entries_compared: usize,
}

impl TauCheck {
    pub fn passed(&self) -> bool {
        self.holds && self.independent && self.multiplicity == 2
    }
}

/// Checks
/// `[η(i)] (T_{μ,η}⊗ι) τ_{i;μ+η,ν} − [ν(i)] (τ_{i;μ,η}⊗ι) T_{μ+η−α_i,ν}
///   = [μ(i)+η(i)] (ι⊗τ_{i;η,ν}) T_{μ,η+ν−α_i}`
/// exactly, together with linear independence of the two morphisms on the
/// left and multiplicity two of the common highest weight.
pub fn check_tau_identity(
    cache: &mut ModuleCache,
    i: usize,
    mu: &Weight,
    eta: &Weight,
    nu: &Weight,
    mode: TauCheckMode,
) -> Result<TauCheck> {
    let ty = cache.dynkin_type();
    for w in [mu, eta, nu] {
        w.check_rank(ty.rank())?;
        w.check_dominant()?;
    }
    if i >= ty.rank() || mu.get(i) < 1 || eta.get(i) < 1 || nu.get(i) < 1 {
        return Err(Error::Precondition(format!(
            "identity needs μ({0}), η({0}), ν({0}) >= 1",
            i + 1
        )));
    }
    let a_i = alpha(ty, i);
    let qi = cache.get(mu)?.qi(i);
    let mu_eta = mu + eta;

    let t1 = morphism_t(cache, mu, eta)?;
    let tau1 = morphism_tau(cache, i, &mu_eta, nu)?;
    let tau2 = morphism_tau(cache, i, mu, eta)?;
    let t2 = morphism_t(cache, &(&mu_eta - &a_i), nu)?;
    let tau3 = morphism_tau(cache, i, eta, nu)?;
    let t3 = morphism_t(cache, mu, &(&(eta + nu) - &a_i))?;

    let c1 = q_int(eta.get(i), &qi)?;
    let c2 = q_int(nu.get(i), &qi)?;
    let c3 = q_int(mu.get(i) + eta.get(i), &qi)?;

    let (left1, left2, right): (Vec<SVec>, Vec<SVec>, Vec<SVec>) = match mode {
        TauCheckMode::FullMatrix => (
            tau1.then_substitute(0, &t1)?.columns,
            t2.then_substitute(0, &tau2)?.columns,
            t3.then_substitute(1, &tau3)?.columns,
        ),
        TauCheckMode::GeneratorImage => (
            vec![tau1.target.substitute(tau1.image_of_top(), 0, &t1)?.1],
            vec![t2.target.substitute(t2.image_of_top(), 0, &tau2)?.1],
            vec![t3.target.substitute(t3.image_of_top(), 1, &tau3)?.1],
        ),
    };
    let mut holds = true;
    let mut entries = 0;
    for ((l1, l2), r) in left1.iter().zip(&left2).zip(&right) {
        let lhs = svec_combine(&c1, l1, &-c2.clone(), l2);
        let rhs = svec_scale(r, &c3);
        entries += lhs.len().max(rhs.len());
        if lhs != rhs {
            holds = false;
            break;
        }
    }
    // two vectors are independent iff neither is a multiple of the other
    let independent = {
        let (u, v) = (&left1[0], &left2[0]);
        match (u.iter().next(), v.is_empty()) {
            (None, _) | (_, true) => false,
            (Some((&k, x)), false) => {
                let y = v.get(&k).cloned().unwrap_or_else(Q::zero);
                svec_scale(u, &y) != svec_scale(v, x)
            }
        }
    };
    let triple = TensorSpace::new(vec![cache.get(mu)?, cache.get(eta)?, cache.get(nu)?])?;
    let multiplicity = triple
        .highest_weight_vectors(&(&(&mu_eta + nu) - &a_i))
        .len();
    Ok(TauCheck {
        holds,
        independent,
        multiplicity,
        entries_compared: entries,
    })
}

//! Invariant 2-cocycles, truncated and stored blockwise.
//!
//! An invariant element `E` acting on `V_μ ⊗ V_η` commutes with the coproduct
//! image, so it preserves every isotypic component and acts there through a
//! matrix on the multiplicity space. A [`BlockCocycle`] stores that matrix for
//! every constituent `ν` of every pair with `|μ|+|η| ≤ H`, where `|·|` is the
//! coordinate sum. The basis of the multiplicity space is the echelon basis of
//! highest weight vectors from [`TensorSpace::highest_weight_vectors`], and
//! the block `M` means `E ∘ emb_a = Σ_{a'} M[a'][a] · emb_{a'}`.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use num_traits::Zero;
use serde_json::{json, Value};

use crate::cohomology::Cocycle2;
use crate::error::{Error, Result};
use crate::lattice::{
    cartan_matrix, dominant_weights_up_to, fundamental_group, DynkinType, Family, GroupElement,
    RootSystem, Weight,
};
use crate::linalg::{smith_normal_form, solve_mod_one, QMatrix, Q};
use crate::monoid::{check_truncation_size, truncated_pairs, MonoidCocycle, MAX_PARSED_BOUND};
use crate::scalar::Scalar;
use crate::uqg::{is_whitelisted, ModuleCache, Morphism, QParam, SVec, TensorSpace};
use crate::CircleValue;

/// `(μ, η, ν)`: the block of `E` on the `ν`-isotypic part of `V_μ ⊗ V_η`.
pub type BlockKey = (Weight, Weight, Weight);

/// Largest irreducible module whose character the block layer will expand.
pub const MAX_BLOCK_MODULE_DIM: u128 = 20_000;

fn key_string(k: &BlockKey) -> String {
    format!("({}|{}|{})", k.0, k.1, k.2)
}

fn parse_key(s: &str) -> Result<BlockKey> {
    let inner = s
        .strip_prefix('(')
        .and_then(|t| t.strip_suffix(')'))
        .ok_or_else(|| Error::Parse(format!("block key {s:?} must look like (μ|η|ν)")))?;
    let parts: Vec<&str> = inner.split('|').collect();
    if parts.len() != 3 {
        return Err(Error::Parse(format!(
            "block key {s:?} must have three weights"
        )));
    }
    Ok((parts[0].parse()?, parts[1].parse()?, parts[2].parse()?))
}

fn alpha(ty: DynkinType, i: usize) -> Weight {
    Weight::new(cartan_matrix(ty).simple_root(i))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum BlockValue {
    /// A scalar multiple of the identity, of any size.
    Scalar(Scalar),
    Matrix(QMatrix),
}

/// One block: its size (the multiplicity) and its value.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Block {
    mult: usize,
    value: BlockValue,
}

impl Block {
    pub fn scalar(mult: usize, s: Scalar) -> Self {
        Block {
            mult,
            value: BlockValue::Scalar(s),
        }
    }

    pub fn identity(mult: usize) -> Self {
        Block::scalar(mult, Scalar::one())
    }

    pub fn matrix(m: QMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::Precondition("block matrices must be square".into()));
        }
        Ok(Block {
            mult: m.rows(),
            value: BlockValue::Matrix(m),
        })
    }

    pub fn mult(&self) -> usize {
        self.mult
    }

    pub fn value(&self) -> &BlockValue {
        &self.value
    }

    /// The block as a scalar, when it is a multiple of the identity.
    pub fn as_scalar(&self) -> Option<Scalar> {
        match &self.value {
            BlockValue::Scalar(s) => Some(s.clone()),
            BlockValue::Matrix(m) => m.as_scalar().and_then(|r| Scalar::from_rational(&r).ok()),
        }
    }

    pub fn is_identity(&self) -> bool {
        self.as_scalar().is_some_and(|s| s.is_one())
    }

    pub fn is_invertible(&self) -> bool {
        match &self.value {
            BlockValue::Scalar(_) => true,
            BlockValue::Matrix(m) => m.is_invertible(),
        }
    }

    /// Dense form; needs a rational value.
    pub fn to_matrix(&self) -> Result<QMatrix> {
        match &self.value {
            BlockValue::Matrix(m) => Ok(m.clone()),
            BlockValue::Scalar(s) => s
                .as_rational()
                .map(|r| QMatrix::scalar(self.mult, &r))
                .ok_or_else(|| Error::NotRational(s.to_string())),
        }
    }

    fn check_same_size(&self, other: &Block) -> Result<()> {
        if self.mult != other.mult {
            return Err(Error::Precondition(format!(
                "block sizes {} and {} differ",
                self.mult, other.mult
            )));
        }
        Ok(())
    }

    pub fn mul(&self, other: &Block) -> Result<Block> {
        self.check_same_size(other)?;
        match (&self.value, &other.value) {
            (BlockValue::Scalar(a), BlockValue::Scalar(b)) => Ok(Block::scalar(self.mult, a * b)),
            _ => Block::matrix(self.to_matrix()?.mul(&other.to_matrix()?)),
        }
    }

    pub fn inverse(&self) -> Result<Block> {
        match &self.value {
            BlockValue::Scalar(s) => Ok(Block::scalar(self.mult, s.inv())),
            BlockValue::Matrix(m) => Block::matrix(
                m.inverse()
                    .ok_or_else(|| Error::SingularBlock(format!("{m:?}")))?,
            ),
        }
    }

    fn to_json(&self) -> Value {
        match &self.value {
            BlockValue::Scalar(s) => json!(s.to_string()),
            BlockValue::Matrix(m) => Value::Array(
                (0..m.rows())
                    .map(|i| {
                        Value::Array(
                            m.row(i)
                                .iter()
                                .map(|x| json!(format!("{}/{}", x.numer(), x.denom())))
                                .collect(),
                        )
                    })
                    .collect(),
            ),
        }
    }

    fn from_json(v: &Value, mult: usize) -> Result<Block> {
        match v {
            Value::String(s) => Ok(Block::scalar(mult, s.parse()?)),
            Value::Array(rows) => {
                if rows.len() != mult {
                    return Err(Error::Parse(format!("block matrix must have {mult} rows")));
                }
                let mut out = Vec::with_capacity(mult);
                for row in rows {
                    let row = row.as_array().filter(|r| r.len() == mult).ok_or_else(|| {
                        Error::Parse(format!("block matrix rows must have {mult} entries"))
                    })?;
                    let mut parsed = Vec::with_capacity(mult);
                    for x in row {
                        let s = x
                            .as_str()
                            .ok_or_else(|| Error::Parse("matrix entries must be strings".into()))?;
                        parsed.push(crate::scalar::parse_rational(s)?);
                    }
                    out.push(parsed);
                }
                Block::matrix(QMatrix::from_rows(out))
            }
            _ => Err(Error::Parse(
                "block value must be a string or a matrix".into(),
            )),
        }
    }
}

/// The constituents of every pair in the truncation, from Klimyk's formula.
fn truncation_shape(
    ty: DynkinType,
    bound: i64,
) -> Result<Vec<((Weight, Weight), Vec<(Weight, u64)>)>> {
    check_truncation_size(ty.rank(), bound)?;
    let rs = RootSystem::new(ty);
    for w in dominant_weights_up_to(ty.rank(), bound) {
        if rs.weyl_dim(&w)? > MAX_BLOCK_MODULE_DIM {
            return Err(Error::TooLarge(format!(
                "V_{w} of {ty} is too large for block computations"
            )));
        }
    }
    truncated_pairs(ty.rank(), bound)
        .into_iter()
        .map(|(m, e)| {
            let parts = rs.klimyk_decompose(&m, &e)?;
            Ok(((m, e), parts))
        })
        .collect()
}

/// A truncated invariant element in block form.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCocycle {
    ty: DynkinType,
    bound: i64,
    blocks: BTreeMap<BlockKey, Block>,
}

impl BlockCocycle {
    /// Checks that blocks exist exactly for the Klimyk constituents of the
    /// pairs with `|μ|+|η| ≤ H`, with matching sizes, and are invertible.
    /// The cocycle identity is a separate check, [`verify_cocycle_identity`].
    pub fn new(ty: DynkinType, bound: i64, blocks: BTreeMap<BlockKey, Block>) -> Result<Self> {
        let shape = truncation_shape(ty, bound)?;
        let mut expected = 0;
        for ((m, e), parts) in &shape {
            for (nu, mult) in parts {
                expected += 1;
                let key = (m.clone(), e.clone(), nu.clone());
                let b = blocks
                    .get(&key)
                    .ok_or_else(|| Error::BlockAbsent(key_string(&key)))?;
                if b.mult as u64 != *mult {
                    return Err(Error::Precondition(format!(
                        "block {} has size {}, multiplicity is {mult}",
                        key_string(&key),
                        b.mult
                    )));
                }
                if !b.is_invertible() {
                    return Err(Error::SingularBlock(key_string(&key)));
                }
            }
        }
        if blocks.len() != expected {
            let extra = blocks
                .keys()
                .find(|(m, e, nu)| {
                    !shape.iter().any(|((m2, e2), parts)| {
                        m == m2 && e == e2 && parts.iter().any(|(n2, _)| n2 == nu)
                    })
                })
                .map(key_string)
                .unwrap_or_default();
            return Err(Error::Precondition(format!(
                "block {extra} is not a constituent in the truncation"
            )));
        }
        Ok(BlockCocycle { ty, bound, blocks })
    }

    /// Builds every block from `f(μ, η, ν, multiplicity)`.
    pub fn from_fn(
        ty: DynkinType,
        bound: i64,
        mut f: impl FnMut(&Weight, &Weight, &Weight, usize) -> Result<Block>,
    ) -> Result<Self> {
        let mut blocks = BTreeMap::new();
        for ((m, e), parts) in truncation_shape(ty, bound)? {
            for (nu, mult) in parts {
                let b = f(&m, &e, &nu, mult as usize)?;
                blocks.insert((m.clone(), e.clone(), nu), b);
            }
        }
        BlockCocycle::new(ty, bound, blocks)
    }

    pub fn identity(ty: DynkinType, bound: i64) -> Result<Self> {
        BlockCocycle::from_fn(ty, bound, |_, _, _, m| Ok(Block::identity(m)))
    }

    pub fn dynkin_type(&self) -> DynkinType {
        self.ty
    }

    pub fn bound(&self) -> i64 {
        self.bound
    }

    pub fn blocks(&self) -> &BTreeMap<BlockKey, Block> {
        &self.blocks
    }

    pub fn block(&self, mu: &Weight, eta: &Weight, nu: &Weight) -> Result<&Block> {
        let key = (mu.clone(), eta.clone(), nu.clone());
        self.blocks
            .get(&key)
            .ok_or_else(|| Error::BlockAbsent(key_string(&key)))
    }

    /// A copy with one existing block replaced.
    pub fn with_block(&self, mu: &Weight, eta: &Weight, nu: &Weight, b: Block) -> Result<Self> {
        let key = (mu.clone(), eta.clone(), nu.clone());
        let old = self
            .blocks
            .get(&key)
            .ok_or_else(|| Error::BlockAbsent(key_string(&key)))?;
        old.check_same_size(&b)?;
        if !b.is_invertible() {
            return Err(Error::SingularBlock(key_string(&key)));
        }
        let mut blocks = self.blocks.clone();
        blocks.insert(key, b);
        Ok(BlockCocycle {
            ty: self.ty,
            bound: self.bound,
            blocks,
        })
    }

    fn check_compatible(&self, other: &BlockCocycle) -> Result<()> {
        if self.ty != other.ty || self.bound != other.bound {
            return Err(Error::Precondition(
                "block cocycles live on different truncations".into(),
            ));
        }
        Ok(())
    }

    /// Blockwise product `self · other`.
    pub fn mul(&self, other: &BlockCocycle) -> Result<BlockCocycle> {
        self.check_compatible(other)?;
        let blocks = self
            .blocks
            .iter()
            .map(|(k, b)| Ok((k.clone(), b.mul(&other.blocks[k])?)))
            .collect::<Result<_>>()?;
        Ok(BlockCocycle {
            ty: self.ty,
            bound: self.bound,
            blocks,
        })
    }

    pub fn inverse(&self) -> Result<BlockCocycle> {
        let blocks = self
            .blocks
            .iter()
            .map(|(k, b)| Ok((k.clone(), b.inverse()?)))
            .collect::<Result<_>>()?;
        Ok(BlockCocycle {
            ty: self.ty,
            bound: self.bound,
            blocks,
        })
    }

    pub fn is_identity(&self) -> bool {
        self.blocks.values().all(Block::is_identity)
    }

    /// The first block that is not the identity.
    pub fn first_nontrivial(&self) -> Option<(&BlockKey, &Block)> {
        self.blocks.iter().find(|(_, b)| !b.is_identity())
    }

    /// Every weight the blocks refer to: the pair weights and all constituents.
    pub fn weights(&self) -> BTreeSet<Weight> {
        self.blocks
            .keys()
            .flat_map(|(m, e, n)| [m.clone(), e.clone(), n.clone()])
            .collect()
    }

    pub fn to_json(&self) -> Value {
        let blocks: serde_json::Map<String, Value> = self
            .blocks
            .iter()
            .map(|(k, b)| (key_string(k), b.to_json()))
            .collect();
        json!({
            "type": self.ty.to_string(),
            "bound": self.bound,
            "blocks": blocks,
        })
    }

    /// Parses the JSON form and validates it against the truncation.
    pub fn from_json_str(s: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(s)?;
        let ty: DynkinType = v
            .get("type")
            .and_then(Value::as_str)
            .ok_or_else(|| Error::Parse("missing \"type\"".into()))?
            .parse()?;
        let bound = v
            .get("bound")
            .and_then(Value::as_i64)
            .ok_or_else(|| Error::Parse("missing integer \"bound\"".into()))?;
        if !(0..=MAX_PARSED_BOUND).contains(&bound) {
            return Err(Error::Parse(format!(
                "bound must lie in 0..={MAX_PARSED_BOUND}"
            )));
        }
        let entries = v
            .get("blocks")
            .and_then(Value::as_object)
            .ok_or_else(|| Error::Parse("missing object \"blocks\"".into()))?;
        let shape = truncation_shape(ty, bound)?;
        let mults: HashMap<BlockKey, usize> = shape
            .into_iter()
            .flat_map(|((m, e), parts)| {
                parts
                    .into_iter()
                    .map(move |(nu, k)| ((m.clone(), e.clone(), nu), k as usize))
            })
            .collect();
        let mut blocks = BTreeMap::new();
        for (ks, val) in entries {
            let key = parse_key(ks)?;
            let mult = *mults.get(&key).ok_or_else(|| {
                Error::Precondition(format!("block {ks} is not a constituent in the truncation"))
            })?;
            blocks.insert(key, Block::from_json(val, mult)?);
        }
        BlockCocycle::new(ty, bound, blocks)
    }
}

/// A central element: one nonzero scalar per dominant weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CentralElement {
    values: BTreeMap<Weight, Scalar>,
}

impl CentralElement {
    pub fn new(values: BTreeMap<Weight, Scalar>) -> Self {
        CentralElement { values }
    }

    /// Evaluates `f` on every weight appearing in the blocks of the truncation.
    pub fn for_truncation(
        ty: DynkinType,
        bound: i64,
        f: impl Fn(&Weight) -> Scalar,
    ) -> Result<Self> {
        let mut values = BTreeMap::new();
        for ((m, e), parts) in truncation_shape(ty, bound)? {
            for w in std::iter::once(m)
                .chain(std::iter::once(e))
                .chain(parts.into_iter().map(|p| p.0))
            {
                if let std::collections::btree_map::Entry::Vacant(slot) = values.entry(w) {
                    let v = f(slot.key());
                    slot.insert(v);
                }
            }
        }
        Ok(CentralElement { values })
    }

    /// The character `μ ↦ Π_j t_j^{μ(j)}`.
    pub fn character(ty: DynkinType, bound: i64, t: &[Scalar]) -> Result<Self> {
        if t.len() != ty.rank() {
            return Err(Error::Precondition(format!(
                "a character of {ty} needs {} values",
                ty.rank()
            )));
        }
        CentralElement::for_truncation(ty, bound, |w| {
            t.iter().zip(w.coords()).map(|(s, &k)| s.pow(k)).product()
        })
    }

    pub fn values(&self) -> &BTreeMap<Weight, Scalar> {
        &self.values
    }

    pub fn get(&self, w: &Weight) -> Result<&Scalar> {
        self.values.get(w).ok_or_else(|| {
            Error::TruncationNotClosed(format!("central element is undefined at {w}"))
        })
    }

    pub fn mul(&self, other: &CentralElement) -> Result<CentralElement> {
        self.values
            .iter()
            .map(|(w, v)| Ok((w.clone(), v * other.get(w)?)))
            .collect::<Result<_>>()
            .map(CentralElement::new)
    }
}

/// Outcome of [`is_group_like`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum GroupLike {
    /// `a(μ)a(η) = a(ν)` on every block, and `a` is the pullback of this
    /// character of `P/Q` (listed on the classes met by the truncation).
    Character {
        values: BTreeMap<GroupElement, Scalar>,
    },
    /// The block `(μ, η, ν)` breaks multiplicativity.
    NotMultiplicative { mu: Weight, eta: Weight, nu: Weight },
    /// Multiplicative on blocks, but two weights of one class disagree.
    NotFactoring { first: Weight, second: Weight },
}

impl GroupLike {
    pub fn holds(&self) -> bool {
        matches!(self, GroupLike::Character { .. })
    }
}

/// Whether `(a⊗a)Δ(a)⁻¹ = 1` on the truncation, i.e. `a(μ)a(η) = a(ν)` for
/// every block.
pub fn is_group_like(ty: DynkinType, bound: i64, a: &CentralElement) -> Result<GroupLike> {
    let mut seen = BTreeSet::new();
    for ((m, e), parts) in truncation_shape(ty, bound)? {
        for (nu, _) in parts {
            if &(a.get(&m)? * a.get(&e)?) != a.get(&nu)? {
                return Ok(GroupLike::NotMultiplicative { mu: m, eta: e, nu });
            }
            seen.insert(nu);
        }
        seen.insert(m);
        seen.insert(e);
    }
    let proj = fundamental_group(ty);
    let mut values: BTreeMap<GroupElement, (Weight, Scalar)> = BTreeMap::new();
    for w in seen {
        let x = proj.project(&w);
        let v = a.get(&w)?.clone();
        match values.get(&x) {
            Some((w0, v0)) if *v0 != v => {
                return Ok(GroupLike::NotFactoring {
                    first: w0.clone(),
                    second: w,
                })
            }
            Some(_) => {}
            None => {
                values.insert(x, (w, v));
            }
        }
    }
    Ok(GroupLike::Character {
        values: values.into_iter().map(|(x, (_, v))| (x, v)).collect(),
    })
}

/// `E_c`: the block `(μ, η, ν)` is `c(proj μ, proj η)` for every `ν`.
pub fn make_ec(ty: DynkinType, c: &Cocycle2, bound: i64) -> Result<BlockCocycle> {
    let proj = fundamental_group(ty);
    if c.group() != proj.group() {
        return Err(Error::InvalidGroup(format!(
            "cocycle lives on {}, but P/Q of {ty} is {}",
            c.group(),
            proj.group()
        )));
    }
    BlockCocycle::from_fn(ty, bound, |m, e, _, k| {
        Ok(Block::scalar(
            k,
            Scalar::from_phase(c.value(&proj.project(m), &proj.project(e))),
        ))
    })
}

/// `(a⊗a)Δ(a)⁻¹`: the block `(μ, η, ν)` is `a(μ)·a(η)·a(ν)⁻¹`.
pub fn coboundary_block(ty: DynkinType, bound: i64, a: &CentralElement) -> Result<BlockCocycle> {
    BlockCocycle::from_fn(ty, bound, |m, e, nu, k| {
        Ok(Block::scalar(k, &(a.get(m)? * a.get(e)?) / a.get(nu)?))
    })
}

fn top_scalar(e: &BlockCocycle, mu: &Weight, eta: &Weight, nu: &Weight) -> Result<Scalar> {
    let b = e.block(mu, eta, nu)?;
    if b.mult != 1 {
        return Err(Error::Precondition(format!(
            "block ({mu}|{eta}|{nu}) has size {}, expected 1",
            b.mult
        )));
    }
    b.as_scalar()
        .ok_or_else(|| Error::SingularBlock(format!("({mu}|{eta}|{nu})")))
}

/// `c_E(μ, η)`: the scalar on the `μ+η` component.
pub fn ce_value(e: &BlockCocycle, mu: &Weight, eta: &Weight) -> Result<Scalar> {
    top_scalar(e, mu, eta, &(mu + eta))
}

/// `c_i(μ, η)`: the scalar on the `μ+η−α_i` component.
pub fn ci_value(e: &BlockCocycle, i: usize, mu: &Weight, eta: &Weight) -> Result<Scalar> {
    if i >= e.ty.rank() || mu.get(i) < 1 || eta.get(i) < 1 {
        return Err(Error::Precondition(format!(
            "c_{} needs μ({0}), η({0}) >= 1, got μ = {mu}, η = {eta}",
            i + 1
        )));
    }
    top_scalar(e, mu, eta, &(&(mu + eta) - &alpha(e.ty, i)))
}

/// `c_E` as a monoid cocycle on the same truncation.
pub fn extract_ce(e: &BlockCocycle) -> Result<MonoidCocycle> {
    let mut values = BTreeMap::new();
    for (m, eta) in truncated_pairs(e.ty.rank(), e.bound) {
        let v = ce_value(e, &m, &eta)?;
        values.insert((m, eta), v);
    }
    MonoidCocycle::new(e.ty, e.bound, values)
}

/// `c_i` on every pair of the truncation with `μ(i), η(i) ≥ 1`.
pub fn extract_ci(e: &BlockCocycle, i: usize) -> Result<BTreeMap<(Weight, Weight), Scalar>> {
    if i >= e.ty.rank() {
        return Err(Error::Precondition(format!(
            "no simple root α_{} in {}",
            i + 1,
            e.ty
        )));
    }
    let mut out = BTreeMap::new();
    for (m, eta) in truncated_pairs(e.ty.rank(), e.bound) {
        if m.get(i) >= 1 && eta.get(i) >= 1 {
            let v = ci_value(e, i, &m, &eta)?;
            out.insert((m, eta), v);
        }
    }
    Ok(out)
}

/// The three scalars compared by [`eigenvalue_identity_check`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EigenvalueCheck {
    /// `c_E(μ,η)·c_i(μ+η,ν)`, `c_i(μ,η)·c_E(μ+η−α_i,ν)`, `c_i(η,ν)·c_E(μ,η+ν−α_i)`.
    pub values: [Scalar; 3],
}

impl EigenvalueCheck {
    pub fn holds(&self) -> bool {
        self.values[0] == self.values[1] && self.values[1] == self.values[2]
    }
}

/// Compares the three scalars by which `E` acts on the images of the three
/// morphisms in the τ identity.
pub fn eigenvalue_identity_check(
    e: &BlockCocycle,
    i: usize,
    mu: &Weight,
    eta: &Weight,
    nu: &Weight,
) -> Result<EigenvalueCheck> {
    if i >= e.ty.rank() || mu.get(i) < 1 || eta.get(i) < 1 || nu.get(i) < 1 {
        return Err(Error::Precondition(format!(
            "eigenvalue identity needs μ({0}), η({0}), ν({0}) >= 1",
            i + 1
        )));
    }
    let a = alpha(e.ty, i);
    let me = mu + eta;
    let values = [
        &ce_value(e, mu, eta)? * &ci_value(e, i, &me, nu)?,
        &ci_value(e, i, mu, eta)? * &ce_value(e, &(&me - &a), nu)?,
        &ci_value(e, i, eta, nu)? * &ce_value(e, mu, &(&(eta + nu) - &a))?,
    ];
    Ok(EigenvalueCheck { values })
}

/// How [`verify_cocycle_identity`] compares the two sides.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerifyMethod {
    /// `Operator` for types with explicit modules, `Reduction` otherwise.
    Auto,
    /// Both sides as operators on the highest weight vectors of every
    /// `V_μ ⊗ V_η ⊗ V_ν`.
    Operator,
    /// For scalar blocks that are constant in `ν` and depend only on the
    /// classes of `μ, η` in `P/Q`: the cocycle identity of the induced table
    /// on `P/Q`, over the classes of the triples in the truncation.
    Reduction,
}

/// A violated instance of the cocycle identity.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub mu: Weight,
    pub eta: Weight,
    pub nu: Weight,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CocycleCheck {
    pub method: VerifyMethod,
    pub triples_checked: usize,
    pub violation: Option<Violation>,
}

impl CocycleCheck {
    pub fn holds(&self) -> bool {
        self.violation.is_none()
    }
}

/// One column group of a basis of highest weight vectors of weight `λ` in
/// `V_μ ⊗ V_η ⊗ V_ν`: the vectors `(emb_{κ,a} ⊗ ι) h_{λ,b}` for fixed `κ`
/// (left bracketing) or `(ι ⊗ emb_{κ,a}) h_{λ,b}` (right bracketing).
#[derive(Debug, Clone)]
struct FrameGroup {
    kappa: Weight,
    outer: usize,
    inner: usize,
}

/// Both bracketings of the highest weight space of weight `λ`, and the
/// change of basis `U = W X` between them.
#[derive(Debug, Clone)]
struct Frame {
    lambda: Weight,
    left: Vec<FrameGroup>,
    right: Vec<FrameGroup>,
    x: QMatrix,
}

fn embeddings(
    cache: &mut ModuleCache,
    space: &TensorSpace,
    kappa: &Weight,
    mult: u64,
) -> Result<Vec<Morphism>> {
    let hw = space.highest_weight_vectors(kappa);
    if hw.len() as u64 != mult {
        return Err(Error::Intertwiner(format!(
            "found {} highest weight vectors of weight {kappa}, Klimyk gives {mult}",
            hw.len()
        )));
    }
    let source = cache.get(kappa)?;
    hw.into_iter()
        .map(|v| Morphism::from_highest_weight_image(source.clone(), space.clone(), v))
        .collect()
}

fn to_dense(v: &SVec, rows: &[usize], pos: &HashMap<usize, usize>) -> Result<Vec<Q>> {
    let mut out = vec![Q::zero(); rows.len()];
    for (k, x) in v {
        let r = pos
            .get(k)
            .ok_or_else(|| Error::Intertwiner("vector leaves its weight space".into()))?;
        out[*r] = x.clone();
    }
    Ok(out)
}

/// Frames of a triple, one per `λ` in `V_μ ⊗ V_η ⊗ V_ν`.
fn triple_frames(
    cache: &mut ModuleCache,
    mu: &Weight,
    eta: &Weight,
    nu: &Weight,
) -> Result<Vec<Frame>> {
    let ty = cache.dynkin_type();
    let rs = RootSystem::new(ty);
    let (vm, ve, vn) = (cache.get(mu)?, cache.get(eta)?, cache.get(nu)?);
    let triple = TensorSpace::new(vec![vm.clone(), ve.clone(), vn.clone()])?;

    type Side = BTreeMap<Weight, (Vec<FrameGroup>, Vec<SVec>)>;
    let mut collect = |first: bool| -> Result<Side> {
        let (a, b) = if first { (&vm, &ve) } else { (&ve, &vn) };
        let pair = TensorSpace::new(vec![a.clone(), b.clone()])?;
        let mut side: Side = BTreeMap::new();
        for (kappa, mult) in rs.klimyk_decompose(a.highest_weight(), b.highest_weight())? {
            let embs = embeddings(cache, &pair, &kappa, mult)?;
            let vk = cache.get(&kappa)?;
            let (outer_space, other) = if first {
                (TensorSpace::new(vec![vk.clone(), vn.clone()])?, nu)
            } else {
                (TensorSpace::new(vec![vm.clone(), vk.clone()])?, mu)
            };
            let parts = if first {
                rs.klimyk_decompose(&kappa, other)?
            } else {
                rs.klimyk_decompose(other, &kappa)?
            };
            for (lambda, m2) in parts {
                let hs = outer_space.highest_weight_vectors(&lambda);
                if hs.len() as u64 != m2 {
                    return Err(Error::Intertwiner(format!(
                        "multiplicity of {lambda} disagrees with Klimyk"
                    )));
                }
                let slot = if first { 0 } else { 1 };
                let entry = side.entry(lambda).or_default();
                entry.0.push(FrameGroup {
                    kappa: kappa.clone(),
                    outer: embs.len(),
                    inner: hs.len(),
                });
                for emb in &embs {
                    for h in &hs {
                        let (_, v) = outer_space.substitute(h, slot, emb)?;
                        entry.1.push(v);
                    }
                }
            }
        }
        Ok(side)
    };
    let left = collect(true)?;
    let right = collect(false)?;
    let mut frames = Vec::new();
    for (lambda, (lgroups, us)) in left {
        let (rgroups, ws) = right.get(&lambda).cloned().ok_or_else(|| {
            Error::Intertwiner(format!("{lambda} appears in one bracketing only"))
        })?;
        if us.len() != ws.len() {
            return Err(Error::Intertwiner(format!(
                "bracketings disagree on the multiplicity of {lambda}"
            )));
        }
        let rows = triple.weight_space(&lambda);
        let pos: HashMap<usize, usize> = rows.iter().enumerate().map(|(n, &k)| (k, n)).collect();
        let u_cols = us
            .iter()
            .map(|v| to_dense(v, &rows, &pos))
            .collect::<Result<Vec<_>>>()?;
        let w_cols = ws
            .iter()
            .map(|v| to_dense(v, &rows, &pos))
            .collect::<Result<Vec<_>>>()?;
        let u = QMatrix::from_columns(rows.len(), &u_cols);
        let w = QMatrix::from_columns(rows.len(), &w_cols);
        let x = w.solve(&u).ok_or_else(|| {
            Error::Intertwiner(format!("bracketings span different spaces at {lambda}"))
        })?;
        if !x.is_invertible() {
            return Err(Error::Intertwiner(format!(
                "left bracketing is degenerate at {lambda}"
            )));
        }
        frames.push(Frame {
            lambda,
            left: lgroups,
            right: rgroups,
            x,
        });
    }
    Ok(frames)
}

/// `⊕_κ M_κ ⊗ N_κ` for one bracketing, as a list of diagonal scalars when
/// every block involved is scalar.
enum SideOperator {
    Diagonal(Vec<Scalar>),
    Dense(QMatrix),
}

fn side_operator(
    groups: &[FrameGroup],
    outer_block: impl Fn(&Weight) -> Result<Block>,
    inner_block: impl Fn(&Weight) -> Result<Block>,
) -> Result<SideOperator> {
    let mut pairs = Vec::with_capacity(groups.len());
    for g in groups {
        pairs.push((g, outer_block(&g.kappa)?, inner_block(&g.kappa)?));
    }
    let all_scalar = pairs.iter().all(|(_, o, i)| {
        matches!(o.value, BlockValue::Scalar(_)) && matches!(i.value, BlockValue::Scalar(_))
    });
    if all_scalar {
        let mut diag = Vec::new();
        for (g, o, i) in &pairs {
            let s = &o.as_scalar().expect("scalar") * &i.as_scalar().expect("scalar");
            diag.extend(std::iter::repeat_n(s, g.outer * g.inner));
        }
        return Ok(SideOperator::Diagonal(diag));
    }
    let n: usize = groups.iter().map(|g| g.outer * g.inner).sum();
    let mut out = QMatrix::zeros(n, n);
    let mut off = 0;
    for (g, o, i) in &pairs {
        let k = o.to_matrix()?.kron(&i.to_matrix()?);
        let size = g.outer * g.inner;
        for r in 0..size {
            for c in 0..size {
                out.set(off + r, off + c, k.get(r, c).clone());
            }
        }
        off += size;
    }
    Ok(SideOperator::Dense(out))
}

fn diagonal_to_dense(d: &[Scalar]) -> Result<QMatrix> {
    let mut m = QMatrix::zeros(d.len(), d.len());
    for (n, s) in d.iter().enumerate() {
        m.set(
            n,
            n,
            s.as_rational()
                .ok_or_else(|| Error::NotRational(s.to_string()))?,
        );
    }
    Ok(m)
}

/// Compares `X L` with `R X`. Returns a description of the mismatch.
fn compare_sides(x: &QMatrix, l: SideOperator, r: SideOperator) -> Result<Option<String>> {
    match (l, r) {
        (SideOperator::Diagonal(l), SideOperator::Diagonal(r)) => {
            for i in 0..x.rows() {
                for j in 0..x.cols() {
                    if !x.get(i, j).is_zero() && l[j] != r[i] {
                        return Ok(Some(format!(
                            "left eigenvalue {} meets right eigenvalue {} on a common vector",
                            l[j], r[i]
                        )));
                    }
                }
            }
            Ok(None)
        }
        (l, r) => {
            let dense = |s: SideOperator| match s {
                SideOperator::Diagonal(d) => diagonal_to_dense(&d),
                SideOperator::Dense(m) => Ok(m),
            };
            let (l, r) = (dense(l)?, dense(r)?);
            if x.mul(&l) != r.mul(x) {
                return Ok(Some("the two sides differ as operators".into()));
            }
            Ok(None)
        }
    }
}

fn check_triple_operator(
    e: &BlockCocycle,
    cache: &mut ModuleCache,
    mu: &Weight,
    eta: &Weight,
    nu: &Weight,
) -> Result<Option<String>> {
    let not_closed = |err: Error| match err {
        Error::BlockAbsent(k) => {
            Error::TruncationNotClosed(format!("block {k} is needed but absent"))
        }
        other => other,
    };
    for f in triple_frames(cache, mu, eta, nu)? {
        let lam = &f.lambda;
        let l = side_operator(
            &f.left,
            |k| e.block(mu, eta, k).cloned(),
            |k| e.block(k, nu, lam).cloned(),
        )
        .map_err(not_closed)?;
        let r = side_operator(
            &f.right,
            |k| e.block(eta, nu, k).cloned(),
            |k| e.block(mu, k, lam).cloned(),
        )
        .map_err(not_closed)?;
        if let Some(msg) = compare_sides(&f.x, l, r)? {
            return Ok(Some(format!("component {lam}: {msg}")));
        }
    }
    Ok(None)
}

fn truncated_triples(rank: usize, bound: i64) -> Vec<(Weight, Weight, Weight)> {
    let ws = dominant_weights_up_to(rank, bound);
    let mut out = Vec::new();
    for m in &ws {
        for e in &ws {
            for n in &ws {
                if m.coord_sum() + e.coord_sum() + n.coord_sum() <= bound {
                    out.push((m.clone(), e.clone(), n.clone()));
                }
            }
        }
    }
    out
}

/// Checks `(E⊗1)(Δ⊗ι)(E) = (1⊗E)(ι⊗Δ)(E)` on every triple with
/// `|μ|+|η|+|ν| ≤ H`. Both sides are module endomorphisms of
/// `V_μ ⊗ V_η ⊗ V_ν`, so it suffices to compare them on highest weight
/// vectors.
pub fn verify_cocycle_identity(
    e: &BlockCocycle,
    method: VerifyMethod,
    q: &QParam,
) -> Result<CocycleCheck> {
    let method = match method {
        VerifyMethod::Auto if is_whitelisted(e.ty) => VerifyMethod::Operator,
        VerifyMethod::Auto => VerifyMethod::Reduction,
        m => m,
    };
    match method {
        VerifyMethod::Operator => {
            let mut cache = ModuleCache::new(e.ty, q.clone());
            let triples = truncated_triples(e.ty.rank(), e.bound);
            let mut checked = 0;
            for (m, eta, nu) in triples {
                checked += 1;
                if let Some(detail) = check_triple_operator(e, &mut cache, &m, &eta, &nu)? {
                    return Ok(CocycleCheck {
                        method,
                        triples_checked: checked,
                        violation: Some(Violation {
                            mu: m,
                            eta,
                            nu,
                            detail,
                        }),
                    });
                }
            }
            Ok(CocycleCheck {
                method,
                triples_checked: checked,
                violation: None,
            })
        }
        _ => verify_by_reduction(e),
    }
}

/// The table on `P/Q` induced by a block cocycle that is scalar, constant in
/// `ν`, and a function of the classes of `μ` and `η`.
pub fn induced_group_table(
    e: &BlockCocycle,
) -> Result<BTreeMap<(GroupElement, GroupElement), Scalar>> {
    let proj = fundamental_group(e.ty);
    let mut table: BTreeMap<(GroupElement, GroupElement), (Weight, Weight, Scalar)> =
        BTreeMap::new();
    for ((m, eta, nu), b) in &e.blocks {
        let s = b.as_scalar().ok_or_else(|| {
            Error::Precondition(format!(
                "block ({m}|{eta}|{nu}) is not scalar; use the operator method"
            ))
        })?;
        let key = (proj.project(m), proj.project(eta));
        match table.get(&key) {
            Some((m0, e0, s0)) if *s0 != s => {
                return Err(Error::Precondition(format!(
                    "blocks at ({m0}|{e0}) and ({m}|{eta}|{nu}) share classes but differ; use the operator method"
                )))
            }
            Some(_) => {}
            None => {
                table.insert(key, (m.clone(), eta.clone(), s));
            }
        }
    }
    Ok(table.into_iter().map(|(k, (_, _, s))| (k, s)).collect())
}

fn verify_by_reduction(e: &BlockCocycle) -> Result<CocycleCheck> {
    let table = induced_group_table(e)?;
    let proj = fundamental_group(e.ty);
    let g = proj.group();
    let get = |x: &GroupElement, y: &GroupElement| {
        table.get(&(x.clone(), y.clone())).ok_or_else(|| {
            Error::TruncationNotClosed(format!(
                "no pair of weights in the truncation has classes ({x:?}, {y:?})"
            ))
        })
    };
    let mut checked = 0;
    for (m, eta, nu) in truncated_triples(e.ty.rank(), e.bound) {
        checked += 1;
        let (x, y, z) = (proj.project(&m), proj.project(&eta), proj.project(&nu));
        let lhs = get(&x, &y)? * get(&g.add(&x, &y), &z)?;
        let rhs = get(&y, &z)? * get(&x, &g.add(&y, &z))?;
        if lhs != rhs {
            return Ok(CocycleCheck {
                method: VerifyMethod::Reduction,
                triples_checked: checked,
                violation: Some(Violation {
                    mu: m,
                    eta,
                    nu,
                    detail: format!("class table gives {lhs} on the left and {rhs} on the right"),
                }),
            });
        }
    }
    Ok(CocycleCheck {
        method: VerifyMethod::Reduction,
        triples_checked: checked,
        violation: None,
    })
}

/// Embedding data of `V_μ ⊗ V_η`: for each constituent `κ`, the morphisms of
/// its echelon highest weight basis.
fn pair_embeddings(
    cache: &mut ModuleCache,
    mu: &Weight,
    eta: &Weight,
) -> Result<(TensorSpace, Vec<(Weight, Vec<Morphism>)>)> {
    let space = TensorSpace::new(vec![cache.get(mu)?, cache.get(eta)?])?;
    let rs = RootSystem::new(cache.dynkin_type());
    let mut out = Vec::new();
    for (kappa, mult) in rs.klimyk_decompose(mu, eta)? {
        let embs = embeddings(cache, &space, &kappa, mult)?;
        out.push((kappa, embs));
    }
    Ok((space, out))
}

fn svec_dense(v: &SVec, dim: usize) -> Vec<Q> {
    let mut out = vec![Q::zero(); dim];
    for (k, x) in v {
        out[*k] = x.clone();
    }
    out
}

/// `E` on `V_μ ⊗ V_η` as an explicit matrix: `P (⊕ M_κ ⊗ 1) P⁻¹`, where the
/// columns of `P` are the embedded bases of the isotypic components.
pub fn raw_operator(
    e: &BlockCocycle,
    cache: &mut ModuleCache,
    mu: &Weight,
    eta: &Weight,
) -> Result<QMatrix> {
    let (space, parts) = pair_embeddings(cache, mu, eta)?;
    let dim = space.dim();
    let mut cols = Vec::with_capacity(dim);
    let mut diag = QMatrix::zeros(dim, dim);
    let mut off = 0;
    for (kappa, embs) in &parts {
        let m = e.block(mu, eta, kappa)?.to_matrix()?;
        let d = embs.first().map_or(0, |f| f.source().dim());
        for emb in embs {
            for c in emb.columns() {
                cols.push(svec_dense(c, dim));
            }
        }
        for a2 in 0..embs.len() {
            for a in 0..embs.len() {
                for b in 0..d {
                    diag.set(off + a2 * d + b, off + a * d + b, m.get(a2, a).clone());
                }
            }
        }
        off += embs.len() * d;
    }
    if off != dim {
        return Err(Error::Intertwiner(format!(
            "isotypic components of {mu} ⊗ {eta} do not fill the space"
        )));
    }
    let p = QMatrix::from_columns(dim, &cols);
    let p_inv = p.inverse().ok_or_else(|| {
        Error::Intertwiner(format!("embedded bases of {mu} ⊗ {eta} are dependent"))
    })?;
    Ok(p.mul(&diag).mul(&p_inv))
}

/// Outcome of [`verify_invariance`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Invariance {
    /// Every operator commutes with the coproduct image; its blocks follow.
    Invariant { blocks: BTreeMap<BlockKey, Block> },
    /// The operator on `V_μ ⊗ V_η` fails to commute with `generator`.
    NotInvariant {
        mu: Weight,
        eta: Weight,
        generator: String,
    },
}

impl Invariance {
    pub fn holds(&self) -> bool {
        matches!(self, Invariance::Invariant { .. })
    }
}

/// Checks that each operator commutes with `Δ(E_i)`, `Δ(F_i)` and `Δ(K_i)`,
/// and if so reads off its blocks along the highest weight vectors.
pub fn verify_invariance(
    cache: &mut ModuleCache,
    ops: &BTreeMap<(Weight, Weight), QMatrix>,
) -> Result<Invariance> {
    let r = cache.dynkin_type().rank();
    let mut blocks = BTreeMap::new();
    for ((mu, eta), op) in ops {
        let (space, parts) = pair_embeddings(cache, mu, eta)?;
        if op.rows() != space.dim() || op.cols() != space.dim() {
            return Err(Error::Precondition(format!(
                "operator on {mu} ⊗ {eta} must be {0}×{0}",
                space.dim()
            )));
        }
        for i in 0..r {
            for (name, g) in [
                ("E", space.e_matrix(i)),
                ("F", space.f_matrix(i)),
                ("K", space.k_matrix(i, 1)),
            ] {
                if op.mul(&g) != g.mul(op) {
                    return Ok(Invariance::NotInvariant {
                        mu: mu.clone(),
                        eta: eta.clone(),
                        generator: format!("Δ({name}_{})", i + 1),
                    });
                }
            }
        }
        for (kappa, embs) in parts {
            let hs: Vec<Vec<Q>> = embs
                .iter()
                .map(|f| svec_dense(f.image_of_top(), space.dim()))
                .collect();
            let h = QMatrix::from_columns(space.dim(), &hs);
            let m = h.solve(&op.mul(&h)).ok_or_else(|| {
                Error::Intertwiner(format!("operator leaves the {kappa} component"))
            })?;
            let block = if m.rows() == 1 {
                Block::scalar(1, Scalar::from_rational(m.get(0, 0))?)
            } else {
                Block::matrix(m)?
            };
            blocks.insert((mu.clone(), eta.clone(), kappa), block);
        }
    }
    Ok(Invariance::Invariant { blocks })
}

/// Result of [`normalize_cocycle`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Normalized {
    pub cocycle: BlockCocycle,
    /// The central element `a` with `E' = ((a⊗a)Δ(a)⁻¹)⁻¹ E`.
    pub witness: CentralElement,
    /// Whether a character of `P` had to be folded into the monoid witness.
    pub character_adjusted: bool,
}

/// Divides `E` by the coboundary of the monoid witness so that `c_E ≡ 1`.
///
/// Witnesses are unique up to characters of `P`, and a character `t` leaves
/// `c_E` alone while scaling `c_i` by `t(α_i)`. If after the first step each
/// `c_i` is a constant root of unity, the character fixing all of them at once
/// is found by solving `Σ_j A_{ji} θ_j = phase(c_i)` over `Q/Z` and folded in.
/// Anything else is reported as [`Error::TauNotNormalized`].
pub fn normalize_cocycle(e: &BlockCocycle, a: &BTreeMap<Weight, Scalar>) -> Result<Normalized> {
    let ty = e.ty;
    let r = ty.rank();
    let weights = e.weights();
    let a = CentralElement::new(
        weights
            .iter()
            .map(|w| {
                a.get(w).cloned().map(|v| (w.clone(), v)).ok_or_else(|| {
                    Error::TruncationNotClosed(format!(
                        "witness is undefined at the constituent {w}"
                    ))
                })
            })
            .collect::<Result<_>>()?,
    );
    let e1 = coboundary_block(ty, e.bound, &a)?.inverse()?.mul(e)?;
    if let Some(((m, eta), v)) = extract_ce(&e1)?.values().iter().find(|(_, v)| !v.is_one()) {
        return Err(Error::Precondition(format!(
            "witness does not trivialize c_E: c_E'({m}, {eta}) = {v}"
        )));
    }
    let mut phases = vec![CircleValue::zero(); r];
    let mut adjust = false;
    for (i, phase) in phases.iter_mut().enumerate() {
        let ci = extract_ci(&e1, i)?;
        let mut it = ci.iter();
        let Some((_, first)) = it.next() else {
            continue;
        };
        if let Some(((m, eta), v)) = it.find(|(_, v)| *v != first) {
            return Err(Error::TauNotNormalized(format!(
                "c_{}' is not constant: {first} somewhere, {v} at ({m}, {eta})",
                i + 1
            )));
        }
        if !first.is_root_of_unity() {
            return Err(Error::TauNotNormalized(format!(
                "c_{}' ≡ {first} is not a root of unity",
                i + 1
            )));
        }
        *phase = first.phase();
        adjust |= !first.is_one();
    }
    if !adjust {
        return Ok(Normalized {
            cocycle: e1,
            witness: a,
            character_adjusted: false,
        });
    }
    let cartan = cartan_matrix(ty);
    let rows: Vec<Vec<i64>> = (0..r)
        .map(|i| (0..r).map(|j| cartan.get(j, i)).collect())
        .collect();
    let theta = solve_mod_one(&rows, &phases, r).ok_or_else(|| {
        Error::TauNotNormalized(
            "no character of P takes the required values on the simple roots".into(),
        )
    })?;
    let t: Vec<Scalar> = theta.into_iter().map(Scalar::from_phase).collect();
    let chi = CentralElement::new(
        weights
            .iter()
            .map(|w| {
                let v: Scalar = t.iter().zip(w.coords()).map(|(s, &k)| s.pow(k)).product();
                (w.clone(), v)
            })
            .collect(),
    );
    let e2 = coboundary_block(ty, e.bound, &chi)?.inverse()?.mul(&e1)?;
    for i in 0..r {
        if let Some(((m, eta), v)) = extract_ci(&e2, i)?.into_iter().find(|(_, v)| !v.is_one()) {
            return Err(Error::TauNotNormalized(format!(
                "c_{}'({m}, {eta}) = {v} after the character adjustment",
                i + 1
            )));
        }
    }
    Ok(Normalized {
        cocycle: e2,
        witness: a.mul(&chi)?,
        character_adjusted: true,
    })
}

/// Solution set of the normalized cocycle problem on an `A1` truncation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prop2Solution {
    pub bound: i64,
    pub tau_fixed: bool,
    /// Blocks left free by the normalization.
    pub unknowns: Vec<BlockKey>,
    /// Number of monomial equations produced by the cocycle identity.
    pub constraints: usize,
    /// The solutions form `(C*)^free_rank × Π Z/t` over the torsion `t`.
    pub free_rank: usize,
    pub torsion: Vec<i64>,
}

impl Prop2Solution {
    pub fn is_unique(&self) -> bool {
        self.free_rank == 0 && self.torsion.is_empty()
    }
}

/// Finds every block cocycle on the `A1` truncation of the given bound with
/// `c_E ≡ 1` and (when `fix_tau`) `c_1 ≡ 1`.
///
/// In `A1` every block is a scalar, and the operator form of the cocycle
/// identity says exactly: whenever the change of basis between the two
/// bracketings links a left vector to a right one, their eigenvalues agree.
/// Each such condition equates two monomials in the unknown blocks, so the
/// solutions are the homomorphisms to `C*` from the cokernel of the integer
/// exponent matrix, read off from its Smith normal form.
pub fn solve_normalized(bound: i64, fix_tau: bool, q: &QParam) -> Result<Prop2Solution> {
    let ty: DynkinType = DynkinType::new(Family::A, 1)?;
    let shape = truncation_shape(ty, bound)?;
    let mut index: BTreeMap<BlockKey, usize> = BTreeMap::new();
    let mut unknowns = Vec::new();
    for ((m, e), parts) in &shape {
        for (nu, _) in parts {
            let depth = m.get(0) + e.get(0) - nu.get(0);
            let fixed = depth == 0 || (fix_tau && depth == 2);
            if !fixed {
                let key = (m.clone(), e.clone(), nu.clone());
                index.insert(key.clone(), unknowns.len());
                unknowns.push(key);
            }
        }
    }
    let n = unknowns.len();
    let mut cache = ModuleCache::new(ty, q.clone());
    let mut rows: BTreeSet<Vec<i64>> = BTreeSet::new();
    for (mu, eta, nu) in truncated_triples(1, bound) {
        for f in triple_frames(&mut cache, &mu, &eta, &nu)? {
            let mono = |a: BlockKey, b: BlockKey, sign: i64, row: &mut Vec<i64>| {
                for k in [a, b] {
                    if let Some(&u) = index.get(&k) {
                        row[u] += sign;
                    }
                }
            };
            for (i, rg) in f.right.iter().enumerate() {
                for (j, lg) in f.left.iter().enumerate() {
                    if f.x.get(i, j).is_zero() {
                        continue;
                    }
                    let mut row = vec![0i64; n];
                    mono(
                        (mu.clone(), eta.clone(), lg.kappa.clone()),
                        (lg.kappa.clone(), nu.clone(), f.lambda.clone()),
                        1,
                        &mut row,
                    );
                    mono(
                        (eta.clone(), nu.clone(), rg.kappa.clone()),
                        (mu.clone(), rg.kappa.clone(), f.lambda.clone()),
                        -1,
                        &mut row,
                    );
                    if row.iter().any(|&x| x != 0) {
                        rows.insert(row);
                    }
                }
            }
        }
    }
    let constraints = rows.len();
    let (rank, torsion) = if n == 0 || rows.is_empty() {
        (0, Vec::new())
    } else {
        let snf = smith_normal_form(&rows.into_iter().collect());
        let d = snf.diagonal();
        (
            snf.rank(),
            d.into_iter().map(i64::abs).filter(|&x| x > 1).collect(),
        )
    };
    Ok(Prop2Solution {
        bound,
        tau_fixed: fix_tau,
        unknowns,
        constraints,
        free_rank: n - rank,
        torsion,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cohomology::{alternating_bicharacters, bicharacter_to_cocycle};
    use crate::linalg::{rat, rat_int};
    use crate::monoid::{monoid_coboundary_witness, MonoidWitness};

    fn ty(s: &str) -> DynkinType {
        s.parse().unwrap()
    }

    fn w(s: &str) -> Weight {
        s.parse().unwrap()
    }

    fn q2() -> QParam {
        QParam::new(rat_int(2)).unwrap()
    }

    fn a1_parity() -> Cocycle2 {
        let g = fundamental_group(ty("A1")).group().clone();
        Cocycle2::from_fn(g, |x, y| CircleValue::new((x[0] * y[0]) as i64, 2)).unwrap()
    }

    fn d4_class() -> Cocycle2 {
        let g = fundamental_group(ty("D4")).group().clone();
        bicharacter_to_cocycle(&alternating_bicharacters(&g)[1]).unwrap()
    }

    #[test]
    fn identity_cocycle_passes_both_methods() {
        let e = BlockCocycle::identity(ty("A1"), 3).unwrap();
        for m in [VerifyMethod::Operator, VerifyMethod::Reduction] {
            let r = verify_cocycle_identity(&e, m, &q2()).unwrap();
            assert!(r.holds(), "{r:?}");
        }
        assert!(extract_ce(&e).unwrap().is_trivial());
    }

    #[test]
    fn perturbed_block_is_caught_by_operators() {
        let e = BlockCocycle::identity(ty("A1"), 3).unwrap();
        let bad = e
            .with_block(
                &w("1"),
                &w("1"),
                &w("0"),
                Block::scalar(1, Scalar::from_int(2).unwrap()),
            )
            .unwrap();
        let r = verify_cocycle_identity(&bad, VerifyMethod::Operator, &q2()).unwrap();
        assert!(!r.holds());
        assert!(matches!(
            verify_cocycle_identity(&bad, VerifyMethod::Reduction, &q2()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn group_like_detection() {
        let t = ty("A1");
        let one = CentralElement::for_truncation(t, 3, |_| Scalar::one()).unwrap();
        assert!(is_group_like(t, 3, &one).unwrap().holds());
        let sign = CentralElement::character(t, 3, &[Scalar::minus_one()]).unwrap();
        match is_group_like(t, 3, &sign).unwrap() {
            GroupLike::Character { values } => {
                assert_eq!(values[&vec![1]], Scalar::minus_one());
                assert_eq!(values[&vec![0]], Scalar::one());
            }
            other => panic!("{other:?}"),
        }
        let two = CentralElement::character(t, 3, &[Scalar::from_int(2).unwrap()]).unwrap();
        match is_group_like(t, 3, &two).unwrap() {
            GroupLike::NotMultiplicative { mu, eta, nu } => {
                assert_eq!(mu.get(0) + eta.get(0) - nu.get(0), 2)
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn coboundary_blocks_of_a_power() {
        let t = ty("A1");
        let s = Scalar::from_rational(&rat(3, 2)).unwrap();
        let a = CentralElement::character(t, 4, &[s.clone()]).unwrap();
        let e = coboundary_block(t, 4, &a).unwrap();
        for ((m, eta, nu), b) in e.blocks() {
            assert_eq!(
                b.as_scalar().unwrap(),
                s.pow(m.get(0) + eta.get(0) - nu.get(0))
            );
        }
        assert!(extract_ce(&e).unwrap().is_trivial());
        assert!(verify_cocycle_identity(&e, VerifyMethod::Operator, &q2())
            .unwrap()
            .holds());
    }

    #[test]
    fn ec_of_a1_parity_cocycle() {
        let t = ty("A1");
        let e = make_ec(t, &a1_parity(), 4).unwrap();
        assert!(verify_cocycle_identity(&e, VerifyMethod::Operator, &q2())
            .unwrap()
            .holds());
        assert!(verify_cocycle_identity(&e, VerifyMethod::Reduction, &q2())
            .unwrap()
            .holds());
        let ce = extract_ce(&e).unwrap();
        assert_eq!(ce.value(&w("1"), &w("3")), Some(&Scalar::minus_one()));
        let MonoidWitness::Coboundary { a } = monoid_coboundary_witness(&ce) else {
            panic!("symmetric cocycle");
        };
        let n = normalize_cocycle(&e, &a).unwrap();
        assert!(
            n.cocycle.is_identity(),
            "{:?}",
            n.cocycle.first_nontrivial()
        );
        assert!(n.character_adjusted);
    }

    #[test]
    fn d4_class_reduction() {
        let t = ty("D4");
        let e = make_ec(t, &d4_class(), 2).unwrap();
        let r = verify_cocycle_identity(&e, VerifyMethod::Auto, &q2()).unwrap();
        assert_eq!(r.method, VerifyMethod::Reduction);
        assert!(r.holds());
        assert!(e.blocks().values().all(|b| {
            let s = b.as_scalar().unwrap();
            s.is_one() || s == Scalar::minus_one()
        }));
    }

    #[test]
    fn raw_operator_round_trip() {
        let t = ty("A1");
        let e = make_ec(t, &a1_parity(), 2).unwrap();
        let perturbed = e
            .with_block(
                &w("1"),
                &w("1"),
                &w("0"),
                Block::scalar(1, Scalar::from_int(5).unwrap()),
            )
            .unwrap();
        let mut cache = ModuleCache::new(t, q2());
        let mut ops = BTreeMap::new();
        for (m, eta) in [(w("1"), w("1")), (w("0"), w("2")), (w("1"), w("0"))] {
            ops.insert(
                (m.clone(), eta.clone()),
                raw_operator(&perturbed, &mut cache, &m, &eta).unwrap(),
            );
        }
        let Invariance::Invariant { blocks } = verify_invariance(&mut cache, &ops).unwrap() else {
            panic!("block-diagonal operators commute with the coproduct");
        };
        for (k, b) in blocks {
            assert_eq!(&b, perturbed.block(&k.0, &k.1, &k.2).unwrap());
        }
    }

    #[test]
    fn non_invariant_operator_is_rejected() {
        let t = ty("A1");
        let mut cache = ModuleCache::new(t, q2());
        let v = cache.get(&w("1")).unwrap();
        let space = TensorSpace::new(vec![v.clone(), v]).unwrap();
        let mut op = space.f_matrix(0);
        for i in 0..4 {
            let x = op.get(i, i) + rat_int(1);
            op.set(i, i, x);
        }
        let mut ops = BTreeMap::new();
        ops.insert((w("1"), w("1")), op);
        match verify_invariance(&mut cache, &ops).unwrap() {
            Invariance::NotInvariant { generator, .. } => assert_eq!(generator, "Δ(E_1)"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn matrix_blocks_in_a2() {
        let t = ty("A2");
        let mut cache = ModuleCache::new(t, q2());
        let (m, eta) = (w("1,1"), w("1,1"));
        let mut e = BlockCocycle::identity(t, 4).unwrap();
        let twist = QMatrix::from_rows(vec![
            vec![rat_int(1), rat_int(2)],
            vec![rat_int(0), rat_int(3)],
        ]);
        e = e
            .with_block(&m, &eta, &m, Block::matrix(twist.clone()).unwrap())
            .unwrap();
        let op = raw_operator(&e, &mut cache, &m, &eta).unwrap();
        let mut ops = BTreeMap::new();
        ops.insert((m.clone(), eta.clone()), op);
        let Invariance::Invariant { blocks } = verify_invariance(&mut cache, &ops).unwrap() else {
            panic!("not invariant");
        };
        assert_eq!(
            blocks[&(m.clone(), eta.clone(), m.clone())],
            Block::matrix(twist).unwrap()
        );
    }

    #[test]
    fn matrix_path_of_the_cocycle_check() {
        let t = ty("A2");
        let id = BlockCocycle::identity(t, 3).unwrap();
        let dense =
            BlockCocycle::from_fn(t, 3, |_, _, _, k| Block::matrix(QMatrix::identity(k))).unwrap();
        assert!(
            verify_cocycle_identity(&dense, VerifyMethod::Operator, &q2())
                .unwrap()
                .holds()
        );
        let bad = id
            .with_block(
                &w("1,0"),
                &w("1,0"),
                &w("0,1"),
                Block::matrix(QMatrix::scalar(1, &rat_int(3))).unwrap(),
            )
            .unwrap();
        assert!(
            !verify_cocycle_identity(&bad, VerifyMethod::Operator, &q2())
                .unwrap()
                .holds()
        );
    }

    #[test]
    fn eigenvalues_for_the_parity_cocycle() {
        let e = make_ec(ty("A1"), &a1_parity(), 4).unwrap();
        let c = eigenvalue_identity_check(&e, 0, &w("1"), &w("1"), &w("1")).unwrap();
        assert!(c.holds());
        assert!(eigenvalue_identity_check(&e, 0, &w("0"), &w("1"), &w("1")).is_err());
    }

    #[test]
    fn normalized_solutions_small_bounds() {
        let s2 = solve_normalized(2, true, &q2()).unwrap();
        assert!(s2.unknowns.is_empty() && s2.is_unique());
        let s4 = solve_normalized(4, true, &q2()).unwrap();
        assert_eq!(s4.unknowns, vec![(w("2"), w("2"), w("0"))]);
        assert!(s4.is_unique(), "{s4:?}");
        let loose = solve_normalized(2, false, &q2()).unwrap();
        assert!(loose.free_rank >= 1);
    }

    #[test]
    fn json_round_trip_and_validation() {
        let e = make_ec(ty("A1"), &a1_parity(), 2).unwrap();
        let s = e.to_json().to_string();
        assert_eq!(BlockCocycle::from_json_str(&s).unwrap(), e);
        let t = ty("A2");
        let m = BlockCocycle::identity(t, 4)
            .unwrap()
            .with_block(
                &w("1,1"),
                &w("1,1"),
                &w("1,1"),
                Block::matrix(QMatrix::from_rows(vec![
                    vec![rat_int(1), rat_int(2)],
                    vec![rat_int(0), rat_int(3)],
                ]))
                .unwrap(),
            )
            .unwrap();
        assert_eq!(
            BlockCocycle::from_json_str(&m.to_json().to_string()).unwrap(),
            m
        );
        assert!(BlockCocycle::from_json_str(r#"{"type":"A1","bound":1,"blocks":{}}"#).is_err());
        assert!(
            BlockCocycle::from_json_str(r#"{"type":"A1","bound":0,"blocks":{"(0|0|0)":"0"}}"#)
                .is_err()
        );
        assert!(BlockCocycle::from_json_str(
            r#"{"type":"A1","bound":0,"blocks":{"(0|0|0)":"1","(0|0|2)":"1"}}"#
        )
        .is_err());
    }
}

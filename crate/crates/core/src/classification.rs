//! Per-type summary: `P/Q`, `H²(P/Q; T)`, diagram automorphisms, and the
//! order of `H²(P/Q; T) ⋊ Aut(Ψ)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::cohomology::{alternating_bicharacters, h2, Bicharacter};
use crate::lattice::{
    cartan_matrix, fundamental_group, DynkinType, GroupElement, PqProjection, Weight,
};

/// A permutation of the nodes `0..rank`: node `i` goes to `perm[i]`.
pub type NodePermutation = Vec<usize>;

/// Every permutation `σ` with `A[σ(i)][σ(j)] = A[i][j]`, by backtracking over
/// partial assignments. The identity comes first.
pub fn diagram_automorphisms(ty: DynkinType) -> Vec<NodePermutation> {
    let a = cartan_matrix(ty);
    let n = ty.rank();
    let mut out = Vec::new();
    let mut perm = Vec::with_capacity(n);
    let mut used = vec![false; n];
    fn extend(
        a: &crate::lattice::CartanMatrix,
        n: usize,
        perm: &mut Vec<usize>,
        used: &mut [bool],
        out: &mut Vec<NodePermutation>,
    ) {
        let i = perm.len();
        if i == n {
            out.push(perm.clone());
            return;
        }
        for t in 0..n {
            if used[t] || a.get(t, t) != a.get(i, i) {
                continue;
            }
            if (0..i).all(|j| a.get(t, perm[j]) == a.get(i, j) && a.get(perm[j], t) == a.get(j, i))
            {
                used[t] = true;
                perm.push(t);
                extend(a, n, perm, used, out);
                perm.pop();
                used[t] = false;
            }
        }
    }
    extend(&a, n, &mut perm, &mut used, &mut out);
    out
}

pub fn compose(s: &[usize], t: &[usize]) -> NodePermutation {
    t.iter().map(|&x| s[x]).collect()
}

pub fn inverse(s: &[usize]) -> NodePermutation {
    let mut out = vec![0; s.len()];
    for (i, &x) in s.iter().enumerate() {
        out[x] = i;
    }
    out
}

/// Closure of `gens` under composition.
pub fn generated_group(n: usize, gens: &[NodePermutation]) -> Vec<NodePermutation> {
    let id: NodePermutation = (0..n).collect();
    let mut seen = vec![id.clone()];
    let mut frontier = vec![id];
    while let Some(p) = frontier.pop() {
        for g in gens {
            let q = compose(g, &p);
            if !seen.contains(&q) {
                seen.push(q.clone());
                frontier.push(q);
            }
        }
    }
    seen
}

/// A small generating set, picked greedily from `group` in order.
pub fn greedy_generators(n: usize, group: &[NodePermutation]) -> Vec<NodePermutation> {
    let mut gens: Vec<NodePermutation> = Vec::new();
    let mut span = generated_group(n, &gens);
    for p in group {
        if !span.contains(p) {
            gens.push(p.clone());
            span = generated_group(n, &gens);
        }
    }
    gens
}

/// The action of a node permutation on `P/Q`: `ω_i ↦ ω_{σ(i)}`.
pub fn act_on_pq(proj: &PqProjection, sigma: &[usize], x: &[u64]) -> GroupElement {
    let w = proj.preimage(x);
    let mut coords = vec![0; w.rank()];
    for (i, &c) in w.coords().iter().enumerate() {
        coords[sigma[i]] = c;
    }
    proj.project(&Weight::new(coords))
}

/// The induced permutation of `H²(P/Q; T)`, listed on the enumeration order of
/// [`alternating_bicharacters`]: `(σ·b)(x, y) = b(σ⁻¹x, σ⁻¹y)`.
pub fn act_on_h2(proj: &PqProjection, sigma: &[usize], classes: &[Bicharacter]) -> Vec<usize> {
    let g = proj.group();
    let sinv = inverse(sigma);
    let gens: Vec<GroupElement> = (0..g.num_generators()).map(|i| g.generator(i)).collect();
    let pulled: Vec<GroupElement> = gens.iter().map(|x| act_on_pq(proj, &sinv, x)).collect();
    classes
        .iter()
        .map(|b| {
            let values: Vec<Vec<_>> = pulled
                .iter()
                .map(|x| pulled.iter().map(|y| b.eval(x, y)).collect())
                .collect();
            classes
                .iter()
                .position(|c| c.matrix() == values.as_slice())
                .expect("automorphisms permute alternating bicharacters")
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationReport {
    #[serde(rename = "type")]
    pub ty: DynkinType,
    pub pq_factors: Vec<u64>,
    pub pq_order: u64,
    pub h2_factors: Vec<u64>,
    pub h2_order: u64,
    pub aut_order: u64,
    /// Generators as node permutations, nodes numbered from 1.
    pub aut_generators: Vec<Vec<usize>>,
    /// For each generator, the induced permutation of the `H²` elements.
    pub h2_action: Vec<Vec<usize>>,
    pub total_order: u64,
    pub statement: String,
}

pub fn classify(ty: DynkinType) -> ClassificationReport {
    let proj = fundamental_group(ty);
    let pq = proj.group().clone();
    let h = h2(&pq);
    let auts = diagram_automorphisms(ty);
    let gens = greedy_generators(ty.rank(), &auts);
    let classes = alternating_bicharacters(&pq);
    let h2_action = gens.iter().map(|s| act_on_h2(&proj, s, &classes)).collect();
    let aut_order = auts.len() as u64;
    let total = h.order() * aut_order;
    ClassificationReport {
        ty,
        pq_factors: pq.factors().to_vec(),
        pq_order: pq.order(),
        h2_factors: h.factors().to_vec(),
        h2_order: h.order(),
        aut_order,
        aut_generators: gens
            .iter()
            .map(|g| g.iter().map(|x| x + 1).collect())
            .collect(),
        h2_action,
        total_order: total,
        statement: format!(
            "H²(P/Q;T) ⋊ Aut(Ψ) = {h} ⋊ (order {aut_order}), order {} · {aut_order} = {total}",
            h.order()
        ),
    }
}

fn group_name(factors: &[u64]) -> String {
    if factors.is_empty() {
        "trivial".into()
    } else {
        factors
            .iter()
            .map(|n| format!("Z/{n}"))
            .collect::<Vec<_>>()
            .join(" × ")
    }
}

impl fmt::Display for ClassificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "type: {}", self.ty)?;
        writeln!(
            f,
            "P/Q: {} (order {})",
            group_name(&self.pq_factors),
            self.pq_order
        )?;
        writeln!(
            f,
            "H²(P/Q;T): {} (order {})",
            group_name(&self.h2_factors),
            self.h2_order
        )?;
        let gens: Vec<String> = self
            .aut_generators
            .iter()
            .map(|g| {
                format!(
                    "[{}]",
                    g.iter().map(usize::to_string).collect::<Vec<_>>().join(" ")
                )
            })
            .collect();
        writeln!(
            f,
            "Aut(Ψ): order {}, generators {}",
            self.aut_order,
            if gens.is_empty() {
                "none".into()
            } else {
                gens.join(", ")
            }
        )?;
        write!(f, "autoequivalences: {}", self.statement)
    }
}

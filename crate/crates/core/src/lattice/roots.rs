//! Positive roots, the Weyl dimension formula, Freudenthal multiplicities and
//! character-level tensor product decomposition.

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, ToPrimitive, Zero};

use super::dynkin::{cartan_matrix, CartanMatrix, DynkinType};
use super::weight::Weight;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Root {
    /// Coefficients in the basis of simple roots.
    pub simple_coords: Vec<i64>,
    /// Fundamental-weight coordinates.
    pub weight: Weight,
}

impl Root {
    pub fn height(&self) -> i64 {
        self.simple_coords.iter().sum()
    }
}

/// Cartan data plus the positive roots, shared by the character computations.
#[derive(Debug, Clone)]
pub struct RootSystem {
    cartan: CartanMatrix,
    positive: Vec<Root>,
}

impl RootSystem {
    pub fn new(ty: DynkinType) -> Self {
        let cartan = cartan_matrix(ty);
        let positive = compute_positive_roots(&cartan);
        RootSystem { cartan, positive }
    }

    pub fn dynkin_type(&self) -> DynkinType {
        self.cartan.dynkin_type()
    }

    pub fn cartan(&self) -> &CartanMatrix {
        &self.cartan
    }

    pub fn rank(&self) -> usize {
        self.cartan.rank()
    }

    pub fn positive_roots(&self) -> &[Root] {
        &self.positive
    }

    pub fn simple_root(&self, i: usize) -> Weight {
        Weight::new(self.cartan.simple_root(i))
    }

    pub fn rho(&self) -> Weight {
        Weight::new(vec![1; self.rank()])
    }

    /// `(x, α)` for a weight `x` and a root given by simple-root coordinates.
    fn pair(&self, x: &Weight, root_coords: &[i64]) -> i64 {
        let d = self.cartan.symmetrizers();
        root_coords
            .iter()
            .enumerate()
            .map(|(j, c)| c * d[j] * x.get(j))
            .sum()
    }

    fn check(&self, mu: &Weight) -> Result<()> {
        mu.check_rank(self.rank())?;
        mu.check_dominant()
    }

    pub fn weyl_dim(&self, mu: &Weight) -> Result<u128> {
        self.check(mu)?;
        let rho = self.rho();
        let shifted = mu + &rho;
        let mut num = BigInt::one();
        let mut den = BigInt::one();
        for root in &self.positive {
            num *= self.pair(&shifted, &root.simple_coords);
            den *= self.pair(&rho, &root.simple_coords);
        }
        let (q, r) = num.div_rem(&den);
        debug_assert!(r.is_zero());
        q.to_u128()
            .ok_or_else(|| Error::TooLarge(format!("dimension of V({mu}) exceeds u128")))
    }

    /// Weight multiplicities of the irreducible module with highest weight `mu`
    /// (Freudenthal recursion, exact integers).
    pub fn weight_multiplicities(&self, mu: &Weight) -> Result<BTreeMap<Weight, u64>> {
        self.check(mu)?;
        let rank = self.rank();
        let rho = self.rho();
        let top = mu + &rho;
        let simple: Vec<Weight> = (0..rank).map(|i| self.simple_root(i)).collect();

        // weights keyed by λ; β = μ - λ tracked in simple-root coordinates
        let mut mult: HashMap<Weight, u64> = HashMap::new();
        mult.insert(mu.clone(), 1);
        let mut level: BTreeMap<Weight, Vec<i64>> = BTreeMap::new();
        level.insert(mu.clone(), vec![0; rank]);
        while !level.is_empty() {
            let mut next: BTreeMap<Weight, Vec<i64>> = BTreeMap::new();
            for (lambda, beta) in &level {
                for (j, alpha) in simple.iter().enumerate() {
                    let cand = lambda - alpha;
                    if mult.contains_key(&cand) || next.contains_key(&cand) {
                        continue;
                    }
                    let mut b = beta.clone();
                    b[j] += 1;
                    next.insert(cand, b);
                }
            }
            let mut kept = BTreeMap::new();
            for (lambda, beta) in next {
                // (μ+ρ,μ+ρ) - (λ+ρ,λ+ρ) = (μ+λ+2ρ, β)
                let s = &(&top + &lambda) + &rho;
                let denom = self.pair(&s, &beta) as i128;
                let mut numer: i128 = 0;
                for root in &self.positive {
                    let mut k = 1;
                    loop {
                        let up = &lambda + &root.weight.scale(k);
                        let Some(&m) = mult.get(&up) else { break };
                        numer += 2 * m as i128 * self.pair(&up, &root.simple_coords) as i128;
                        k += 1;
                    }
                }
                if denom <= 0 || numer == 0 {
                    continue;
                }
                debug_assert_eq!(numer % denom, 0, "Freudenthal quotient must be integral");
                let m = (numer / denom) as u64;
                if m > 0 {
                    mult.insert(lambda.clone(), m);
                    kept.insert(lambda, beta);
                }
            }
            level = kept;
        }
        Ok(mult.into_iter().collect())
    }

    /// Reflects `x` into the dominant chamber. Returns `None` when `x` lies on
    /// a wall (some coordinate becomes zero), else the dominant image and the
    /// parity of the number of reflections.
    fn reflect_to_dominant(&self, mut x: Weight) -> Option<(Weight, bool)> {
        let rank = self.rank();
        let mut odd = false;
        loop {
            let Some(j) = (0..rank).find(|&j| x.get(j) <= 0) else {
                return Some((x, odd));
            };
            if x.get(j) == 0 {
                return None;
            }
            let alpha = self.simple_root(j);
            x = &x - &alpha.scale(x.get(j));
            odd = !odd;
        }
    }

    /// Constituents of `V_μ ⊗ V_η` with multiplicities (Klimyk's formula with
    /// the ρ-shift; weights on walls cancel).
    pub fn klimyk_decompose(&self, mu: &Weight, eta: &Weight) -> Result<Vec<(Weight, u64)>> {
        self.check(mu)?;
        self.check(eta)?;
        // run over the weights of the smaller factor
        let (big, small) = if self.weyl_dim(mu)? >= self.weyl_dim(eta)? {
            (mu, eta)
        } else {
            (eta, mu)
        };
        let rho = self.rho();
        let base = big + &rho;
        let mut acc: BTreeMap<Weight, i64> = BTreeMap::new();
        for (lambda, m) in self.weight_multiplicities(small)? {
            if let Some((x, odd)) = self.reflect_to_dominant(&base + &lambda) {
                let nu = &x - &rho;
                let e = acc.entry(nu).or_insert(0);
                if odd {
                    *e -= m as i64;
                } else {
                    *e += m as i64;
                }
            }
        }
        let mut out = Vec::new();
        for (nu, m) in acc {
            assert!(m >= 0, "negative Klimyk multiplicity at {nu}");
            if m > 0 {
                out.push((nu, m as u64));
            }
        }
        out.sort_by(|(a, _), (b, _)| b.cmp(a));
        Ok(out)
    }
}

fn compute_positive_roots(cartan: &CartanMatrix) -> Vec<Root> {
    let rank = cartan.rank();
    let to_weight = |c: &[i64]| -> Weight {
        Weight::new(
            (0..rank)
                .map(|i| (0..rank).map(|j| cartan.get(i, j) * c[j]).sum())
                .collect(),
        )
    };
    let mut roots: Vec<Vec<i64>> = (0..rank)
        .map(|i| {
            let mut c = vec![0; rank];
            c[i] = 1;
            c
        })
        .collect();
    let mut frontier = roots.clone();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for beta in &frontier {
            let w = to_weight(beta);
            for i in 0..rank {
                // α_i-string through β: β - pα_i … β + qα_i with p - q = <β, α_i^∨>
                let mut p = 0;
                loop {
                    let mut down = beta.clone();
                    down[i] -= p + 1;
                    if roots.contains(&down) {
                        p += 1;
                    } else {
                        break;
                    }
                }
                let q = p - w.get(i);
                if q > 0 {
                    let mut up = beta.clone();
                    up[i] += 1;
                    if !roots.contains(&up) && !next.contains(&up) {
                        next.push(up);
                    }
                }
            }
        }
        roots.extend(next.iter().cloned());
        frontier = next;
    }
    let mut out: Vec<Root> = roots
        .into_iter()
        .map(|c| Root {
            weight: to_weight(&c),
            simple_coords: c,
        })
        .collect();
    out.sort_by(|a, b| {
        a.height()
            .cmp(&b.height())
            .then_with(|| b.simple_coords.cmp(&a.simple_coords))
    });
    out
}

pub fn positive_roots(ty: DynkinType) -> Vec<Weight> {
    RootSystem::new(ty)
        .positive_roots()
        .iter()
        .map(|r| r.weight.clone())
        .collect()
}

pub fn weyl_dim(ty: DynkinType, mu: &Weight) -> Result<u128> {
    RootSystem::new(ty).weyl_dim(mu)
}

pub fn weight_multiplicities(ty: DynkinType, mu: &Weight) -> Result<BTreeMap<Weight, u64>> {
    RootSystem::new(ty).weight_multiplicities(mu)
}

pub fn klimyk_decompose(ty: DynkinType, mu: &Weight, eta: &Weight) -> Result<Vec<(Weight, u64)>> {
    RootSystem::new(ty).klimyk_decompose(mu, eta)
}

use std::collections::BTreeSet;

use proptest::prelude::*;
use qcat_core::classification::{classify, compose, diagram_automorphisms, inverse};
use qcat_core::lattice::{
    cartan_matrix, dominant_weights_up_to, fundamental_group, klimyk_decompose, weyl_dim,
    DynkinType, Family, Weight,
};

fn ty(s: &str) -> DynkinType {
    s.parse().unwrap()
}

/// Simple roots in an orthonormal basis, coordinates doubled so E8 and F4
/// stay integral. Standard numbering.
fn realization(t: DynkinType) -> Vec<Vec<i64>> {
    let n = t.rank();
    let e = |dim: usize, i: usize| {
        let mut v = vec![0; dim];
        v[i] = 2;
        v
    };
    let sub = |a: Vec<i64>, b: Vec<i64>| a.iter().zip(&b).map(|(x, y)| x - y).collect::<Vec<_>>();
    let add = |a: Vec<i64>, b: Vec<i64>| a.iter().zip(&b).map(|(x, y)| x + y).collect::<Vec<_>>();
    match t.family() {
        Family::A => (0..n).map(|i| sub(e(n + 1, i), e(n + 1, i + 1))).collect(),
        Family::B | Family::C | Family::D => {
            let mut out: Vec<Vec<i64>> = (0..n - 1).map(|i| sub(e(n, i), e(n, i + 1))).collect();
            out.push(match t.family() {
                Family::B => e(n, n - 1),
                Family::C => e(n, n - 1).iter().map(|x| 2 * x).collect(),
                _ => add(e(n, n - 2), e(n, n - 1)),
            });
            out
        }
        Family::G => vec![
            sub(e(3, 0), e(3, 1)),
            add(
                add(e(3, 0).iter().map(|x| -2 * x).collect(), e(3, 1)),
                e(3, 2),
            ),
        ],
        Family::F => vec![
            sub(e(4, 1), e(4, 2)),
            sub(e(4, 2), e(4, 3)),
            e(4, 3),
            vec![1, -1, -1, -1],
        ],
        Family::E => {
            let mut all = vec![
                vec![1, -1, -1, -1, -1, -1, -1, 1],
                add(e(8, 0), e(8, 1)),
                sub(e(8, 1), e(8, 0)),
            ];
            for i in 1..6 {
                all.push(sub(e(8, i + 1), e(8, i)));
            }
            all.truncate(n);
            all
        }
    }
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[test]
fn cartan_matrices_match_root_realizations() {
    for t in DynkinType::all_up_to_rank(8) {
        let roots = realization(t);
        let a = cartan_matrix(t);
        for i in 0..t.rank() {
            for j in 0..t.rank() {
                let expected = 2 * dot(&roots[i], &roots[j]) / dot(&roots[i], &roots[i]);
                assert_eq!(a.get(i, j), expected, "{t} entry ({i},{j})");
            }
            // d_i is proportional to the squared length
            for j in 0..t.rank() {
                assert_eq!(
                    a.symmetrizers()[i] * dot(&roots[j], &roots[j]),
                    a.symmetrizers()[j] * dot(&roots[i], &roots[i]),
                    "{t} symmetrizers"
                );
            }
        }
    }
}

#[test]
fn order_of_pq_is_the_determinant() {
    for t in DynkinType::all_up_to_rank(8) {
        let proj = fundamental_group(t);
        assert_eq!(
            proj.group().order() as i64,
            cartan_matrix(t).determinant(),
            "{t}"
        );
    }
}

#[test]
fn fundamental_weights_generate_pq() {
    for t in DynkinType::all_up_to_rank(8) {
        let proj = fundamental_group(t);
        let g = proj.group();
        let gens: Vec<_> = (0..t.rank())
            .map(|i| proj.project(&Weight::fundamental(t.rank(), i)))
            .collect();
        let mut span = BTreeSet::from([g.zero()]);
        let mut frontier = vec![g.zero()];
        while let Some(x) = frontier.pop() {
            for y in &gens {
                let z = g.add(&x, y);
                if span.insert(z.clone()) {
                    frontier.push(z);
                }
            }
        }
        assert_eq!(span.len() as u64, g.order(), "{t}");
    }
}

#[test]
fn h2_is_nontrivial_exactly_for_even_d() {
    for t in DynkinType::all_up_to_rank(8) {
        let even_d = t.family() == Family::D && t.rank() % 2 == 0;
        assert_eq!(classify(t).h2_order > 1, even_d, "{t}");
    }
}

#[test]
fn diagram_automorphisms_form_a_group_fixing_the_cartan_matrix() {
    for t in DynkinType::all_up_to_rank(8) {
        let a = cartan_matrix(t);
        let auts = diagram_automorphisms(t);
        let set: BTreeSet<_> = auts.iter().cloned().collect();
        assert_eq!(set.len(), auts.len());
        for s in &auts {
            for i in 0..t.rank() {
                for j in 0..t.rank() {
                    assert_eq!(a.get(s[i], s[j]), a.get(i, j));
                }
            }
            assert!(set.contains(&inverse(s)));
            for u in &auts {
                assert!(set.contains(&compose(s, u)), "{t} not closed");
            }
        }
        let r = classify(t);
        assert_eq!(r.aut_order as usize, auts.len());
        assert_eq!(r.total_order, r.h2_order * r.aut_order);
    }
}

#[test]
fn klimyk_totals_and_classes() {
    for (t, bound) in [
        ("A2", 4),
        ("B2", 3),
        ("G2", 2),
        ("A3", 2),
        ("D4", 2),
        ("C3", 2),
    ] {
        let t = ty(t);
        let proj = fundamental_group(t);
        let ws = dominant_weights_up_to(t.rank(), bound);
        for mu in &ws {
            for eta in &ws {
                let parts = klimyk_decompose(t, mu, eta).unwrap();
                let total: u128 = parts
                    .iter()
                    .map(|(nu, m)| *m as u128 * weyl_dim(t, nu).unwrap())
                    .sum();
                assert_eq!(
                    total,
                    weyl_dim(t, mu).unwrap() * weyl_dim(t, eta).unwrap(),
                    "{t} {mu} ⊗ {eta}"
                );
                let class = proj.group().add(&proj.project(mu), &proj.project(eta));
                for (nu, _) in &parts {
                    assert_eq!(proj.project(nu), class, "{t} {mu} ⊗ {eta} ∋ {nu}");
                }
            }
        }
    }
}

fn any_type() -> impl Strategy<Value = DynkinType> {
    proptest::sample::select(DynkinType::all_up_to_rank(8))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn projection_is_additive_and_kills_roots(
        t in any_type(),
        x in proptest::collection::vec(-50i64..50, 8),
        y in proptest::collection::vec(-50i64..50, 8),
        k in 0usize..8,
    ) {
        let r = t.rank();
        let proj = fundamental_group(t);
        let g = proj.group();
        let (x, y) = (Weight::new(x[..r].to_vec()), Weight::new(y[..r].to_vec()));
        prop_assert_eq!(proj.project(&(&x + &y)), g.add(&proj.project(&x), &proj.project(&y)));
        let alpha = Weight::new(cartan_matrix(t).simple_root(k % r));
        prop_assert_eq!(proj.project(&(&x + &alpha)), proj.project(&x));
        let back = proj.preimage(&proj.project(&x));
        prop_assert_eq!(proj.project(&back), proj.project(&x));
    }

    #[test]
    fn weight_text_round_trips(coords in proptest::collection::vec(-1000i64..1000, 1..9)) {
        let w = Weight::new(coords);
        let parsed: Weight = w.to_string().parse().unwrap();
        prop_assert_eq!(parsed, w);
    }
}

use num_integer::Integer;
use proptest::prelude::*;
use qcat_core::cohomology::{
    alternating_bicharacters, bicharacter_to_cocycle, cocycle_commutator, h2, is_coboundary_finite,
    Bicharacter, Cocycle2,
};
use qcat_core::lattice::FiniteAbelianGroup;
use qcat_core::CircleValue;

fn groups_up_to(max: u64) -> Vec<FiniteAbelianGroup> {
    fn rec(prefix: &mut Vec<u64>, order: u64, max: u64, out: &mut Vec<FiniteAbelianGroup>) {
        for next in 2..=max / order {
            if prefix.last().is_some_and(|&l| next % l != 0) {
                continue;
            }
            prefix.push(next);
            out.push(FiniteAbelianGroup::new(prefix.clone()).unwrap());
            rec(prefix, order * next, max, out);
            prefix.pop();
        }
    }
    let mut out = vec![FiniteAbelianGroup::trivial()];
    rec(&mut Vec::new(), 1, max, &mut out);
    out
}

/// Every bicharacter of `g`, as generator matrices with entries in `(1/gcd)Z/Z`.
fn all_bicharacter_matrices(g: &FiniteAbelianGroup) -> Vec<Vec<Vec<CircleValue>>> {
    let f = g.factors();
    let k = f.len();
    let mut out = vec![vec![vec![CircleValue::zero(); k]; k]];
    for i in 0..k {
        for j in 0..k {
            let d = f[i].gcd(&f[j]) as i64;
            out = out
                .into_iter()
                .flat_map(|m| {
                    (0..d).map(move |t| {
                        let mut m = m.clone();
                        m[i][j] = CircleValue::new(t, d);
                        m
                    })
                })
                .collect();
        }
    }
    out
}

fn as_cocycle(g: &FiniteAbelianGroup, m: &[Vec<CircleValue>]) -> Cocycle2 {
    Cocycle2::from_fn(g.clone(), |x, y| {
        let mut s = CircleValue::zero();
        for (i, xi) in x.iter().enumerate() {
            for (j, yj) in y.iter().enumerate() {
                s += m[i][j].mul_int((*xi * *yj) as i64);
            }
        }
        s
    })
    .unwrap()
}

#[test]
fn lifted_classes_are_cocycles_up_to_order_16() {
    for g in groups_up_to(16) {
        for b in alternating_bicharacters(&g) {
            let c = bicharacter_to_cocycle(&b).unwrap();
            c.check_identity().unwrap();
            assert_eq!(cocycle_commutator(&c).unwrap(), b, "{g}");
        }
    }
}

#[test]
fn coboundary_iff_commutator_vanishes_up_to_order_8() {
    // bicharacter cocycles meet every class, and coboundaries are added on top
    for g in groups_up_to(8) {
        let n = g.order() as i64;
        let shift: Vec<CircleValue> = (0..n).map(|k| CircleValue::new(k * k + 1, 2 * n)).collect();
        let cob = Cocycle2::coboundary(g.clone(), &shift).unwrap();
        for m in all_bicharacter_matrices(&g) {
            let c = as_cocycle(&g, &m).add(&cob).unwrap();
            c.check_identity().unwrap();
            let zero = cocycle_commutator(&c).unwrap().is_zero();
            assert_eq!(
                is_coboundary_finite(&c).unwrap().is_coboundary(),
                zero,
                "{g} {m:?}"
            );
        }
    }
}

#[test]
fn distinct_commutators_count_h2() {
    for g in groups_up_to(8) {
        let comms: std::collections::BTreeSet<Vec<Vec<CircleValue>>> = all_bicharacter_matrices(&g)
            .iter()
            .map(|m| {
                cocycle_commutator(&as_cocycle(&g, m))
                    .unwrap()
                    .matrix()
                    .to_vec()
            })
            .collect();
        assert_eq!(comms.len() as u64, h2(&g).order(), "{g}");
        assert_eq!(alternating_bicharacters(&g).len() as u64, h2(&g).order());
    }
}

#[test]
fn h2_of_products() {
    let cases: [(&[u64], &[u64]); 5] = [
        (&[2, 2], &[2]),
        (&[3, 3, 3], &[3, 3, 3]),
        (&[2, 4, 8], &[2, 2, 4]),
        (&[6, 10], &[2]),
        (&[7], &[]),
    ];
    for (orders, expected) in cases {
        let g = FiniteAbelianGroup::from_cyclic_orders(orders).unwrap();
        assert_eq!(h2(&g).factors(), expected, "{orders:?}");
    }
}

fn small_group() -> impl Strategy<Value = FiniteAbelianGroup> {
    proptest::sample::select(groups_up_to(12))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn json_round_trips(g in small_group(), pick in any::<usize>(), a in proptest::collection::vec(-20i64..20, 12)) {
        let classes = alternating_bicharacters(&g);
        let b = &classes[pick % classes.len()];
        let back = Bicharacter::from_json_str(&b.to_json().to_string()).unwrap();
        prop_assert_eq!(&back, b);
        let shift: Vec<CircleValue> = (0..g.order() as usize).map(|k| CircleValue::new(a[k % a.len()], 12)).collect();
        let c = bicharacter_to_cocycle(b).unwrap().add(&Cocycle2::coboundary(g.clone(), &shift).unwrap()).unwrap();
        let back = Cocycle2::from_json_str(&c.to_json().to_string()).unwrap();
        prop_assert_eq!(back, c);
    }

    #[test]
    fn arbitrary_text_never_panics(s in "\\PC{0,80}") {
        let _ = Cocycle2::from_json_str(&s);
        let _ = Bicharacter::from_json_str(&s);
        let _ = s.parse::<CircleValue>();
        let _ = s.parse::<qcat_core::Scalar>();
    }
}

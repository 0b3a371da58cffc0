use std::collections::BTreeMap;

use proptest::prelude::*;
use qcat_core::cohomology::{
    alternating_bicharacters, bicharacter_to_cocycle, cocycle_commutator, Cocycle2,
};
use qcat_core::invariant::{
    coboundary_block, extract_ce, is_group_like, make_ec, normalize_cocycle, raw_operator,
    solve_normalized, verify_cocycle_identity, verify_invariance, BlockCocycle, CentralElement,
    VerifyMethod,
};
use qcat_core::lattice::{fundamental_group, DynkinType, Weight};
use qcat_core::linalg::rat;
use qcat_core::monoid::{
    extend_to_lattice, kernel_contains_roots, monoid_coboundary_witness, monoid_commutator,
    MonoidWitness,
};
use qcat_core::uqg::{ModuleCache, QParam};
use qcat_core::{CircleValue, Scalar};

fn ty(s: &str) -> DynkinType {
    s.parse().unwrap()
}

fn q2() -> QParam {
    "2".parse().unwrap()
}

fn shifted_classes(t: DynkinType, seed: i64) -> Vec<Cocycle2> {
    let g = fundamental_group(t).group().clone();
    let n = g.order() as i64;
    let a: Vec<CircleValue> = (0..n)
        .map(|k| CircleValue::new(seed * k * k + k, 2 * n))
        .collect();
    let cob = Cocycle2::coboundary(g.clone(), &a).unwrap();
    alternating_bicharacters(&g)
        .iter()
        .map(|b| bicharacter_to_cocycle(b).unwrap().add(&cob).unwrap())
        .collect()
}

#[test]
fn ec_retractions_agree_on_representatives() {
    for (t, bound) in [
        ("A1", 4),
        ("A2", 3),
        ("B2", 3),
        ("A3", 2),
        ("D4", 3),
        ("D5", 2),
    ] {
        let t = ty(t);
        for seed in [0, 1, 5] {
            for c in shifted_classes(t, seed) {
                let e = make_ec(t, &c, bound).unwrap();
                assert!(
                    verify_cocycle_identity(&e, VerifyMethod::Auto, &q2())
                        .unwrap()
                        .holds(),
                    "{t}"
                );
                let comm = monoid_commutator(&extract_ce(&e).unwrap());
                let b = extend_to_lattice(&comm).unwrap().bicharacter;
                assert_eq!(
                    b.descend_to_pq().unwrap(),
                    cocycle_commutator(&c).unwrap(),
                    "{t} seed {seed}"
                );
            }
        }
    }
}

#[test]
fn raw_operators_of_ec_are_invariant() {
    for (t, bound) in [("A1", 4), ("A2", 2)] {
        let t = ty(t);
        for c in shifted_classes(t, 3) {
            let e = make_ec(t, &c, bound).unwrap();
            let mut cache = ModuleCache::new(t, q2());
            let mut ops = BTreeMap::new();
            for (mu, eta, _) in e.blocks().keys() {
                ops.entry((mu.clone(), eta.clone()))
                    .or_insert_with(|| raw_operator(&e, &mut cache, mu, eta).unwrap());
            }
            let inv = verify_invariance(&mut cache, &ops).unwrap();
            assert!(inv.holds(), "{t}: {inv:?}");
        }
    }
}

#[test]
fn normalization_of_the_parity_class() {
    let t = ty("A1");
    let g = fundamental_group(t).group().clone();
    let parity = Cocycle2::from_fn(g, |x, y| CircleValue::new((x[0] * y[0]) as i64, 2)).unwrap();
    let e = make_ec(t, &parity, 4).unwrap();
    let MonoidWitness::Coboundary { a } = monoid_coboundary_witness(&extract_ce(&e).unwrap())
    else {
        panic!("parity class restricts to a coboundary on A1")
    };
    let n = normalize_cocycle(&e, &a).unwrap();
    assert!(
        n.cocycle.is_identity(),
        "{:?}",
        n.cocycle.first_nontrivial()
    );
    assert!(
        verify_cocycle_identity(&n.cocycle, VerifyMethod::Operator, &q2())
            .unwrap()
            .holds()
    );
}

#[test]
fn normalized_solutions_are_unique_up_to_bound_5() {
    for bound in 2..=5 {
        let s = solve_normalized(bound, true, &q2()).unwrap();
        assert!(s.is_unique(), "bound {bound}: {s:?}");
        assert!(!solve_normalized(bound, false, &q2()).unwrap().is_unique());
    }
}

#[test]
fn group_like_means_a_character_of_pq() {
    let t = ty("A2");
    // t(ω1) = ω, t(ω2) = ω² kills both roots
    let omega = |k| Scalar::from_phase(CircleValue::new(k, 3));
    let chi = CentralElement::character(t, 3, &[omega(1), omega(2)]).unwrap();
    assert!(is_group_like(t, 3, &chi).unwrap().holds());
    let rational = CentralElement::character(
        t,
        3,
        &[
            Scalar::from_rational(&rat(2, 3)).unwrap(),
            Scalar::from_rational(&rat(-5, 1)).unwrap(),
        ],
    )
    .unwrap();
    assert!(!is_group_like(t, 3, &rational).unwrap().holds());
    let generic =
        CentralElement::for_truncation(t, 3, |w| Scalar::from_int(w.coord_sum() + 2).unwrap())
            .unwrap();
    assert!(!is_group_like(t, 3, &generic).unwrap().holds());
}

fn a1_central(values: &[(i64, i64)], bound: i64) -> CentralElement {
    CentralElement::for_truncation(ty("A1"), bound, |w| {
        let (p, q) = values[w.get(0) as usize % values.len()];
        Scalar::from_rational(&rat(p, q)).unwrap()
    })
    .unwrap()
}

fn nonzero() -> impl Strategy<Value = (i64, i64)> {
    (prop_oneof![-9i64..=-1, 1i64..=9], 1i64..=9)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn coboundaries_pass_and_have_trivial_commutator(values in proptest::collection::vec(nonzero(), 1..6)) {
        let bound = 4;
        let a = a1_central(&values, bound);
        let e = coboundary_block(ty("A1"), bound, &a).unwrap();
        let check = verify_cocycle_identity(&e, VerifyMethod::Operator, &q2()).unwrap();
        prop_assert!(check.holds(), "{:?}", check.violation);
        let comm = monoid_commutator(&extract_ce(&e).unwrap());
        prop_assert!(comm.is_trivial());
    }

    #[test]
    fn passing_a1_cocycles_have_roots_in_the_kernel(
        values in proptest::collection::vec(nonzero(), 1..6),
        twist in any::<bool>(),
        perturb in proptest::option::of((1i64..3, 1i64..3, 2i64..5)),
    ) {
        let bound = 4;
        let t = ty("A1");
        let g = fundamental_group(t).group().clone();
        let c = Cocycle2::from_fn(g, |x, y| CircleValue::new(if twist { (x[0] * y[0]) as i64 } else { 0 }, 2)).unwrap();
        let mut e = make_ec(t, &c, bound).unwrap().mul(&coboundary_block(t, bound, &a1_central(&values, bound)).unwrap()).unwrap();
        if let Some((m, h, v)) = perturb {
            let nu = Weight::new(vec![m + h]);
            let old = e.block(&Weight::new(vec![m]), &Weight::new(vec![h]), &nu).unwrap().clone();
            let factor = qcat_core::invariant::Block::scalar(1, Scalar::from_int(v).unwrap());
            e = e.with_block(&Weight::new(vec![m]), &Weight::new(vec![h]), &nu, old.mul(&factor).unwrap()).unwrap();
        }
        let check = verify_cocycle_identity(&e, VerifyMethod::Operator, &q2()).unwrap();
        if check.holds() {
            let comm = monoid_commutator(&extract_ce(&e).unwrap());
            let b = extend_to_lattice(&comm).unwrap().bicharacter;
            prop_assert!(kernel_contains_roots(&b));
        }
    }

    #[test]
    fn block_json_round_trips(values in proptest::collection::vec(nonzero(), 1..6)) {
        let e = coboundary_block(ty("A1"), 4, &a1_central(&values, 4)).unwrap();
        let back = BlockCocycle::from_json_str(&e.to_json().to_string()).unwrap();
        prop_assert_eq!(back, e);
    }

    #[test]
    fn arbitrary_block_json_never_panics(s in "\\PC{0,120}") {
        let _ = BlockCocycle::from_json_str(&s);
        let _ = BlockCocycle::from_json_str(&format!("{{\"type\":\"A1\",\"bound\":2,\"blocks\":{s}}}"));
    }
}

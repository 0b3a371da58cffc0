use std::collections::BTreeMap;

use proptest::prelude::*;
use qcat_core::cohomology::{
    alternating_bicharacters, bicharacter_to_cocycle, cocycle_commutator, Cocycle2,
};
use qcat_core::lattice::{dominant_weights_up_to, fundamental_group, DynkinType, Weight};
use qcat_core::monoid::{
    extend_to_lattice, kernel_contains_roots, monoid_coboundary_witness, monoid_commutator,
    restrict_to_monoid, MonoidCocycle, MonoidWitness,
};
use qcat_core::{CircleValue, Scalar};

fn ty(s: &str) -> DynkinType {
    s.parse().unwrap()
}

/// Every class representative, shifted by a fixed coboundary so the tables
/// are not bicharacters on the nose.
fn cocycles_on_pq(t: DynkinType) -> Vec<Cocycle2> {
    let g = fundamental_group(t).group().clone();
    let n = g.order() as i64;
    let shift: Vec<CircleValue> = (0..n)
        .map(|k| CircleValue::new(3 * k + 1, 2 * n + 1))
        .collect();
    let cob = Cocycle2::coboundary(g.clone(), &shift).unwrap();
    alternating_bicharacters(&g)
        .iter()
        .map(|b| bicharacter_to_cocycle(b).unwrap().add(&cob).unwrap())
        .collect()
}

const CASES: [(&str, i64); 8] = [
    ("A1", 6),
    ("A2", 4),
    ("A3", 3),
    ("B2", 4),
    ("D4", 3),
    ("D5", 2),
    ("D6", 2),
    ("E6", 2),
];

#[test]
fn restricted_commutator_descends_to_the_finite_commutator() {
    for (t, bound) in CASES {
        let t = ty(t);
        let proj = fundamental_group(t);
        for c in cocycles_on_pq(t) {
            let m = restrict_to_monoid(t, &c, bound).unwrap();
            let comm = monoid_commutator(&m);
            let direct = cocycle_commutator(&c).unwrap();
            for ((mu, eta), v) in comm.values() {
                let want = Scalar::from_phase(direct.eval(&proj.project(mu), &proj.project(eta)));
                assert_eq!(*v, want, "{t} at ({mu}, {eta})");
            }
            let ext = extend_to_lattice(&comm).unwrap();
            assert_eq!(ext.bicharacter.descend_to_pq().unwrap(), direct, "{t}");
            assert!(kernel_contains_roots(&ext.bicharacter));
        }
    }
}

#[test]
fn extension_does_not_depend_on_the_representation() {
    // λ = μ − μ' in several ways: b(μ,ν)/b(μ',ν) must be the same each time
    for (t, bound) in [("D4", 3), ("A3", 3), ("B2", 4)] {
        let t = ty(t);
        let ws = dominant_weights_up_to(t.rank(), bound);
        for c in cocycles_on_pq(t) {
            let comm = monoid_commutator(&restrict_to_monoid(t, &c, bound).unwrap());
            let ext = extend_to_lattice(&comm).unwrap().bicharacter;
            let mut seen: BTreeMap<(Weight, Weight), Scalar> = BTreeMap::new();
            for mu in &ws {
                for mu2 in &ws {
                    for nu in &ws {
                        let (Some(a), Some(b)) = (comm.value(mu, nu), comm.value(mu2, nu)) else {
                            continue;
                        };
                        let lambda = mu - mu2;
                        let v = a / b;
                        assert_eq!(
                            v,
                            Scalar::from_phase(ext.eval(&lambda, nu)),
                            "{t} λ = {lambda}"
                        );
                        if let Some(prev) = seen.insert((lambda.clone(), nu.clone()), v.clone()) {
                            assert_eq!(prev, v);
                        }
                    }
                }
            }
        }
    }
}

#[test]
fn nonzero_classes_have_no_monoid_witness() {
    for (t, bound) in CASES {
        let t = ty(t);
        let g = fundamental_group(t).group().clone();
        for (k, b) in alternating_bicharacters(&g).iter().enumerate() {
            let m = restrict_to_monoid(t, &bicharacter_to_cocycle(b).unwrap(), bound).unwrap();
            assert_eq!(
                monoid_coboundary_witness(&m).is_coboundary(),
                k == 0,
                "{t} class {k}"
            );
        }
    }
}

fn check_witness(m: &MonoidCocycle, a: &BTreeMap<Weight, Scalar>) {
    for ((mu, eta), v) in m.values() {
        assert_eq!(
            &(&a[mu] * &a[eta]),
            &(v * &a[&(mu + eta)]),
            "at ({mu}, {eta})"
        );
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn restricted_coboundaries_have_witnesses(
        pick in 0usize..CASES.len(),
        values in proptest::collection::vec((-30i64..30, 1i64..30), 4),
    ) {
        let (t, bound) = CASES[pick];
        let t = ty(t);
        let g = fundamental_group(t).group().clone();
        let a: Vec<CircleValue> = (0..g.order() as usize)
            .map(|k| { let (p, q) = values[k % values.len()]; CircleValue::new(p + k as i64, q) })
            .collect();
        let c = Cocycle2::coboundary(g, &a).unwrap();
        let m = restrict_to_monoid(t, &c, bound).unwrap();
        match monoid_coboundary_witness(&m) {
            MonoidWitness::Coboundary { a } => check_witness(&m, &a),
            MonoidWitness::NotCoboundary { mu, eta, reason } => {
                prop_assert!(false, "{} ({}, {}): {}", t, mu, eta, reason)
            }
        }
    }

    #[test]
    fn rational_coboundaries_on_the_monoid(values in proptest::collection::vec((1i64..20, 1i64..20), 1..40)) {
        let t = ty("A2");
        let bound = 4;
        let ws = dominant_weights_up_to(2, bound);
        let a: BTreeMap<Weight, Scalar> = ws
            .iter()
            .enumerate()
            .map(|(k, w)| {
                let (p, q) = values[k % values.len()];
                (w.clone(), Scalar::from_rational(&num_rational::BigRational::new(p.into(), q.into())).unwrap())
            })
            .collect();
        let m = MonoidCocycle::coboundary(t, bound, &a).unwrap();
        m.check_identity().unwrap();
        match monoid_coboundary_witness(&m) {
            MonoidWitness::Coboundary { a } => check_witness(&m, &a),
            other => prop_assert!(false, "{:?}", other),
        }
        let back = MonoidCocycle::from_json_str(&m.to_json().to_string()).unwrap();
        prop_assert_eq!(back, m);
    }
}

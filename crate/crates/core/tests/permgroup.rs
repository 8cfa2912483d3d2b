mod common;

use common::{closure, gen_set, perm, tree_automorphism};
use num_bigint::BigUint;
use num_traits::One;
use proptest::prelude::*;
use treedim_core::constructions::fixture;
use treedim_core::groups::{self, DEFAULT_NODE_BUDGET};
use treedim_core::{Error, Permutation, Point, StabilizerChain};

fn cyc(n: usize, s: &str) -> Permutation {
    Permutation::from_cycles(n, s).unwrap()
}

#[test]
fn compose_applies_left_factor_first() {
    let p = cyc(3, "(1 2)");
    let q = cyc(3, "(2 3)");
    assert_eq!(p.compose(&q).unwrap().images(), &[2, 0, 1]);
    let id = Permutation::identity(4);
    assert_eq!(id.compose(&id).unwrap(), id);
    assert_eq!(
        p.compose(&Permutation::identity(4)),
        Err(Error::DegreeMismatch {
            expected: 3,
            found: 4
        })
    );
}

#[test]
fn chain_examples() {
    let s3 = StabilizerChain::build(3, &[cyc(3, "(1 2)"), cyc(3, "(2 3)")]).unwrap();
    assert_eq!(s3.order(), BigUint::from(6u32));
    assert!(StabilizerChain::build(5, &[]).unwrap().order().is_one());
    let w2 = fixture("w2").unwrap().quotient(2, 1 << 14).unwrap();
    assert_eq!(w2.order(), BigUint::from(8u32));
    let c3 = StabilizerChain::build(3, &[cyc(3, "(1 2 3)")]).unwrap();
    assert!(!c3.contains(&cyc(3, "(1 2)")).unwrap());
    assert!(c3.contains(&Permutation::identity(3)).unwrap());
    assert!(matches!(
        c3.contains(&Permutation::identity(4)),
        Err(Error::DegreeMismatch { .. })
    ));
}

#[test]
fn odometer_orders_and_orbits() {
    let odo = fixture("odometer").unwrap();
    for n in 1..=10 {
        let chain = odo.quotient(n, 1 << 14).unwrap();
        assert_eq!(chain.order(), BigUint::from(1u32) << n);
        let orbits = groups::orbits(chain.generators(), 0..(1 << n));
        assert_eq!(orbits.len(), 1);
    }
    assert_eq!(groups::orbits(&[], 0..8).len(), 8);
}

#[test]
fn wreath_abelianization_and_stabilizer() {
    let w3 = fixture("w2").unwrap().quotient(3, 1 << 14).unwrap();
    assert_eq!(w3.order(), BigUint::from(128u32));
    let d = groups::derived_subgroup(&w3).unwrap();
    assert_eq!(w3.order() / d.order(), BigUint::from(8u32));
    let w = fixture("w2").unwrap().quotient(2, 1 << 14).unwrap();
    let st = groups::pointwise_stabilizer(&w, &[2, 3]).unwrap();
    assert_eq!(st.order(), BigUint::from(2u32));
    assert!(st.contains(&cyc(4, "(1 2)")).unwrap());
    let all: Vec<Point> = (0..4).collect();
    assert!(groups::pointwise_stabilizer(&w, &all).unwrap().is_trivial());
}

#[test]
fn gk_center_contains_rooted_swap() {
    let g = fixture("gk-w2").unwrap().quotient(2, 1 << 14).unwrap();
    let z = groups::center(&g, DEFAULT_NODE_BUDGET).unwrap();
    assert!(z.order() >= BigUint::from(2u32));
    assert!(z.contains(&cyc(4, "(1 3)(2 4)")).unwrap());
}

#[test]
fn rooted_h_normal_in_gk() {
    for n in 1..=6 {
        let spec = fixture("gk-w2").unwrap();
        let g = spec.quotient(n, 1 << 14).unwrap();
        let h = treedim_core::constructions::rooted_permutation(2, &cyc(2, "(1 2)"), n);
        let sub = StabilizerChain::build(1 << n, &[h]).unwrap();
        assert!(groups::is_normal(&g, &sub).unwrap(), "n = {n}");
    }
}

/// Brute-force center: elements of the closure commuting with every generator.
fn center_oracle(degree: usize, gens: &[Permutation]) -> usize {
    closure(degree, gens)
        .into_iter()
        .map(|v| Permutation::from_images(v).unwrap())
        .filter(|z| gens.iter().all(|g| z.commutes_with(g)))
        .count()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn order_matches_closure((degree, gens) in gen_set(8, 3)) {
        let chain = StabilizerChain::build(degree, &gens).unwrap();
        let elements = closure(degree, &gens);
        prop_assert_eq!(chain.order(), BigUint::from(elements.len()));
        let product: BigUint = chain.transversal_sizes().iter().map(|&s| BigUint::from(s)).product();
        prop_assert_eq!(chain.order(), product);
    }

    #[test]
    fn membership_matches_closure((degree, gens) in gen_set(7, 2), probes in prop::collection::vec(perm(7), 8)) {
        let chain = StabilizerChain::build(degree, &gens).unwrap();
        let elements = closure(degree, &gens);
        prop_assert!(chain.contains(&Permutation::identity(degree)).unwrap());
        for g in chain.strong_generators() {
            prop_assert!(chain.contains(&g).unwrap());
        }
        for p in probes.iter().filter(|p| p.degree() == degree) {
            prop_assert_eq!(chain.contains(p).unwrap(), elements.contains(p.images()));
        }
        for e in elements.iter().take(50) {
            prop_assert!(chain.contains(&Permutation::from_images(e.clone()).unwrap()).unwrap());
        }
    }

    #[test]
    fn inverse_law(p in perm(64)) {
        prop_assert!(p.compose(&p.inverse()).unwrap().is_identity());
        prop_assert!(p.inverse().compose(&p).unwrap().is_identity());
        prop_assert_eq!(p.compose(&Permutation::identity(64)).unwrap(), p.clone());
    }

    #[test]
    fn easy_bound_and_orbit_refinement((degree, gens) in gen_set(8, 3)) {
        let chain = StabilizerChain::build(degree, &gens).unwrap();
        let derived = groups::derived_subgroup(&chain).unwrap();
        let index = chain.order() / derived.order();
        prop_assert!(index <= BigUint::one() << (degree - 1));
        let fine = groups::orbits(derived.generators(), 0..degree as Point);
        let (label, _) = groups::orbit_labels(&gens, degree);
        for orbit in fine {
            prop_assert!(orbit.iter().all(|&x| label[x as usize] == label[orbit[0] as usize]));
        }
    }

    #[test]
    fn center_matches_closure((degree, gens) in gen_set(6, 2)) {
        let chain = StabilizerChain::build(degree, &gens).unwrap();
        let z = groups::center(&chain, DEFAULT_NODE_BUDGET).unwrap();
        prop_assert_eq!(z.order(), BigUint::from(center_oracle(degree, &gens)));
    }

    #[test]
    fn derived_matches_closure((degree, gens) in gen_set(6, 2)) {
        let chain = StabilizerChain::build(degree, &gens).unwrap();
        let elements: Vec<Permutation> = closure(degree, &gens).into_iter().map(|v| Permutation::from_images(v).unwrap()).collect();
        let commutators: std::collections::BTreeSet<Vec<u32>> = elements
            .iter()
            .flat_map(|a| elements.iter().map(move |b| a.commutator(b).images().to_vec()))
            .collect();
        let commutators: Vec<Permutation> = commutators.into_iter().map(|v| Permutation::from_images(v).unwrap()).collect();
        let oracle = closure(degree, &commutators);
        prop_assert_eq!(groups::derived_subgroup(&chain).unwrap().order(), BigUint::from(oracle.len()));
    }

    #[test]
    fn stabilizer_matches_closure((degree, gens) in gen_set(7, 3), fixed in prop::collection::vec(0u32..7, 0..3)) {
        let fixed: Vec<Point> = fixed.into_iter().filter(|&p| (p as usize) < degree).collect();
        let chain = StabilizerChain::build(degree, &gens).unwrap();
        let st = groups::pointwise_stabilizer(&chain, &fixed).unwrap();
        let oracle = closure(degree, &gens).into_iter().filter(|e| fixed.iter().all(|&p| e[p as usize] == p)).count();
        prop_assert_eq!(st.order(), BigUint::from(oracle));
    }

    #[test]
    fn deterministic((degree, gens) in gen_set(8, 3)) {
        let a = StabilizerChain::build(degree, &gens).unwrap();
        let b = StabilizerChain::build(degree, &gens).unwrap();
        prop_assert_eq!(a.base(), b.base());
        prop_assert_eq!(a.transversal_sizes(), b.transversal_sizes());
        prop_assert_eq!(a.strong_generators(), b.strong_generators());
        for k in 0..a.num_levels() {
            prop_assert_eq!(a.transversal(k), b.transversal(k));
        }
    }

    #[test]
    fn tree_groups_satisfy_easy_bound(gens in prop::collection::vec(tree_automorphism(2, 5, false), 1..3)) {
        let chain = StabilizerChain::build(32, &gens).unwrap();
        let derived = groups::derived_subgroup(&chain).unwrap();
        prop_assert!(chain.order() / derived.order() <= BigUint::one() << 31);
    }
}

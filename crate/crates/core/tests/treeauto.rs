use std::sync::Arc;

use proptest::prelude::*;
use treedim_core::constructions::{self, fixture, Construction};
use treedim_core::machine::{self, Element, Machine};
use treedim_core::tree::{self, Vertex};
use treedim_core::Permutation;

const CAP: u64 = 1 << 14;

/// Finite-state fixtures with at least one generator.
fn finite_fixtures() -> Vec<constructions::GroupSpec> {
    constructions::fixtures()
        .into_iter()
        .filter(|s| s.is_finite_state() && !s.generators.is_empty())
        .collect()
}

fn odometer() -> Element {
    fixture("odometer").unwrap().generators[0].clone()
}

#[test]
fn section_examples() {
    let a = odometer();
    let id = Element::identity(a.machine().clone());
    assert!(id
        .section(&Vertex::parse(2, "121").unwrap())
        .unwrap()
        .is_trivial_word());
    assert_eq!(
        a.section(&Vertex::parse(2, "2").unwrap())
            .unwrap()
            .to_string(),
        "a"
    );
    assert!(a
        .section(&Vertex::parse(2, "1").unwrap())
        .unwrap()
        .is_trivial_word());
    let r = fixture("cyclic").unwrap().generators[0].clone();
    for v in ["1", "2", "3", "21", "333"] {
        assert!(r
            .section(&Vertex::parse(3, v).unwrap())
            .unwrap()
            .is_trivial_word());
    }
}

#[test]
fn evaluate_examples() {
    let a = odometer();
    assert!(Element::identity(a.machine().clone())
        .evaluate(5)
        .unwrap()
        .is_identity());
    assert_eq!(a.evaluate(0).unwrap().degree(), 1);
    let p = a.evaluate(2).unwrap();
    assert_eq!(p.images(), &[2, 3, 1, 0]);
    let sigma =
        constructions::rooted_generators(2, &[Permutation::from_cycles(2, "(1 2)").unwrap()])
            .unwrap();
    assert_eq!(sigma[0].evaluate(2).unwrap().images(), &[2, 3, 0, 1]);
    let aa = a.multiply(&a).unwrap();
    for n in 1..=8 {
        let p = a.evaluate(n).unwrap();
        assert_eq!(aa.evaluate(n).unwrap(), p.then(&p));
    }
}

#[test]
fn normalize_examples() {
    let a = odometer();
    let id = Element::identity(a.machine().clone()).normalize().unwrap();
    assert!(id.evaluate(4).unwrap().is_identity());
    let aa = a.multiply(&a).unwrap().normalize().unwrap();
    assert_eq!(aa.machine().len(), 3);
    assert_eq!(aa.word().len(), 1);
    let s = aa.word()[0].state;
    assert!(aa.machine().root(s).is_identity());
    assert_eq!(aa.machine().sections(s), &[1, 1]);
    let grig = fixture("grigorchuk").unwrap();
    let (b, c) = (&grig.generators[1], &grig.generators[2]);
    let (db, dc) = (
        constructions::diagonal(b).unwrap(),
        constructions::diagonal(c).unwrap(),
    );
    let d_bc = constructions::diagonal(&b.multiply(c).unwrap()).unwrap();
    for n in 0..=8 {
        let expect = db.evaluate(n).unwrap().then(&dc.evaluate(n).unwrap());
        assert_eq!(d_bc.normalize().unwrap().evaluate(n).unwrap(), expect);
    }
}

#[test]
fn normalize_state_budget() {
    let m = Arc::new(
        Machine::from_states(
            2,
            vec![Permutation::from_cycles(2, "(1 2)").unwrap()],
            &[(
                "a".into(),
                Permutation::from_cycles(2, "(1 2)").unwrap(),
                vec!["1".into(), "a".into()],
            )],
        )
        .unwrap(),
    );
    let word = Element::parse(m, "a*a*a*a*a*a*a").unwrap();
    assert!(matches!(
        word.normalize_with_budget(2),
        Err(treedim_core::Error::StateExplosion { .. })
    ));
}

#[test]
fn self_similarity_examples() {
    for n in 0..=6 {
        assert!(
            machine::self_similarity_check(&fixture("odometer").unwrap().generators, n, CAP)
                .unwrap()
                .passed()
        );
        assert!(
            machine::self_similarity_check(&fixture("grigorchuk").unwrap().generators, n, CAP)
                .unwrap()
                .passed()
        );
    }
    let gk = fixture("gk-odometer").unwrap();
    let report = machine::self_similarity_check(&gk.generators, 4, CAP).unwrap();
    assert!(!report.passed());
    assert!(report.failures.iter().all(|f| f.vertex.level() >= 1));
}

#[test]
fn homomorphism_and_inverse_on_fixtures() {
    for spec in finite_fixtures() {
        for g in &spec.generators {
            for h in &spec.generators {
                let gh = g.multiply(h).unwrap();
                for n in 0..=8usize {
                    if (spec.m as u64).pow(n as u32) > 4096 {
                        break;
                    }
                    let (pg, ph) = (g.evaluate(n).unwrap(), h.evaluate(n).unwrap());
                    assert_eq!(
                        gh.evaluate(n).unwrap(),
                        pg.compose(&ph).unwrap(),
                        "{}",
                        spec.name
                    );
                    assert!(g
                        .multiply(&g.inverse())
                        .unwrap()
                        .evaluate(n)
                        .unwrap()
                        .is_identity());
                    let id = Element::identity(g.machine().clone());
                    assert_eq!(id.multiply(h).unwrap().evaluate(n).unwrap(), ph);
                }
            }
        }
    }
}

/// Words over the generators of a fixture, as strings.
fn word(names: Vec<String>) -> impl Strategy<Value = String> {
    prop::collection::vec((prop::sample::select(names), any::<bool>()), 0..6).prop_map(|letters| {
        let parts: Vec<String> = letters
            .into_iter()
            .map(|(s, inv)| if inv { format!("{s}^-1") } else { s })
            .collect();
        parts.join("*")
    })
}

fn fixture_word() -> impl Strategy<Value = (String, String)> {
    prop::sample::select(vec![
        "odometer",
        "odometer3",
        "grigorchuk",
        "cyclic",
        "gk-grigorchuk",
        "gk-s3-odometer3",
    ])
    .prop_flat_map(|name| {
        let spec = fixture(name).unwrap();
        let names: Vec<String> = spec.generators.iter().map(|g| g.to_string()).collect();
        (Just(name.to_string()), word(names))
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn normalize_preserves_evaluation((name, w) in fixture_word()) {
        let spec = fixture(&name).unwrap();
        let e = Element::parse(spec.machine.clone(), &w).unwrap();
        let normal = e.normalize().unwrap();
        for n in 0..=8usize {
            if (spec.m as u64).pow(n as u32) > 6561 {
                break;
            }
            prop_assert_eq!(normal.evaluate(n).unwrap(), e.evaluate(n).unwrap());
        }
    }

    #[test]
    fn section_cocycle((name, w) in fixture_word(), k in 0usize..3, extra in 0usize..4) {
        let spec = fixture(&name).unwrap();
        let e = Element::parse(spec.machine.clone(), &w).unwrap();
        let n = k + extra;
        let full = e.evaluate(n).unwrap();
        for v in tree::level_vertices(spec.m, k, CAP).unwrap() {
            let block = v.leaf_block(n).unwrap();
            let target = e.image(&v).unwrap().leaf_block(n).unwrap();
            let local: Vec<u32> = block.clone().map(|x| (full.apply(x as u32) as u64 - target.start) as u32).collect();
            prop_assert!(local.iter().all(|&y| (y as u64) < block.end - block.start));
            let section = e.section(&v).unwrap().evaluate(n - k).unwrap();
            prop_assert_eq!(section.images(), &local[..]);
        }
    }

    #[test]
    fn evaluation_restricts_to_lower_levels((name, w) in fixture_word(), n in 1usize..6) {
        let spec = fixture(&name).unwrap();
        let e = Element::parse(spec.machine.clone(), &w).unwrap();
        let full = e.evaluate(n).unwrap();
        for k in 0..n {
            let width = spec.m.pow((n - k) as u32) as u32;
            let top = e.evaluate(k).unwrap();
            for b in 0..spec.m.pow(k as u32) as u32 {
                prop_assert_eq!(full.apply(b * width) / width, top.apply(b));
            }
        }
    }

    #[test]
    fn diagonal_is_multiplicative((name, w1) in fixture_word(), w2 in Just(String::new())) {
        let spec = fixture(&name).unwrap();
        prop_assume!(matches!(spec.construction, Construction::Plain | Construction::Rooted));
        let g = Element::parse(spec.machine.clone(), &w1).unwrap();
        let h = spec.generators.first().cloned().unwrap_or_else(|| Element::parse(spec.machine.clone(), &w2).unwrap());
        let d = constructions::diagonal(&g.multiply(&h).unwrap()).unwrap();
        let (dg, dh) = (constructions::diagonal(&g).unwrap(), constructions::diagonal(&h).unwrap());
        for n in 0..=6usize {
            let expect = dg.evaluate(n).unwrap().then(&dh.evaluate(n).unwrap());
            prop_assert_eq!(d.evaluate(n).unwrap(), expect);
        }
    }
}

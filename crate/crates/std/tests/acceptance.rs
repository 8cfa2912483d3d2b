//! Acceptance suite: one PASS/FAIL line per criterion.

use std::panic::{self, AssertUnwindSafe};
use std::process::ExitCode;
use std::time::Instant;

use num_bigint::BigUint;
use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use treedim_core::analysis::{self, block_orbits};
use treedim_core::constructions::{self, fixture, fixtures, Construction};
use treedim_core::groups::{self, DEFAULT_NODE_BUDGET};
use treedim_core::tree::{self, Vertex};
use treedim_core::{Permutation, Point, StabilizerChain};

const CAP: u64 = 1 << 14;
const TOL: f64 = 0.02;

type Verdict = Result<String, String>;
type Criterion = (&'static str, fn() -> Verdict);

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn pow(base: u32, exp: usize) -> BigUint {
    BigUint::from(base).pow(exp as u32)
}

fn closure_size(degree: usize, gens: &[Permutation]) -> usize {
    let id = Permutation::identity(degree);
    let mut seen = std::collections::HashSet::from([id.images().to_vec()]);
    let mut queue = std::collections::VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.then(g);
            if seen.insert(y.images().to_vec()) {
                queue.push_back(y);
            }
        }
    }
    seen.len()
}

fn seeded(cases: u32, seed: u8) -> TestRunner {
    TestRunner::new_with_rng(
        Config {
            cases,
            failure_persistence: None,
            ..Config::default()
        },
        TestRng::from_seed(RngAlgorithm::ChaCha, &[seed; 32]),
    )
}

fn wreath_orders() -> Verdict {
    let start = Instant::now();
    for (name, max) in [("w2", 12), ("w3c", 8), ("w3s", 7)] {
        let spec = fixture(name).unwrap();
        for n in 0..=max {
            let order = spec.quotient(n, CAP).map_err(|e| e.to_string())?.order();
            let vertices = (spec.m.pow(n as u32) - 1) / (spec.m - 1);
            let formula = spec.top_order().pow(vertices as u32);
            ensure(order == formula, || {
                format!("{name} n = {n}: {order} != {formula}")
            })?;
            if n <= 2 {
                let closure = closure_size(spec.m.pow(n as u32), &spec.realize(n, CAP).unwrap());
                ensure(BigUint::from(closure) == order, || {
                    format!("{name} n = {n}: closure {closure}")
                })?;
            }
        }
    }
    let secs = start.elapsed().as_secs_f64();
    ensure(secs < 60.0, || format!("took {secs:.1} s"))?;
    Ok(format!(
        "W_2 n<=12, C3 n<=8, Sym3 n<=7 exact; closure n<=2; {secs:.1} s"
    ))
}

fn gk_index_law() -> Verdict {
    let mut checked = 0;
    for spec in fixtures() {
        let Construction::GK { h, k } = &spec.construction else {
            continue;
        };
        let top = StabilizerChain::build(spec.m, h).unwrap().order();
        for n in 2..=8 {
            let g = spec
                .quotient(n, CAP)
                .map_err(|e| format!("{} n = {n}: {e}", spec.name))?
                .order();
            let kk = k.quotient(n - 1, CAP).unwrap().order();
            ensure(g == &top * &kk, || {
                format!("{} n = {n}: {g} != {top} * {kk}", spec.name)
            })?;
            checked += 1;
        }
    }
    let seq = analysis::dimension_sequence(&fixture("gk-w2").unwrap(), 10, CAP, TOL).unwrap();
    let r = &seq.records[9];
    ensure(r.ratio_exact == Some((512, 1023)), || {
        format!("ratio_10 = {:?}", r.ratio_exact)
    })?;
    ensure((r.ratio - 512.0 / 1023.0).abs() < 1e-12, || {
        format!("ratio_10 = {}", r.ratio)
    })?;
    let gaps: Vec<f64> = seq.records.iter().map(|r| (r.ratio - 0.5).abs()).collect();
    ensure(gaps.windows(2).skip(1).all(|w| w[1] <= w[0]), || {
        format!("no trend: {gaps:?}")
    })?;
    Ok(format!(
        "{checked} (K, n) pairs exact; ratio_10 = 512/1023 = {:.12}",
        r.ratio
    ))
}

fn counterexample() -> Verdict {
    let spec = fixture("gk-w2").unwrap();
    let Construction::GK { h, k } = &spec.construction else {
        unreachable!()
    };
    for n in 1..=8 {
        let gens = spec.realize(n, CAP).unwrap();
        let t = analysis::transitivity_of(&gens, 2, n);
        ensure(t.iter().all(|&x| x), || {
            format!("not level-transitive at n = {n}: {t:?}")
        })?;
        let chain = spec.quotient(n, CAP).unwrap();
        let rooted: Vec<Permutation> = h
            .iter()
            .map(|g| constructions::rooted_permutation(2, g, n))
            .collect();
        let sub = StabilizerChain::build(1 << n, &rooted).unwrap();
        ensure(groups::is_normal(&chain, &sub).unwrap(), || {
            format!("rooted H not normal at n = {n}")
        })?;
        for d in k.realize(n - 1, CAP).unwrap() {
            let d = constructions::diagonal_permutation(2, &d);
            for r in &rooted {
                ensure(r.commutator(&d).is_identity(), || {
                    format!("[h, d(k)] != 1 at n = {n}")
                })?;
            }
        }
        for v in ["1", "2"] {
            let v = Vertex::parse(2, v).unwrap();
            let o = analysis::local_rigid_of(&gens, &v, n).unwrap().order;
            ensure(o == BigUint::from(1u32), || {
                format!("rist({v}) has order {o} at n = {n}")
            })?;
        }
    }
    let report = analysis::verify_gk(h, k, 8, CAP, DEFAULT_NODE_BUDGET).unwrap();
    for level in &report.levels {
        let center = level.checks.iter().find(|c| c.name == "center").unwrap();
        ensure(center.passed, || {
            format!(
                "center identity fails at n = {}: {:?}",
                level.level, center.witness
            )
        })?;
    }
    ensure(report.passed(), || {
        format!("{:?}", report.failures().collect::<Vec<_>>())
    })?;
    Ok("transitive, H normal and commuting, rist(1) = rist(2) = 1, center identity, n <= 8".into())
}

fn perfectness() -> Verdict {
    let mut violations = Vec::new();
    let mut notes = Vec::new();
    for name in ["w2", "grigorchuk"] {
        let spec = fixture(name).unwrap();
        for k in 1..=3 {
            let scan = analysis::perfectness_scan(&spec, 10, k, CAP).unwrap();
            for r in scan.rows.iter().filter(|r| !r.bound_holds) {
                let (num, den) = r.value_exact.clone().unwrap();
                violations.push(format!(
                    "{name} k={k} n={}: {num}/{den} > {} (#B_n = {})",
                    r.level, r.bound, r.b
                ));
            }
            ensure(scan.decreasing_from(3), || {
                format!("{name}: not decreasing from n = 3")
            })?;
        }
        let scan = analysis::perfectness_scan(&spec, 10, 1, CAP).unwrap();
        let last = scan.rows.last().unwrap().value_exact.clone().unwrap();
        notes.push(format!("{name} n=10: {}/{}", last.0, last.1));
        if name == "w2" {
            ensure(
                last.0 * BigUint::from(1024u32) == last.1 * BigUint::from(10u32),
                || format!("W_2 value at n = 10 is not 10/1024: {notes:?}"),
            )?;
        }
    }
    if violations.is_empty() {
        Ok(format!(
            "bounded for k = 1..3, decreasing from n = 3; {}",
            notes.join(", ")
        ))
    } else {
        Err(format!(
            "decreasing from n = 3 and {}, but the bound fails: {}",
            notes.join(", "),
            violations.join("; ")
        ))
    }
}

fn easy_bound() -> Verdict {
    let mut quotients = 0;
    for spec in fixtures() {
        let max = if spec.m == 2 { 10 } else { 6 };
        for n in 0..=max {
            let r = analysis::abelianization_index(&spec, n, CAP).unwrap();
            let limit = BigUint::from(1u32) << (spec.m.pow(n as u32) - 1);
            ensure(r.index <= limit && r.easy_bound_holds, || {
                format!("{} n = {n}", spec.name)
            })?;
            quotients += 1;
        }
    }
    let shapes = prop_oneof![
        (Just(2usize), 1usize..=8),
        (Just(3usize), 1usize..=5),
        (Just(4usize), 1usize..=4),
    ];
    let strategy = shapes.prop_flat_map(|(m, n)| {
        let gens = prop::collection::vec(common::tree_automorphism(m, n), 1..=3);
        (Just(m), Just(n), gens)
    });
    let mut runner = seeded(100, 5);
    let random = std::cell::Cell::new(0);
    runner
        .run(&strategy, |(m, n, gens)| {
            let degree = m.pow(n as u32);
            let chain =
                StabilizerChain::build_with_base(degree, &gens, &tree::tree_base(m, n)).unwrap();
            let r = analysis::abelianization_of(&chain, n, m).unwrap();
            prop_assert!(r.index <= BigUint::from(1u32) << (degree - 1));
            prop_assert!(r.easy_bound_holds);
            random.set(random.get() + 1);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{quotients} corpus quotients, {} random generator sets",
        random.get()
    ))
}

fn orbit_bookkeeping() -> Verdict {
    let mut checked = 0;
    for spec in fixtures() {
        let max = if spec.m == 2 { 10 } else { 8 };
        let mut density = (1u64, 1u64);
        for n in 0..=max {
            let gens = spec.realize(n, CAP).unwrap();
            let degree = spec.m.pow(n as u32);
            let orbits = groups::orbits(&gens, 0..degree as Point);
            let d = (orbits.len() as u64, degree as u64);
            ensure(d.0 * density.1 <= density.0 * d.1, || {
                format!("{}: density rises at n = {n}", spec.name)
            })?;
            density = d;
            for k in 1..=n.min(3) {
                let span = spec.m.pow(k as u32);
                let ancestors = block_orbits(&gens, degree, span);
                let mut label = vec![0usize; degree / span];
                for (i, o) in ancestors.iter().enumerate() {
                    for &b in o {
                        label[b as usize] = i;
                    }
                }
                let mut branching = vec![0usize; ancestors.len()];
                for o in &orbits {
                    branching[label[o[0] as usize / span]] += 1;
                }
                let a: usize = branching.iter().filter(|&&b| b == span).sum();
                let b: usize = branching.iter().filter(|&&b| b < span).sum();
                ensure(a + 2 * b <= span * ancestors.len(), || {
                    format!(
                        "{} n = {n} k = {k}: {a} + 2*{b} > {span} * {}",
                        spec.name,
                        ancestors.len()
                    )
                })?;
                if spec.name == "trivial" {
                    ensure(a == orbits.len() && orbits.len() == degree, || {
                        format!("trivial n = {n}")
                    })?;
                }
                checked += 1;
            }
        }
    }
    Ok(format!(
        "{checked} (group, n, k) cases; m = 2 to n = 10, m = 3 to n = 8"
    ))
}

fn rigid() -> Verdict {
    let w2 = fixture("w2").unwrap();
    let v = Vertex::parse(2, "1").unwrap();
    for n in 2..=8 {
        let o = analysis::local_rigid(&w2, &v, n, CAP).unwrap().order;
        let expect = BigUint::from(1u32) << ((1usize << (n - 1)) - 1);
        ensure(o == expect, || format!("W_2 rist(1) at n = {n}: {o}"))?;
    }
    let mut products = 0;
    for spec in fixtures() {
        let max = if spec.m == 2 { 6 } else { 4 };
        for n in 1..=max {
            for k in 0..=n.min(3) {
                let r = analysis::rigid_level(&spec, k, n, CAP).unwrap();
                ensure(r.product_holds(), || {
                    format!("{} k = {k} n = {n}", spec.name)
                })?;
                products += 1;
            }
        }
    }
    let grig = fixture("grigorchuk").unwrap();
    let mut ratios = Vec::new();
    for k in 1..=3 {
        let r = analysis::rigid_level(&grig, k, 8, CAP).unwrap();
        ensure(
            r.entries.iter().all(|e| e.order > BigUint::from(1u32)),
            || format!("trivial rist at level {k}"),
        )?;
        let floor = 0.5f64.powi(k as i32) - 0.1;
        ensure(r.ratio >= floor, || {
            format!("level {k} ratio {} < {floor}", r.ratio)
        })?;
        ratios.push(format!("{:.4}", r.ratio));
    }
    Ok(format!(
        "W_2 rist orders exact, {products} product identities, Grigorchuk n=8 ratios {}",
        ratios.join("/")
    ))
}

fn grigorchuk_dimension() -> Verdict {
    let seq = analysis::dimension_sequence(&fixture("grigorchuk").unwrap(), 12, CAP, TOL).unwrap();
    for r in &seq.records {
        let n = r.level;
        let log = if n >= 3 {
            5 * (1usize << (n - 3)) + 2
        } else {
            (1 << n) - 1
        };
        ensure(r.order == pow(2, log), || {
            format!("n = {n}: order {}", r.order)
        })?;
        let exact = treedim_core::order::reduce(log as u64, (1u64 << n) - 1);
        ensure(r.ratio_exact == Some(exact), || {
            format!("n = {n}: ratio {:?}", r.ratio_exact)
        })?;
    }
    let last = seq.records.last().unwrap().ratio;
    ensure((0.61..=0.64).contains(&last), || {
        format!("ratio_12 = {last}")
    })?;
    let osc = seq.max_oscillation.unwrap();
    ensure(seq.strong_looking() && osc < TOL, || {
        format!("oscillation {osc}")
    })?;
    Ok(format!(
        "orders 2^(5*2^(n-3)+2) to n = 12; ratio_12 = {last:.6}; oscillation {osc:.6}"
    ))
}

fn oracles() -> Verdict {
    let mut runner = seeded(200, 9);
    let strategy = (1usize..=8).prop_flat_map(|d| {
        let perm = Just((0..d as u32).collect::<Vec<_>>())
            .prop_shuffle()
            .prop_map(|v| Permutation::from_images(v).unwrap());
        (Just(d), prop::collection::vec(perm.clone(), 0..=3), perm)
    });
    let sampled = std::cell::Cell::new(0);
    runner
        .run(&strategy, |(d, gens, probe)| {
            let chain = StabilizerChain::build(d, &gens).unwrap();
            let id = Permutation::identity(d);
            let mut elements = std::collections::HashSet::from([id.images().to_vec()]);
            let mut queue = vec![id];
            while let Some(x) = queue.pop() {
                for g in &gens {
                    let y = x.then(g);
                    if elements.insert(y.images().to_vec()) {
                        queue.push(y);
                    }
                }
            }
            prop_assert_eq!(chain.order(), BigUint::from(elements.len()));
            prop_assert_eq!(
                chain.contains(&probe).unwrap(),
                elements.contains(probe.images())
            );
            sampled.set(sampled.get() + 1);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    let mut quotients = 0;
    for spec in fixtures() {
        for n in 0..=3 {
            let order = spec.quotient(n, CAP).unwrap().order();
            if order > BigUint::from(200_000u32) {
                continue;
            }
            let closure = closure_size(spec.m.pow(n as u32), &spec.realize(n, CAP).unwrap());
            ensure(BigUint::from(closure) == order, || {
                format!("{} n = {n}", spec.name)
            })?;
            quotients += 1;
        }
    }
    Ok(format!(
        "{} random groups on <= 8 points, {quotients} depth <= 3 quotients agree",
        sampled.get()
    ))
}

mod common {
    use proptest::prelude::*;
    use treedim_core::Permutation;

    /// A random automorphism of the depth-`n` tree, from a random portrait.
    pub fn tree_automorphism(m: usize, n: usize) -> impl Strategy<Value = Permutation> {
        let local = Just((0..m as u32).collect::<Vec<_>>()).prop_shuffle();
        let levels: Vec<_> = (0..n)
            .map(|j| prop::collection::vec(local.clone(), m.pow(j as u32)))
            .collect();
        levels.prop_map(move |portrait: Vec<Vec<Vec<u32>>>| {
            let images = (0..m.pow(n as u32))
                .map(|x| {
                    let (mut vertex, mut image) = (0, 0);
                    for (level, local) in portrait.iter().enumerate() {
                        let d = x / m.pow((n - 1 - level) as u32) % m;
                        image = image * m + local[vertex][d] as usize;
                        vertex = vertex * m + d;
                    }
                    image as u32
                })
                .collect();
            Permutation::from_images(images).unwrap()
        })
    }
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("wreath orders", wreath_orders),
        ("G_K index law", gk_index_law),
        ("counterexample package", counterexample),
        ("perfectness trend", perfectness),
        ("easy bound", easy_bound),
        ("orbit bookkeeping", orbit_bookkeeping),
        ("rigid stabilizers", rigid),
        ("Grigorchuk dimension trend", grigorchuk_dimension),
        ("oracle agreement", oracles),
    ];
    let filter: Vec<String> = std::env::args()
        .skip(1)
        .filter(|a| !a.starts_with('-'))
        .collect();
    let mut failed = 0;
    panic::set_hook(Box::new(|_| {}));
    for (i, (name, check)) in criteria.iter().enumerate() {
        let label = format!("{} {name}", i + 1);
        if !filter.is_empty() && !filter.iter().any(|f| label.contains(f.as_str())) {
            continue;
        }
        let start = Instant::now();
        let verdict = panic::catch_unwind(AssertUnwindSafe(check)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        let secs = start.elapsed().as_secs_f64();
        match verdict {
            Ok(detail) => println!("[acceptance] {label}: PASS ({detail}) [{secs:.1} s]"),
            Err(detail) => {
                failed += 1;
                println!("[acceptance] {label}: FAIL ({detail}) [{secs:.1} s]");
            }
        }
    }
    if failed > 0 {
        println!("[acceptance] {failed} criterion(s) failed");
        ExitCode::FAILURE
    } else {
        ExitCode::SUCCESS
    }
}

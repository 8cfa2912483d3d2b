#![allow(dead_code)]

use std::collections::{BTreeSet, VecDeque};

use proptest::prelude::*;
use treedim_core::Permutation;

/// Every element of `⟨gens⟩`, by breadth-first closure.
pub fn closure(degree: usize, gens: &[Permutation]) -> BTreeSet<Vec<u32>> {
    let id = Permutation::identity(degree);
    let mut seen = BTreeSet::from([id.images().to_vec()]);
    let mut queue = VecDeque::from([id]);
    while let Some(x) = queue.pop_front() {
        for g in gens {
            let y = x.then(g);
            if seen.insert(y.images().to_vec()) {
                queue.push_back(y);
            }
        }
    }
    seen
}

pub fn perm(degree: usize) -> impl Strategy<Value = Permutation> {
    Just((0..degree as u32).collect::<Vec<_>>())
        .prop_shuffle()
        .prop_map(|v| Permutation::from_images(v).unwrap())
}

pub fn gen_set(
    max_degree: usize,
    max_gens: usize,
) -> impl Strategy<Value = (usize, Vec<Permutation>)> {
    (1..=max_degree).prop_flat_map(move |d| (Just(d), prop::collection::vec(perm(d), 0..=max_gens)))
}

/// A tree automorphism of the depth-`n` `m`-ary tree from its portrait: one
/// permutation of `{0..m}` per vertex above the leaves, in index order by level.
pub fn from_portrait(m: usize, n: usize, portrait: &[Vec<Vec<u32>>]) -> Permutation {
    let leaves = m.pow(n as u32);
    let images = (0..leaves)
        .map(|x| {
            let mut digits = Vec::with_capacity(n);
            let mut rest = x;
            for _ in 0..n {
                digits.push(rest % m);
                rest /= m;
            }
            digits.reverse();
            let mut vertex = 0;
            let mut image = 0;
            for (level, &d) in digits.iter().enumerate() {
                image = image * m + portrait[level][vertex][d] as usize;
                vertex = vertex * m + d;
            }
            image as u32
        })
        .collect();
    Permutation::from_images(images).unwrap()
}

/// Random tree automorphisms with local actions drawn from `Sym(m)`, or from
/// the identity and one fixed transposition when `sparse` is set.
pub fn tree_automorphism(m: usize, n: usize, sparse: bool) -> impl Strategy<Value = Permutation> {
    let local = move || -> BoxedStrategy<Vec<u32>> {
        if sparse {
            prop_oneof![
                3 => Just((0..m as u32).collect::<Vec<_>>()),
                1 => Just({
                    let mut v: Vec<u32> = (0..m as u32).collect();
                    v.swap(0, 1);
                    v
                }),
            ]
            .boxed()
        } else {
            Just((0..m as u32).collect::<Vec<_>>())
                .prop_shuffle()
                .boxed()
        }
    };
    let levels: Vec<_> = (0..n)
        .map(|j| prop::collection::vec(local(), m.pow(j as u32)))
        .collect();
    levels.prop_map(move |p| from_portrait(m, n, &p))
}

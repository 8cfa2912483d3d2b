//! Group-theoretic operations on top of [`StabilizerChain`].

use alloc::collections::{BTreeSet, VecDeque};
use alloc::vec::Vec;
use core::ops::Range;

use crate::chain::{BaseItem, StabilizerChain};
use crate::error::{Error, Result};
use crate::perm::{Permutation, Point};

/// Default node budget for the center and stabilizer searches.
pub const DEFAULT_NODE_BUDGET: u64 = 10_000_000;

/// Orbits of `⟨generators⟩` on `points`, each sorted, listed by minimum element.
/// The points are assumed to form an invariant set.
pub fn orbits(generators: &[Permutation], points: Range<Point>) -> Vec<Vec<Point>> {
    let lo = points.start;
    let mut seen = alloc::vec![false; (points.end - points.start) as usize];
    let mut out = Vec::new();
    for start in points {
        if seen[(start - lo) as usize] {
            continue;
        }
        seen[(start - lo) as usize] = true;
        let mut orbit = alloc::vec![start];
        let mut i = 0;
        while i < orbit.len() {
            let x = orbit[i];
            for g in generators {
                let y = g.apply(x);
                let slot = &mut seen[(y - lo) as usize];
                if !*slot {
                    *slot = true;
                    orbit.push(y);
                }
            }
            i += 1;
        }
        orbit.sort_unstable();
        out.push(orbit);
    }
    out
}

/// Orbit label of every point in `0..degree` (labels follow [`orbits`] order).
pub fn orbit_labels(generators: &[Permutation], degree: usize) -> (Vec<usize>, usize) {
    let mut label = alloc::vec![usize::MAX; degree];
    let all = orbits(generators, 0..degree as Point);
    for (i, orbit) in all.iter().enumerate() {
        for &x in orbit {
            label[x as usize] = i;
        }
    }
    (label, all.len())
}

/// Extends `closure` to the normal closure of itself under conjugation by
/// `generators`, starting from the candidate elements `seeds`.
fn normal_closure_into(
    closure: &mut StabilizerChain,
    generators: &[Permutation],
    seeds: impl IntoIterator<Item = Permutation>,
) -> Result<()> {
    let mut queue = VecDeque::new();
    for s in seeds {
        if closure.add_generator(&s)? {
            queue.push_back(s);
        }
    }
    while let Some(x) = queue.pop_front() {
        for g in generators {
            let y = x.conjugate_by(g);
            if closure.add_generator(&y)? {
                queue.push_back(y);
            }
        }
    }
    Ok(())
}

/// Normal closure of `seeds` in the group of `chain`, sharing its base.
pub fn normal_closure(chain: &StabilizerChain, seeds: &[Permutation]) -> Result<StabilizerChain> {
    let mut closure = StabilizerChain::trivial_with_base(chain.degree(), &chain.base());
    normal_closure_into(&mut closure, chain.generators(), seeds.iter().cloned())?;
    Ok(closure)
}

/// The derived subgroup: normal closure of the commutators of the generators.
pub fn derived_subgroup(chain: &StabilizerChain) -> Result<StabilizerChain> {
    let gens = chain.generators();
    let mut commutators = Vec::new();
    for (i, a) in gens.iter().enumerate() {
        for b in &gens[i + 1..] {
            if !a.commutes_with(b) {
                commutators.push(a.commutator(b));
            }
        }
    }
    normal_closure(chain, &commutators)
}

/// Pointwise stabilizer of `points`: rebuilds the chain with the points as
/// leading base items and returns the tail below them.
pub fn pointwise_stabilizer(chain: &StabilizerChain, points: &[Point]) -> Result<StabilizerChain> {
    let mut items: Vec<BaseItem> = Vec::new();
    let mut seen = BTreeSet::new();
    for &p in points {
        if p as usize >= chain.degree() {
            return Err(Error::DegreeMismatch {
                expected: chain.degree(),
                found: p as usize + 1,
            });
        }
        if seen.insert(p) {
            items.push(BaseItem::point(p));
        }
    }
    stabilizer_of_items(chain, &items)
}

/// Pointwise stabilizer of a list of base items (blocks the group acts on).
pub fn stabilizer_of_items(chain: &StabilizerChain, items: &[BaseItem]) -> Result<StabilizerChain> {
    let cut = items.len();
    let mut base = items.to_vec();
    base.extend(chain.base());
    let rebuilt =
        StabilizerChain::build_with_base(chain.degree(), &chain.strong_generators(), &base)?;
    Ok(rebuilt.tail(cut))
}

/// Whether `sub` is normal in `group`. Every generator of `sub` must lie in `group`.
pub fn is_normal(group: &StabilizerChain, sub: &StabilizerChain) -> Result<bool> {
    for (index, n) in sub.generators().iter().enumerate() {
        if !group.contains(n)? {
            return Err(Error::NotSubgroup { index });
        }
    }
    for n in sub.generators() {
        for g in group.generators() {
            if !sub.contains(&n.conjugate_by(g))? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

struct Budget {
    used: u64,
    limit: u64,
}

impl Budget {
    fn spend(&mut self, n: u64) -> Result<()> {
        self.used += n;
        if self.used > self.limit {
            return Err(Error::ResourceLimit {
                what: "search nodes",
                limit: self.limit,
            });
        }
        Ok(())
    }
}

/// Elements of `Sym(orbit)` commuting with the generators on a transitive
/// orbit. Each is determined by the image of the orbit's first point.
fn orbit_centralizer(
    generators: &[Permutation],
    orbit: &[Point],
    degree: usize,
    budget: &mut Budget,
) -> Result<Vec<Permutation>> {
    const UNSET: Point = Point::MAX;
    let root = orbit[0];
    let mut found = Vec::new();
    let mut z = alloc::vec![UNSET; degree];
    'candidate: for &c in &orbit[1..] {
        for &x in orbit {
            z[x as usize] = UNSET;
        }
        z[root as usize] = c;
        let mut queue = alloc::vec![root];
        let mut i = 0;
        while i < queue.len() {
            let x = queue[i];
            i += 1;
            budget.spend(1)?;
            let zx = z[x as usize];
            for g in generators {
                let (y, zy) = (g.apply(x), g.apply(zx));
                match z[y as usize] {
                    UNSET => {
                        z[y as usize] = zy;
                        queue.push(y);
                    }
                    w if w == zy => {}
                    _ => continue 'candidate,
                }
            }
        }
        let mut images: Vec<Point> = (0..degree as Point).collect();
        for &x in orbit {
            images[x as usize] = z[x as usize];
        }
        found.push(Permutation::from_images(images)?);
    }
    Ok(found)
}

/// The center `Z(G) = {z ∈ G : z g = g z for all generators g}`.
///
/// Candidates are generated orbit by orbit: on a transitive orbit a
/// centralizing permutation is fixed by the image of one point, and
/// propagating that image along the generators either closes consistently or
/// is rejected. The product `P` of these orbit centralizers contains `Z(G)`,
/// and `G ∩ P` is read off as the stabilizer of the second copy in
/// `⟨(g, g), (1, p)⟩` acting on two copies of the points.
pub fn center(chain: &StabilizerChain, budget: u64) -> Result<StabilizerChain> {
    let degree = chain.degree();
    let gens = chain.generators();
    let mut budget = Budget {
        used: 0,
        limit: budget,
    };
    let mut centralizing = Vec::new();
    for orbit in orbits(gens, 0..degree as Point) {
        if orbit.len() > 1 {
            centralizing.extend(orbit_centralizer(gens, &orbit, degree, &mut budget)?);
        }
    }
    let base = chain.base();
    if centralizing.is_empty() {
        return Ok(StabilizerChain::trivial_with_base(degree, &base));
    }
    let id = Permutation::identity(degree);
    let mut doubled: Vec<Permutation> = gens.iter().map(|g| g.direct_sum(g)).collect();
    doubled.extend(centralizing.iter().map(|p| id.direct_sum(p)));
    let shift = degree as Point;
    let mut items: Vec<BaseItem> = (0..shift).map(|p| BaseItem::point(p + shift)).collect();
    items.extend(base.iter().copied());
    let pair = StabilizerChain::build_with_base(2 * degree, &doubled, &items)?;
    budget.spend(pair.num_levels() as u64)?;
    let mut z = StabilizerChain::trivial_with_base(degree, &base);
    for g in pair.stabilizer_generators(degree) {
        let first = Permutation::from_images(g.images()[..degree].to_vec())?;
        z.add_generator(&first)?;
    }
    Ok(z)
}

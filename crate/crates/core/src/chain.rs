//! Stabilizer chains built by deterministic incremental Schreier–Sims.
//!
//! Level `k` stores a set of generators `T_k` for `Γ_k`, the pointwise
//! stabilizer of the first `k` base items, and a transversal of `Γ_k` over
//! `Γ_{k+1}`. The chain is closed when for every coset representative `σ` and
//! every `t ∈ T_k` the product `σ t` lies in `Σ_k Γ_{k+1}`; Schreier's lemma then
//! gives `Γ_{k+1} = Stab_{Γ_k}(b_k)`. Only the generators introduced at a level
//! take part in its closure, which keeps deep chains cheap.
//!
//! Base items are aligned blocks of points. A size-one block is an ordinary
//! base point; larger blocks are only valid for groups preserving the block
//! system (tree automorphisms acting on leaves, blocks being vertices).

use alloc::collections::BTreeMap;
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::One;

use crate::error::{Error, Result};
use crate::perm::{Permutation, Point};

/// An aligned block `[start, start + size)`; the group acts on such blocks.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BaseItem {
    pub start: Point,
    pub size: Point,
}

impl BaseItem {
    pub const fn point(p: Point) -> Self {
        Self { start: p, size: 1 }
    }
}

/// A permutation stored by the window `[lo, hi)` spanning its support.
#[derive(Clone, Debug)]
struct Sparse {
    lo: Point,
    hi: Point,
    window: Vec<Point>,
}

impl Sparse {
    fn new(perm: &Permutation) -> Self {
        let mut moved = perm.support();
        let (lo, hi) = match moved.next() {
            None => (0, 0),
            Some(first) => (first, moved.last().unwrap_or(first) + 1),
        };
        Self {
            lo,
            hi,
            window: perm.images()[lo as usize..hi as usize].to_vec(),
        }
    }

    #[inline]
    fn apply(&self, x: Point) -> Point {
        if x >= self.lo && x < self.hi {
            self.window[(x - self.lo) as usize]
        } else {
            x
        }
    }

    fn inverse(&self) -> Self {
        let mut window = alloc::vec![0; self.window.len()];
        for (i, &y) in self.window.iter().enumerate() {
            window[(y - self.lo) as usize] = self.lo + i as Point;
        }
        Self {
            lo: self.lo,
            hi: self.hi,
            window,
        }
    }

    fn to_dense(&self, degree: usize) -> Permutation {
        let mut images: Vec<Point> = (0..degree as Point).collect();
        images[self.lo as usize..self.hi as usize].copy_from_slice(&self.window);
        Permutation::from_images_unchecked(images)
    }

    /// `self` followed by `other`.
    fn then(&self, other: &Self) -> Self {
        if self.lo == self.hi {
            return other.clone();
        }
        if other.lo == other.hi {
            return self.clone();
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        Self::trimmed(lo, (lo..hi).map(|x| other.apply(self.apply(x))).collect())
    }

    /// Shrinks a window starting at `lo` to the span of its moved points.
    fn trimmed(lo: Point, window: Vec<Point>) -> Self {
        let moved = |(i, &y): (usize, &Point)| lo + i as Point != y;
        let Some(first) = window.iter().enumerate().position(moved) else {
            return Self {
                lo: 0,
                hi: 0,
                window: Vec::new(),
            };
        };
        let last = window.iter().enumerate().rposition(moved).unwrap_or(first);
        Self {
            lo: lo + first as Point,
            hi: lo + last as Point + 1,
            window: window[first..=last].to_vec(),
        }
    }

    #[inline]
    fn disjoint(&self, other: &Self) -> bool {
        self.hi <= other.lo || other.hi <= self.lo
    }

    fn commutes(&self, other: &Self) -> bool {
        if self.disjoint(other) {
            return true;
        }
        let lo = self.lo.min(other.lo);
        let hi = self.hi.max(other.hi);
        (lo..hi).all(|x| self.apply(other.apply(x)) == other.apply(self.apply(x)))
    }
}

type Elt = Arc<Sparse>;

/// A permutation under construction, stored with its inverse so that right
/// multiplication by a sparse permutation only touches that permutation's
/// window. Kept at the identity between uses; `reset` undoes the touched
/// entries.
struct Sifter {
    images: Vec<Point>,
    inverse: Vec<Point>,
    moved: usize,
    /// Windows applied since the last reset; every non-fixed entry lies in one.
    touched: Vec<(Point, Point)>,
    scratch: Vec<Point>,
}

impl Sifter {
    fn new(degree: usize) -> Self {
        Self {
            images: (0..degree as Point).collect(),
            inverse: (0..degree as Point).collect(),
            moved: 0,
            touched: Vec::new(),
            scratch: Vec::new(),
        }
    }

    /// Replaces the table by itself followed by `g`.
    fn then(&mut self, g: &Sparse) {
        let (lo, hi) = (g.lo as usize, g.hi as usize);
        self.scratch.clear();
        self.scratch.extend_from_slice(&self.inverse[lo..hi]);
        for (i, &x) in self.scratch.iter().enumerate() {
            let z = g.window[i];
            let old = self.images[x as usize];
            self.moved -= (old != x) as usize;
            self.moved += (z != x) as usize;
            self.images[x as usize] = z;
            self.inverse[z as usize] = x;
        }
        self.touched.push((g.lo, g.hi));
    }

    fn image(&self, x: Point) -> Point {
        self.images[x as usize]
    }

    fn is_identity(&self) -> bool {
        self.moved == 0
    }

    /// The current permutation as a sparse one.
    fn snapshot(&self) -> Sparse {
        let lo = self.touched.iter().map(|t| t.0).min().unwrap_or(0);
        let hi = self.touched.iter().map(|t| t.1).max().unwrap_or(0).max(lo);
        Sparse::trimmed(lo, self.images[lo as usize..hi as usize].to_vec())
    }

    fn reset(&mut self) {
        for &(lo, hi) in &self.touched {
            for z in lo..hi {
                let x = self.inverse[z as usize];
                self.images[x as usize] = x;
                self.inverse[z as usize] = z;
            }
        }
        self.touched.clear();
        self.moved = 0;
    }
}

#[derive(Clone, Debug)]
struct Level {
    item: BaseItem,
    orbit: BTreeMap<Point, usize>,
    /// Inverses of the coset representatives, indexed like `orbit` values.
    inverses: Vec<Elt>,
    gens: Vec<Elt>,
}

impl Level {
    fn new(item: BaseItem, identity: &Elt) -> Self {
        let mut orbit = BTreeMap::new();
        orbit.insert(item.start, 0);
        Self {
            item,
            orbit,
            inverses: alloc::vec![identity.clone()],
            gens: Vec::new(),
        }
    }

    #[inline]
    fn fixes_item(&self, g: &Sparse) -> bool {
        let y = g.apply(self.item.start);
        y - y % self.item.size == self.item.start
    }
}

enum Task {
    Add(usize, Elt),
    Check(usize, Sparse),
}

/// Base, transversals and strong generators of a finite permutation group.
#[derive(Clone, Debug)]
pub struct StabilizerChain {
    degree: usize,
    generators: Vec<Permutation>,
    levels: Vec<Level>,
    /// Indices of the levels with a non-trivial orbit, ascending.
    active: Vec<usize>,
    identity: Elt,
}

impl StabilizerChain {
    /// The trivial group on `degree` points with the given base items. Points not
    /// covered by a size-one item are appended so that the base is complete.
    pub fn trivial_with_base(degree: usize, items: &[BaseItem]) -> Self {
        let identity: Elt = Arc::new(Sparse::new(&Permutation::identity(degree)));
        let mut covered = alloc::vec![false; degree];
        let mut seen = alloc::collections::BTreeSet::new();
        let mut levels = Vec::with_capacity(items.len());
        for &item in items {
            assert!(item.size >= 1 && item.start % item.size == 0);
            assert!((item.start + item.size) as usize <= degree);
            if !seen.insert(item) {
                continue;
            }
            if item.size == 1 {
                covered[item.start as usize] = true;
            }
            levels.push(Level::new(item, &identity));
        }
        for (p, _) in covered.iter().enumerate().filter(|(_, &c)| !c) {
            levels.push(Level::new(BaseItem::point(p as Point), &identity));
        }
        Self {
            degree,
            generators: Vec::new(),
            levels,
            active: Vec::new(),
            identity,
        }
    }

    /// Builds the chain of `⟨generators⟩` with base points `0, 1, .., degree-1`.
    pub fn build(degree: usize, generators: &[Permutation]) -> Result<Self> {
        Self::build_with_base(degree, generators, &[])
    }

    /// Builds the chain of `⟨generators⟩`, trying the given base items first.
    pub fn build_with_base(
        degree: usize,
        generators: &[Permutation],
        items: &[BaseItem],
    ) -> Result<Self> {
        let mut chain = Self::trivial_with_base(degree, items);
        for g in generators {
            chain.add_generator(g)?;
        }
        Ok(chain)
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    /// Generators that were added (members already in the group are dropped).
    pub fn generators(&self) -> &[Permutation] {
        &self.generators
    }

    /// Extends the group by `g`. Returns `false` if `g` was already a member.
    pub fn add_generator(&mut self, g: &Permutation) -> Result<bool> {
        self.check_degree(g)?;
        if self.contains_unchecked(g) {
            return Ok(false);
        }
        self.generators.push(g.clone());
        self.run(alloc::vec![Task::Add(0, Arc::new(Sparse::new(g)))]);
        Ok(true)
    }

    fn run(&mut self, mut stack: Vec<Task>) {
        let mut sifter = Sifter::new(self.degree);
        while let Some(task) = stack.pop() {
            match task {
                Task::Add(k, t) => {
                    self.ensure_level(k, &t);
                    let level = &mut self.levels[k];
                    level.gens.push(t.clone());
                    let fixes_item = level.fixes_item(&t);
                    for inv in level.inverses.iter().skip(1).rev() {
                        // σ and t commute and t fixes the base item: the Schreier
                        // generator is t itself, which the identity check below
                        // places in Γ_{k+1}
                        if fixes_item && inv.commutes(&t) {
                            continue;
                        }
                        stack.push(Task::Check(k, inv.inverse().then(&t)));
                    }
                    if fixes_item {
                        // t is not in Γ_k, hence not in Γ_{k+1}
                        stack.push(Task::Add(k + 1, t));
                    } else {
                        stack.push(Task::Check(k, (*t).clone()));
                    }
                }
                Task::Check(k, t) => {
                    let level = &self.levels[k];
                    let image = t.apply(level.item.start);
                    let key = image - image % level.item.size;
                    match level.orbit.get(&key) {
                        Some(&i) => {
                            sifter.then(&t);
                            sifter.then(&level.inverses[i]);
                            let residue = sifter.snapshot();
                            if !self.sift_is_member(&mut sifter, k + 1) {
                                stack.push(Task::Add(k + 1, Arc::new(residue)));
                            }
                        }
                        None => {
                            let level = &mut self.levels[k];
                            if level.inverses.len() == 1 {
                                let at = self.active.partition_point(|&j| j < k);
                                self.active.insert(at, k);
                            }
                            level.orbit.insert(key, level.inverses.len());
                            for g in level.gens.iter().rev() {
                                if level.fixes_item(g) && t.commutes(g) {
                                    continue;
                                }
                                stack.push(Task::Check(k, t.then(g)));
                            }
                            level.inverses.push(Arc::new(t.inverse()));
                        }
                    }
                }
            }
        }
    }

    /// Appends a size-one base item for a residue that fixes every current item.
    fn ensure_level(&mut self, k: usize, t: &Sparse) {
        if k < self.levels.len() {
            return;
        }
        debug_assert_eq!(k, self.levels.len());
        assert!(t.lo < t.hi, "identity residue reached the end of the chain");
        let moved = t
            .window
            .iter()
            .enumerate()
            .find(|(i, &y)| t.lo + *i as Point != y);
        let item = BaseItem::point(t.lo + moved.expect("non-identity window").0 as Point);
        self.levels.push(Level::new(item, &self.identity));
    }

    /// Sifts the sifter's permutation from level `from` on and resets it.
    /// Levels with a trivial orbit are skipped: a permutation moving such an
    /// item keeps moving it and fails the final identity test.
    fn sift_is_member(&self, buf: &mut Sifter, from: usize) -> bool {
        let mut member = true;
        let start = self.active.partition_point(|&j| j < from);
        for level in self.active[start..].iter().map(|&j| &self.levels[j]) {
            if buf.is_identity() {
                break;
            }
            let image = buf.image(level.item.start);
            let key = image - image % level.item.size;
            if key == level.item.start {
                continue;
            }
            match level.orbit.get(&key) {
                None => {
                    member = false;
                    break;
                }
                Some(&i) => buf.then(&level.inverses[i]),
            }
        }
        member &= buf.is_identity();
        buf.reset();
        member
    }

    fn check_degree(&self, g: &Permutation) -> Result<()> {
        if g.degree() != self.degree {
            return Err(Error::DegreeMismatch {
                expected: self.degree,
                found: g.degree(),
            });
        }
        Ok(())
    }

    fn contains_unchecked(&self, g: &Permutation) -> bool {
        let mut buf = Sifter::new(self.degree);
        buf.then(&Sparse::new(g));
        self.sift_is_member(&mut buf, 0)
    }

    /// Membership by sifting.
    pub fn contains(&self, g: &Permutation) -> Result<bool> {
        self.check_degree(g)?;
        Ok(self.contains_unchecked(g))
    }

    /// Exact group order: the product of the transversal sizes.
    pub fn order(&self) -> BigUint {
        self.order_from(0)
    }

    /// Order of the stabilizer of the first `k` base items.
    pub fn order_from(&self, k: usize) -> BigUint {
        let mut order = BigUint::one();
        for level in self.levels.iter().skip(k) {
            order *= level.inverses.len();
        }
        order
    }

    pub fn is_trivial(&self) -> bool {
        self.levels.iter().all(|l| l.inverses.len() == 1)
    }

    /// Base items in chain order (including trivial levels).
    pub fn base(&self) -> Vec<BaseItem> {
        self.levels.iter().map(|l| l.item).collect()
    }

    /// Transversal sizes in chain order.
    pub fn transversal_sizes(&self) -> Vec<usize> {
        self.levels.iter().map(|l| l.inverses.len()).collect()
    }

    /// Orbit keys of level `k` in discovery order.
    pub fn level_orbit(&self, k: usize) -> Vec<Point> {
        let mut keys: Vec<(usize, Point)> = self.levels[k]
            .orbit
            .iter()
            .map(|(&key, &i)| (i, key))
            .collect();
        keys.sort_unstable();
        keys.into_iter().map(|(_, key)| key).collect()
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    /// Generators of the pointwise stabilizer of the first `k` base items.
    pub fn stabilizer_generators(&self, k: usize) -> Vec<Permutation> {
        if k >= self.levels.len() {
            return Vec::new();
        }
        self.levels[k]
            .gens
            .iter()
            .map(|g| g.to_dense(self.degree))
            .collect()
    }

    /// The chain of the pointwise stabilizer of the first `k` base items,
    /// sharing transversals with `self`.
    pub fn tail(&self, k: usize) -> Self {
        let k = k.min(self.levels.len());
        Self {
            degree: self.degree,
            generators: self.stabilizer_generators(k),
            levels: self.levels[k..].to_vec(),
            active: self
                .active
                .iter()
                .filter(|&&j| j >= k)
                .map(|&j| j - k)
                .collect(),
            identity: self.identity.clone(),
        }
    }

    /// Distinct strong generators (the union of all `T_k`).
    pub fn strong_generators(&self) -> Vec<Permutation> {
        let mut seen = alloc::collections::BTreeSet::new();
        let mut out = Vec::new();
        for level in &self.levels {
            for g in &level.gens {
                if seen.insert(Arc::as_ptr(g) as usize) {
                    out.push(g.to_dense(self.degree));
                }
            }
        }
        out
    }

    /// All coset representatives of level `k` (first one is the identity).
    pub fn transversal(&self, k: usize) -> Vec<Permutation> {
        self.levels[k]
            .inverses
            .iter()
            .map(|r| r.inverse().to_dense(self.degree))
            .collect()
    }
}

//! Finite-state wreath-recursion machines and lazy words over their states.
//!
//! A state `s` acts on the tree by `(x u)^s = x^{root(s)} u^{s|_x}` where
//! `s|_x = sections(s)[x]`. State `0` is the identity, named `"1"`.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;
use core::fmt;

use crate::chain::StabilizerChain;
use crate::error::{Error, Result};
use crate::perm::{Permutation, Point};
use crate::tree::{self, Vertex};

pub type StateId = usize;

/// The identity state.
pub const IDENTITY: StateId = 0;

/// Default cap on the number of leaves `m^n` an evaluation may touch.
pub const DEFAULT_POINT_CAP: u64 = 1 << 14;

/// Default bound on states created by [`Machine::normalize`].
pub const DEFAULT_STATE_BUDGET: usize = 100_000;

/// A state or its formal inverse.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Letter {
    pub state: StateId,
    pub inverse: bool,
}

impl Letter {
    pub const fn new(state: StateId) -> Self {
        Self {
            state,
            inverse: false,
        }
    }

    pub const fn inv(self) -> Self {
        Self {
            state: self.state,
            inverse: !self.inverse,
        }
    }
}

#[derive(Clone)]
pub struct Machine {
    m: usize,
    top: Vec<Permutation>,
    top_chain: StabilizerChain,
    names: Vec<String>,
    index: BTreeMap<String, StateId>,
    roots: Vec<Permutation>,
    sections: Vec<Vec<StateId>>,
}

impl PartialEq for Machine {
    fn eq(&self, other: &Self) -> bool {
        self.m == other.m
            && self.top == other.top
            && self.names == other.names
            && self.roots == other.roots
            && self.sections == other.sections
    }
}

impl Eq for Machine {}

impl fmt::Debug for Machine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut d = f.debug_struct("Machine");
        d.field("m", &self.m).field("top", &self.top);
        for s in 1..self.names.len() {
            let secs: Vec<&str> = self.sections[s]
                .iter()
                .map(|&t| self.names[t].as_str())
                .collect();
            d.field(&self.names[s], &(&self.roots[s], secs));
        }
        d.finish()
    }
}

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name != "1"
        && !name
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '*' | '^' | '"'))
}

impl Machine {
    /// A machine with only the identity state and top group `⟨top⟩ ≤ Sym(m)`.
    pub fn new(m: usize, top: Vec<Permutation>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidMachine(format!("degree {m} < 2")));
        }
        if let Some(g) = top.iter().find(|g| g.degree() != m) {
            return Err(Error::DegreeMismatch {
                expected: m,
                found: g.degree(),
            });
        }
        let top_chain = StabilizerChain::build(m, &top)?;
        let mut index = BTreeMap::new();
        index.insert(String::from("1"), IDENTITY);
        Ok(Self {
            m,
            top,
            top_chain,
            names: alloc::vec![String::from("1")],
            index,
            roots: alloc::vec![Permutation::identity(m)],
            sections: alloc::vec![alloc::vec![IDENTITY; m]],
        })
    }

    /// Builds a machine from `(name, root, section names)` triples; sections may
    /// refer to any state in the list or to `"1"`.
    pub fn from_states(
        m: usize,
        top: Vec<Permutation>,
        states: &[(String, Permutation, Vec<String>)],
    ) -> Result<Self> {
        let mut machine = Self::new(m, top)?;
        for (name, _, _) in states {
            if !valid_name(name) {
                return Err(Error::InvalidMachine(format!("bad state name {name:?}")));
            }
            if machine.index.contains_key(name) {
                return Err(Error::InvalidMachine(format!("duplicate state {name:?}")));
            }
            let id = machine.names.len();
            machine.names.push(name.clone());
            machine.index.insert(name.clone(), id);
            machine.roots.push(Permutation::identity(m));
            machine.sections.push(Vec::new());
        }
        for (i, (name, root, sections)) in states.iter().enumerate() {
            let id = i + 1;
            machine.check_root(name, root)?;
            if sections.len() != m {
                return Err(Error::InvalidMachine(format!(
                    "state {name:?} has {} sections, expected {m}",
                    sections.len()
                )));
            }
            let resolved = sections
                .iter()
                .map(|s| machine.state(s))
                .collect::<Result<Vec<_>>>()?;
            machine.roots[id] = root.clone();
            machine.sections[id] = resolved;
        }
        Ok(machine)
    }

    fn check_root(&self, name: &str, root: &Permutation) -> Result<()> {
        if root.degree() != self.m {
            return Err(Error::DegreeMismatch {
                expected: self.m,
                found: root.degree(),
            });
        }
        if !self.top_chain.contains(root)? {
            return Err(Error::RootOutsideTop {
                state: name.to_string(),
            });
        }
        Ok(())
    }

    /// Adds a state whose sections are existing states.
    pub fn add_state(
        &mut self,
        name: &str,
        root: Permutation,
        sections: Vec<StateId>,
    ) -> Result<StateId> {
        if !valid_name(name) || self.index.contains_key(name) {
            return Err(Error::InvalidMachine(format!(
                "bad or duplicate state name {name:?}"
            )));
        }
        self.check_root(name, &root)?;
        if sections.len() != self.m || sections.iter().any(|&s| s >= self.names.len()) {
            return Err(Error::InvalidMachine(format!("bad sections for {name:?}")));
        }
        let id = self.names.len();
        self.names.push(name.to_string());
        self.index.insert(name.to_string(), id);
        self.roots.push(root);
        self.sections.push(sections);
        Ok(id)
    }

    /// Enlarges the top group. Existing roots stay valid.
    pub fn extend_top(&mut self, gens: &[Permutation]) -> Result<()> {
        for g in gens {
            if self.top_chain.add_generator(g)? {
                self.top.push(g.clone());
            }
        }
        Ok(())
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn top(&self) -> &[Permutation] {
        &self.top
    }

    pub fn top_chain(&self) -> &StabilizerChain {
        &self.top_chain
    }

    /// Number of states including the identity.
    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.len() == 1
    }

    pub fn state(&self, name: &str) -> Result<StateId> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownState(name.to_string()))
    }

    pub fn name(&self, s: StateId) -> &str {
        &self.names[s]
    }

    pub fn root(&self, s: StateId) -> &Permutation {
        &self.roots[s]
    }

    pub fn sections(&self, s: StateId) -> &[StateId] {
        &self.sections[s]
    }

    /// Parses `"a*b^-1*c"`; `"1"` and `""` denote the empty word.
    pub fn parse_word(&self, text: &str) -> Result<Vec<Letter>> {
        let text = text.trim();
        if text.is_empty() || text == "1" {
            return Ok(Vec::new());
        }
        let mut word = Vec::new();
        for tok in text.split('*') {
            let tok = tok.trim();
            let (name, inverse) = match tok.split_once('^') {
                None => (tok, false),
                Some((name, "-1")) => (name.trim(), true),
                Some((name, "1")) => (name.trim(), false),
                Some(_) => return Err(Error::InvalidWord(text.to_string())),
            };
            if name.is_empty() {
                return Err(Error::InvalidWord(text.to_string()));
            }
            let state = self.state(name)?;
            if state != IDENTITY {
                word.push(Letter { state, inverse });
            }
        }
        Ok(word)
    }

    pub fn format_word(&self, word: &[Letter]) -> String {
        if word.is_empty() {
            return String::from("1");
        }
        let parts: Vec<String> = word
            .iter()
            .map(|l| {
                if l.inverse {
                    format!("{}^-1", self.names[l.state])
                } else {
                    self.names[l.state].clone()
                }
            })
            .collect();
        parts.join("*")
    }

    /// Root permutation of a word (right action: leftmost letter first).
    pub fn word_root(&self, word: &[Letter]) -> Permutation {
        let mut p = Permutation::identity(self.m);
        for l in word {
            let r = &self.roots[l.state];
            p = if l.inverse {
                p.then_inverse_of(r)
            } else {
                p.then(r)
            };
        }
        p
    }

    /// Section of a word at a letter `x` (0-based), and the image of `x`.
    pub fn word_section(&self, word: &[Letter], x: usize) -> (Vec<Letter>, usize) {
        let mut y = x;
        let mut out = Vec::with_capacity(word.len());
        for l in word {
            let root = self.roots[l.state].images();
            let (sec, next) = if l.inverse {
                let pre = root.iter().position(|&r| r as usize == y).unwrap();
                (self.sections[l.state][pre], pre)
            } else {
                (self.sections[l.state][y], root[y] as usize)
            };
            if sec != IDENTITY {
                out.push(Letter {
                    state: sec,
                    inverse: l.inverse,
                });
            }
            y = next;
        }
        (out, y)
    }

    /// Level-`n` actions of several words, sharing the per-state work.
    pub fn evaluate_words(
        &self,
        words: &[&[Letter]],
        n: usize,
        cap: u64,
    ) -> Result<Vec<Permutation>> {
        let size = tree::level_size(self.m, n, cap)? as usize;
        let m = self.m;
        // states needed at depth j below the root, i.e. at level n - j
        let mut layers: Vec<Vec<StateId>> = Vec::with_capacity(n + 1);
        let mut mark = alloc::vec![usize::MAX; self.len()];
        let mut first: Vec<StateId> = Vec::new();
        for w in words {
            for l in w.iter() {
                if l.state != IDENTITY && mark[l.state] != 0 {
                    mark[l.state] = 0;
                    first.push(l.state);
                }
            }
        }
        layers.push(first);
        for j in 1..=n {
            let mut next = Vec::new();
            for &s in &layers[j - 1] {
                for &t in &self.sections[s] {
                    if t != IDENTITY && mark[t] != j {
                        mark[t] = j;
                        next.push(t);
                    }
                }
            }
            layers.push(next);
        }
        // bottom-up: images of every needed state at the current level
        let mut below: BTreeMap<StateId, Vec<Point>> = BTreeMap::new();
        for j in (0..=n).rev() {
            let level = n - j;
            let width = m.pow(level as u32);
            let sub = width / m;
            let mut here = BTreeMap::new();
            for &s in &layers[j] {
                let mut images = alloc::vec![0 as Point; width];
                if level > 0 {
                    let root = self.roots[s].images();
                    for x in 0..m {
                        let base = (root[x] as usize * sub) as Point;
                        let dst = &mut images[x * sub..(x + 1) * sub];
                        match below.get(&self.sections[s][x]) {
                            Some(p) => {
                                for (d, &y) in dst.iter_mut().zip(p) {
                                    *d = base + y;
                                }
                            }
                            None => {
                                for (r, d) in dst.iter_mut().enumerate() {
                                    *d = base + r as Point;
                                }
                            }
                        }
                    }
                }
                here.insert(s, images);
            }
            below = here;
        }
        let identity = Permutation::identity(size);
        let mut out = Vec::with_capacity(words.len());
        for w in words {
            let mut p = identity.clone();
            for l in w.iter() {
                let q = Permutation::from_images(below[&l.state].clone())?;
                p = if l.inverse {
                    p.then_inverse_of(&q)
                } else {
                    p.then(&q)
                };
            }
            out.push(p);
        }
        Ok(out)
    }

    /// Adds product states so that `word` is represented by a single state.
    ///
    /// States are the reduced section words reachable from `word`; words of
    /// length one that are not inverted reuse the existing state. New states
    /// are named by their word.
    pub fn normalize_word(&mut self, word: &[Letter], budget: usize) -> Result<StateId> {
        let start = reduce_word(word);
        let mut found: BTreeMap<Vec<Letter>, StateId> = BTreeMap::new();
        let mut pending: Vec<Vec<Letter>> = Vec::new();
        let mut order: Vec<Vec<Letter>> = Vec::new();
        let intern = |w: Vec<Letter>,
                      machine: &Machine,
                      found: &mut BTreeMap<Vec<Letter>, StateId>,
                      pending: &mut Vec<Vec<Letter>>,
                      order: &mut Vec<Vec<Letter>>|
         -> Result<StateId> {
            if w.is_empty() {
                return Ok(IDENTITY);
            }
            if w.len() == 1 && !w[0].inverse {
                return Ok(w[0].state);
            }
            if let Some(&id) = found.get(&w) {
                return Ok(id);
            }
            let name = machine.format_word(&w);
            let id = match machine.index.get(&name) {
                Some(&id) => id,
                None => machine.names.len() + order.len(),
            };
            if id >= machine.names.len() {
                if order.len() >= budget {
                    return Err(Error::StateExplosion { limit: budget });
                }
                order.push(w.clone());
                pending.push(w.clone());
            }
            found.insert(w, id);
            Ok(id)
        };
        let top = intern(start, self, &mut found, &mut pending, &mut order)?;
        let mut sections_of: BTreeMap<Vec<Letter>, Vec<StateId>> = BTreeMap::new();
        while let Some(w) = pending.pop() {
            let mut secs = Vec::with_capacity(self.m);
            for x in 0..self.m {
                let (sec, _) = self.word_section(&w, x);
                secs.push(intern(
                    reduce_word(&sec),
                    self,
                    &mut found,
                    &mut pending,
                    &mut order,
                )?);
            }
            sections_of.insert(w, secs);
        }
        for w in &order {
            let name = self.format_word(w);
            let root = self.word_root(w);
            let id = self.names.len();
            self.names.push(name.clone());
            self.index.insert(name, id);
            self.roots.push(root);
            self.sections
                .push(sections_of.remove(w).expect("sections computed"));
        }
        Ok(top)
    }

    /// Disjoint union: states of `other` are appended (names clashing with
    /// existing ones get a `'` suffix). Returns the id map for `other`.
    pub fn merge(&mut self, other: &Machine) -> Result<Vec<StateId>> {
        if other.m != self.m {
            return Err(Error::DegreeMismatch {
                expected: self.m,
                found: other.m,
            });
        }
        self.extend_top(&other.top)?;
        let mut map = alloc::vec![IDENTITY; other.len()];
        for (s, slot) in map.iter_mut().enumerate().skip(1) {
            let mut name = other.names[s].clone();
            while self.index.contains_key(&name) {
                name.push('\'');
            }
            let id = self.names.len();
            self.index.insert(name.clone(), id);
            self.names.push(name);
            self.roots.push(other.roots[s].clone());
            self.sections.push(Vec::new());
            *slot = id;
        }
        for s in 1..other.len() {
            self.sections[map[s]] = other.sections[s].iter().map(|&t| map[t]).collect();
        }
        Ok(map)
    }
}

/// Drops identity letters and cancels adjacent `s s^-1` pairs.
pub fn reduce_word(word: &[Letter]) -> Vec<Letter> {
    let mut out: Vec<Letter> = Vec::with_capacity(word.len());
    for &l in word {
        if l.state == IDENTITY {
            continue;
        }
        if out.last() == Some(&l.inv()) {
            out.pop();
        } else {
            out.push(l);
        }
    }
    out
}

/// A tree automorphism given as a word over the states of a machine.
#[derive(Clone, PartialEq, Eq)]
pub struct Element {
    machine: Arc<Machine>,
    word: Vec<Letter>,
}

impl fmt::Debug for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Element({})", self)
    }
}

impl fmt::Display for Element {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.machine.format_word(&self.word))
    }
}

impl Element {
    pub fn identity(machine: Arc<Machine>) -> Self {
        Self {
            machine,
            word: Vec::new(),
        }
    }

    pub fn from_word(machine: Arc<Machine>, word: Vec<Letter>) -> Result<Self> {
        if let Some(l) = word.iter().find(|l| l.state >= machine.len()) {
            return Err(Error::UnknownState(format!("#{}", l.state)));
        }
        Ok(Self { machine, word })
    }

    pub fn state(machine: Arc<Machine>, s: StateId) -> Result<Self> {
        Self::from_word(machine, alloc::vec![Letter::new(s)])
    }

    pub fn parse(machine: Arc<Machine>, text: &str) -> Result<Self> {
        let word = machine.parse_word(text)?;
        Ok(Self { machine, word })
    }

    pub fn machine(&self) -> &Arc<Machine> {
        &self.machine
    }

    pub fn word(&self) -> &[Letter] {
        &self.word
    }

    pub fn m(&self) -> usize {
        self.machine.m
    }

    /// Moves the element onto `target`, which must contain this element's
    /// machine as a prefix (as produced by extending it with new states).
    pub fn rebase(&self, target: &Arc<Machine>) -> Result<Self> {
        let src = &self.machine;
        let prefix_ok = target.len() >= src.len()
            && target.m == src.m
            && (1..src.len()).all(|s| {
                target.names[s] == src.names[s]
                    && target.roots[s] == src.roots[s]
                    && target.sections[s] == src.sections[s]
            });
        if !prefix_ok {
            return Err(Error::InvalidMachine(String::from(
                "target machine does not extend the element's machine",
            )));
        }
        Ok(Self {
            machine: target.clone(),
            word: self.word.clone(),
        })
    }

    /// Brings two elements onto one machine, merging machines if needed.
    pub fn unify(a: &Self, b: &Self) -> Result<(Self, Self)> {
        if Arc::ptr_eq(&a.machine, &b.machine) || a.machine == b.machine {
            return Ok((
                a.clone(),
                Self {
                    machine: a.machine.clone(),
                    word: b.word.clone(),
                },
            ));
        }
        let mut merged = (*a.machine).clone();
        let map = merged.merge(&b.machine)?;
        let merged = Arc::new(merged);
        let word = b
            .word
            .iter()
            .map(|l| Letter {
                state: map[l.state],
                inverse: l.inverse,
            })
            .collect();
        Ok((
            Self {
                machine: merged.clone(),
                word: a.word.clone(),
            },
            Self {
                machine: merged,
                word,
            },
        ))
    }

    /// `self` then `other` (word concatenation).
    pub fn multiply(&self, other: &Self) -> Result<Self> {
        let (a, b) = Self::unify(self, other)?;
        let mut word = a.word;
        word.extend_from_slice(&b.word);
        Ok(Self {
            machine: a.machine,
            word,
        })
    }

    pub fn inverse(&self) -> Self {
        Self {
            machine: self.machine.clone(),
            word: self.word.iter().rev().map(|l| l.inv()).collect(),
        }
    }

    pub fn is_trivial_word(&self) -> bool {
        self.word.is_empty()
    }

    /// Root permutation of `{0, .., m-1}`.
    pub fn root(&self) -> Permutation {
        self.machine.word_root(&self.word)
    }

    /// The section `g|_v`.
    pub fn section(&self, v: &Vertex) -> Result<Self> {
        if v.m() != self.machine.m {
            return Err(Error::InvalidVertex(format!(
                "{v} is a vertex of the {}-adic tree",
                v.m()
            )));
        }
        let mut word = self.word.clone();
        for &x in v.letters() {
            word = self.machine.word_section(&word, x as usize - 1).0;
        }
        Ok(Self {
            machine: self.machine.clone(),
            word,
        })
    }

    /// The image `v^g`.
    pub fn image(&self, v: &Vertex) -> Result<Vertex> {
        let mut word = self.word.clone();
        let mut letters = Vec::with_capacity(v.level());
        for &x in v.letters() {
            let (sec, y) = self.machine.word_section(&word, x as usize - 1);
            letters.push(y as u8 + 1);
            word = sec;
        }
        Vertex::new(self.machine.m, &letters)
    }

    /// Action on the `m^n` leaves of level `n`, with the default point cap.
    pub fn evaluate(&self, n: usize) -> Result<Permutation> {
        self.evaluate_capped(n, DEFAULT_POINT_CAP)
    }

    pub fn evaluate_capped(&self, n: usize, cap: u64) -> Result<Permutation> {
        Ok(self
            .machine
            .evaluate_words(&[&self.word], n, cap)?
            .remove(0))
    }

    /// The element as a single state of an enlarged machine.
    pub fn normalize(&self) -> Result<Self> {
        self.normalize_with_budget(DEFAULT_STATE_BUDGET)
    }

    pub fn normalize_with_budget(&self, budget: usize) -> Result<Self> {
        let mut machine = (*self.machine).clone();
        let s = machine.normalize_word(&self.word, budget)?;
        let word = if s == IDENTITY {
            Vec::new()
        } else {
            alloc::vec![Letter::new(s)]
        };
        Ok(Self {
            machine: Arc::new(machine),
            word,
        })
    }
}

/// Evaluates elements sharing one machine at level `n`.
pub fn evaluate_all(elements: &[Element], n: usize, cap: u64) -> Result<Vec<Permutation>> {
    let Some(first) = elements.first() else {
        return Ok(Vec::new());
    };
    let machine = first.machine.clone();
    if elements.iter().all(|e| Arc::ptr_eq(&e.machine, &machine)) {
        let words: Vec<&[Letter]> = elements.iter().map(|e| e.word.as_slice()).collect();
        return machine.evaluate_words(&words, n, cap);
    }
    elements.iter().map(|e| e.evaluate_capped(n, cap)).collect()
}

/// A section that is not in the quotient of the generated group.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SectionFailure {
    pub generator: usize,
    pub vertex: Vertex,
    pub section: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SelfSimilarityReport {
    pub depth: usize,
    pub failures: Vec<SectionFailure>,
}

impl SelfSimilarityReport {
    /// Passing is necessary for self-similarity, not sufficient.
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Tests `evaluate(g|_v, n - l(v)) ∈ π_{n-l(v)}(⟨generators⟩)` for every
/// generator and every vertex with `1 <= l(v) < n`.
pub fn self_similarity_check(
    generators: &[Element],
    n: usize,
    cap: u64,
) -> Result<SelfSimilarityReport> {
    let mut failures = Vec::new();
    let Some(first) = generators.first() else {
        return Ok(SelfSimilarityReport { depth: n, failures });
    };
    let m = first.m();
    tree::level_size(m, n, cap)?;
    let chains = (0..n)
        .map(|j| {
            let gens = evaluate_all(generators, j, cap)?;
            StabilizerChain::build_with_base(m.pow(j as u32), &gens, &tree::tree_base(m, j))
        })
        .collect::<Result<Vec<_>>>()?;
    for (gi, g) in generators.iter().enumerate() {
        let mut frontier = alloc::vec![(Vertex::root(m), g.word.clone())];
        for level in 1..n {
            let mut next = Vec::with_capacity(frontier.len() * m);
            for (v, word) in &frontier {
                for x in 0..m {
                    let sec = reduce_word(&g.machine.word_section(word, x).0);
                    next.push((v.child(x as u8 + 1), sec));
                }
            }
            let j = n - level;
            let words: Vec<&[Letter]> = next.iter().map(|(_, w)| w.as_slice()).collect();
            let perms = g.machine.evaluate_words(&words, j, cap)?;
            for ((v, w), p) in next.iter().zip(&perms) {
                if !chains[j].contains(p)? {
                    failures.push(SectionFailure {
                        generator: gi,
                        vertex: v.clone(),
                        section: g.machine.format_word(w),
                    });
                }
            }
            frontier = next;
        }
    }
    Ok(SelfSimilarityReport { depth: n, failures })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn odometer() -> Arc<Machine> {
        let s = Permutation::from_cycles(2, "(1 2)").unwrap();
        Arc::new(
            Machine::from_states(
                2,
                alloc::vec![s.clone()],
                &[(
                    String::from("a"),
                    s,
                    alloc::vec![String::from("1"), String::from("a")],
                )],
            )
            .unwrap(),
        )
    }

    #[test]
    fn odometer_action() {
        let mc = odometer();
        let a = Element::parse(mc.clone(), "a").unwrap();
        assert_eq!(a.evaluate(2).unwrap().images(), &[2, 3, 1, 0]);
        assert_eq!(a.evaluate(2).unwrap().to_cycles(), "(1 3 2 4)");
        assert_eq!(a.evaluate(0).unwrap().degree(), 1);
        let s2 = a.section(&Vertex::parse(2, "2").unwrap()).unwrap();
        assert_eq!(s2.to_string(), "a");
        assert!(a
            .section(&Vertex::parse(2, "1").unwrap())
            .unwrap()
            .is_trivial_word());
        let aa = a.multiply(&a).unwrap();
        assert_eq!(
            aa.evaluate(5).unwrap(),
            a.evaluate(5).unwrap().then(&a.evaluate(5).unwrap())
        );
        assert!(a
            .multiply(&a.inverse())
            .unwrap()
            .evaluate(6)
            .unwrap()
            .is_identity());
    }

    #[test]
    fn normalize_square() {
        let mc = odometer();
        let aa = Element::parse(mc, "a*a").unwrap();
        let n = aa.normalize().unwrap();
        assert_eq!(n.machine().len(), 3);
        let s = n.word()[0].state;
        assert_eq!(n.machine().name(s), "a*a");
        assert!(n.machine().root(s).is_identity());
        assert_eq!(n.machine().sections(s), &[1, 1]);
        for lvl in 0..=6 {
            assert_eq!(n.evaluate(lvl).unwrap(), aa.evaluate(lvl).unwrap());
        }
    }

    #[test]
    fn parse_errors() {
        let mc = odometer();
        assert_eq!(
            mc.parse_word("b"),
            Err(Error::UnknownState(String::from("b")))
        );
        assert!(mc.parse_word("a^2").is_err());
        assert_eq!(mc.parse_word("a*1*a^-1").unwrap().len(), 2);
        let bad = Machine::from_states(
            2,
            alloc::vec![],
            &[(
                String::from("a"),
                Permutation::from_cycles(2, "(1 2)").unwrap(),
                alloc::vec![String::from("1"), String::from("a")],
            )],
        );
        assert_eq!(
            bad.unwrap_err(),
            Error::RootOutsideTop {
                state: String::from("a")
            }
        );
    }

    #[test]
    fn evaluation_cap() {
        let a = Element::parse(odometer(), "a").unwrap();
        assert!(matches!(a.evaluate(15), Err(Error::ResourceLimit { .. })));
    }
}

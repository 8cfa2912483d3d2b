//! Declarative group descriptions and the builders behind them.

use alloc::boxed::Box;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::sync::Arc;
use alloc::vec::Vec;

use num_bigint::BigUint;

use crate::chain::StabilizerChain;
use crate::error::{Error, Result};
use crate::groups;
use crate::machine::{self, Element, Letter, Machine, IDENTITY};
use crate::perm::{Permutation, Point};
use crate::tree::{self, Vertex};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Construction {
    /// The group generated by the element generators.
    Plain,
    /// Rooted automorphisms with roots in the top group.
    Rooted,
    /// The diagonal `D_m(K)`.
    Diagonal(Box<GroupSpec>),
    /// `G_K = ⟨H, D_m(K)⟩`.
    GK {
        h: Vec<Permutation>,
        k: Box<GroupSpec>,
    },
    /// The iterated wreath product of the top group.
    WreathFull,
}

impl Construction {
    pub fn tag(&self) -> &'static str {
        match self {
            Self::Plain => "plain",
            Self::Rooted => "rooted",
            Self::Diagonal(_) => "diagonal",
            Self::GK { .. } => "gk",
            Self::WreathFull => "wreath_full",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GroupSpec {
    pub name: String,
    pub m: usize,
    /// Generators of the top group `H ≤ Sym(m)`.
    pub top: Vec<Permutation>,
    pub machine: Arc<Machine>,
    /// Element generators. Level-dependent constructions (wreath products and
    /// anything built over them) may leave this empty.
    pub generators: Vec<Element>,
    pub construction: Construction,
}

impl GroupSpec {
    /// A plain spec over `machine` with generators given as words.
    pub fn plain(name: &str, machine: Arc<Machine>, words: &[&str]) -> Result<Self> {
        let generators = words
            .iter()
            .map(|w| Element::parse(machine.clone(), w))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            name: name.to_string(),
            m: machine.m(),
            top: machine.top().to_vec(),
            machine,
            generators,
            construction: Construction::Plain,
        })
    }

    /// `|H|`.
    pub fn top_order(&self) -> BigUint {
        StabilizerChain::build(self.m, &self.top)
            .map(|c| c.order())
            .unwrap_or_else(|_| BigUint::from(1u32))
    }

    /// `|π_n(W_H)| = |H|^{(m^n - 1)/(m - 1)}`.
    pub fn wreath_order(&self, n: usize) -> BigUint {
        let vertices = (0..n).map(|j| self.m.pow(j as u32)).sum::<usize>();
        self.top_order().pow(vertices as u32)
    }

    /// False if the generating set depends on the level.
    pub fn is_finite_state(&self) -> bool {
        match &self.construction {
            Construction::Plain | Construction::Rooted => true,
            Construction::WreathFull => false,
            Construction::Diagonal(k) | Construction::GK { k, .. } => k.is_finite_state(),
        }
    }

    /// Generators of `π_n(G)` acting on the `m^n` leaves.
    pub fn realize(&self, n: usize, cap: u64) -> Result<Vec<Permutation>> {
        tree::level_size(self.m, n, cap)?;
        match &self.construction {
            Construction::Plain | Construction::Rooted => {
                machine::evaluate_all(&self.generators, n, cap)
            }
            Construction::WreathFull => wreath_full_permutations(self.m, &self.top, n),
            Construction::Diagonal(k) => diagonal_permutations(self.m, k, n, cap),
            Construction::GK { h, k } => {
                let mut gens = rooted_permutations(self.m, h, n);
                gens.extend(diagonal_permutations(self.m, k, n, cap)?);
                Ok(gens)
            }
        }
    }

    /// Chain of `π_n(G)` on the tree base.
    pub fn quotient(&self, n: usize, cap: u64) -> Result<StabilizerChain> {
        let gens = self.realize(n, cap)?;
        StabilizerChain::build_with_base(self.m.pow(n as u32), &gens, &tree::tree_base(self.m, n))
    }
}

/// Rooted automorphism `h` acting on level `n`: the level-1 blocks are permuted.
pub fn rooted_permutation(m: usize, h: &Permutation, n: usize) -> Permutation {
    vertex_permutation(m, n, &Vertex::root(m), h)
}

fn rooted_permutations(m: usize, h: &[Permutation], n: usize) -> Vec<Permutation> {
    if n == 0 {
        return Vec::new();
    }
    h.iter()
        .filter(|g| !g.is_identity())
        .map(|g| rooted_permutation(m, g, n))
        .collect()
}

/// `h` acting at vertex `v` (children of `v` permuted rigidly), trivially elsewhere.
pub fn vertex_permutation(m: usize, n: usize, v: &Vertex, h: &Permutation) -> Permutation {
    let leaves = m.pow(n as u32);
    let mut images: Vec<Point> = (0..leaves as Point).collect();
    let block = v.leaf_block(n).expect("vertex above level n");
    let sub = ((block.end - block.start) / m as u64) as usize;
    let lo = block.start as usize;
    for x in 0..m {
        let y = h.apply(x as Point) as usize;
        for r in 0..sub {
            images[lo + x * sub + r] = (lo + y * sub + r) as Point;
        }
    }
    Permutation::from_images(images).expect("rigid block permutation")
}

/// `(k, .., k)` with `k` acting on level `n - 1`.
pub fn diagonal_permutation(m: usize, k: &Permutation) -> Permutation {
    let w = k.degree() as Point;
    let mut images = Vec::with_capacity(m * k.degree());
    for x in 0..m as Point {
        images.extend(k.images().iter().map(|&y| x * w + y));
    }
    Permutation::from_images(images).expect("diagonal of a permutation")
}

fn diagonal_permutations(m: usize, k: &GroupSpec, n: usize, cap: u64) -> Result<Vec<Permutation>> {
    if n == 0 {
        return Ok(Vec::new());
    }
    Ok(k.realize(n - 1, cap)?
        .iter()
        .filter(|g| !g.is_identity())
        .map(|g| diagonal_permutation(m, g))
        .collect())
}

fn wreath_full_permutations(m: usize, top: &[Permutation], n: usize) -> Result<Vec<Permutation>> {
    let mut out = Vec::new();
    for level in 0..n {
        for v in tree::level_vertices(m, level, tree::DEFAULT_LEVEL_CAP)? {
            for h in top.iter().filter(|h| !h.is_identity()) {
                out.push(vertex_permutation(m, n, &v, h));
            }
        }
    }
    Ok(out)
}

/// One rooted element per non-trivial generator of `H`.
pub fn rooted_generators(m: usize, h: &[Permutation]) -> Result<Vec<Element>> {
    let mut machine = Machine::new(m, h.to_vec())?;
    let mut states = Vec::new();
    for (i, g) in h.iter().enumerate().filter(|(_, g)| !g.is_identity()) {
        states.push(machine.add_state(&format!("h{i}"), g.clone(), alloc::vec![IDENTITY; m])?);
    }
    let machine = Arc::new(machine);
    states
        .into_iter()
        .map(|s| Element::state(machine.clone(), s))
        .collect()
}

/// Adds the state `d(k)` with trivial root and every section equal to `k`.
fn add_diagonal_state(machine: &mut Machine, word: &[Letter]) -> Result<Option<usize>> {
    let k = machine.normalize_word(word, machine::DEFAULT_STATE_BUDGET)?;
    if k == IDENTITY {
        return Ok(None);
    }
    let m = machine.m();
    let base: String = machine
        .name(k)
        .replace("^-1", "'")
        .chars()
        .map(|c| if c == '*' { '.' } else { c })
        .collect();
    let mut name = format!("d({base})");
    while let Ok(s) = machine.state(&name) {
        if machine.root(s).is_identity() && machine.sections(s).iter().all(|&x| x == k) {
            return Ok(Some(s));
        }
        name.push('\'');
    }
    Ok(Some(machine.add_state(
        &name,
        Permutation::identity(m),
        alloc::vec![k; m],
    )?))
}

/// The diagonal element `d(k)` with `ψ(d(k)) = (k, .., k)`.
pub fn diagonal(k: &Element) -> Result<Element> {
    let mut machine = (**k.machine()).clone();
    let state = add_diagonal_state(&mut machine, k.word())?;
    let machine = Arc::new(machine);
    match state {
        None => Ok(Element::identity(machine)),
        Some(s) => Element::state(machine, s),
    }
}

/// Number of orbits of `⟨h⟩` on `{1, .., m}`.
pub fn top_orbits(m: usize, h: &[Permutation]) -> usize {
    groups::orbits(h, 0..m as Point).len()
}

/// `G_K = ⟨H, D_m(K)⟩` for a transitive `H`.
pub fn build_gk(h: &[Permutation], k: &GroupSpec) -> Result<GroupSpec> {
    let m = k.m;
    if let Some(g) = h.iter().find(|g| g.degree() != m) {
        return Err(Error::DegreeMismatch {
            expected: m,
            found: g.degree(),
        });
    }
    let orbits = top_orbits(m, h);
    if orbits > 1 {
        return Err(Error::NotTransitive { orbits });
    }
    let mut machine = (*k.machine).clone();
    machine.extend_top(h)?;
    let mut states = Vec::new();
    for (i, g) in h.iter().enumerate().filter(|(_, g)| !g.is_identity()) {
        let mut name = format!("h{i}");
        while machine.state(&name).is_ok() {
            name.push('\'');
        }
        states.push(machine.add_state(&name, g.clone(), alloc::vec![IDENTITY; m])?);
    }
    if k.is_finite_state() {
        for g in &k.generators {
            if let Some(s) = add_diagonal_state(&mut machine, g.word())? {
                states.push(s);
            }
        }
    }
    let machine = Arc::new(machine);
    let generators = states
        .into_iter()
        .map(|s| Element::state(machine.clone(), s))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupSpec {
        name: format!("gk({})", k.name),
        m,
        top: h.to_vec(),
        machine,
        generators,
        construction: Construction::GK {
            h: h.to_vec(),
            k: Box::new(k.clone()),
        },
    })
}

/// `D_m(K)` as a spec.
pub fn build_diagonal(k: &GroupSpec) -> Result<GroupSpec> {
    let mut machine = (*k.machine).clone();
    let mut states = Vec::new();
    if k.is_finite_state() {
        for g in &k.generators {
            if let Some(s) = add_diagonal_state(&mut machine, g.word())? {
                states.push(s);
            }
        }
    }
    let machine = Arc::new(machine);
    let generators = states
        .into_iter()
        .map(|s| Element::state(machine.clone(), s))
        .collect::<Result<Vec<_>>>()?;
    Ok(GroupSpec {
        name: format!("diag({})", k.name),
        m: k.m,
        top: k.top.clone(),
        machine,
        generators,
        construction: Construction::Diagonal(Box::new(k.clone())),
    })
}

/// Rooted-at-vertex generators of `π_n(W_H)`: `h` acting at `v` for every
/// vertex with `l(v) < n` and every generator `h`.
pub fn wreath_full_generators(
    m: usize,
    h: &[Permutation],
    n: usize,
    cap: u64,
) -> Result<Vec<Element>> {
    tree::level_size(m, n, cap)?;
    let mut machine = Machine::new(m, h.to_vec())?;
    let mut states = Vec::new();
    for (i, g) in h.iter().enumerate().filter(|(_, g)| !g.is_identity()) {
        // h at x u has trivial root and section h-at-u below x
        let mut previous: Vec<usize> = Vec::new();
        for level in 0..n {
            let mut current = Vec::with_capacity(previous.len() * m);
            for v in tree::level_vertices(m, level, cap)? {
                let name = format!("h{i}@{v}");
                let s = if level == 0 {
                    machine.add_state(&name, g.clone(), alloc::vec![IDENTITY; m])?
                } else {
                    let x = v.letters()[0] as usize - 1;
                    let rest = Vertex::new(m, &v.letters()[1..])?.index() as usize;
                    let mut sections = alloc::vec![IDENTITY; m];
                    sections[x] = previous[rest];
                    machine.add_state(&name, Permutation::identity(m), sections)?
                };
                current.push(s);
            }
            states.extend_from_slice(&current);
            previous = current;
        }
    }
    let machine = Arc::new(machine);
    states
        .into_iter()
        .map(|s| Element::state(machine.clone(), s))
        .collect()
}

fn cycles(m: usize, text: &str) -> Permutation {
    Permutation::from_cycles(m, text).expect("fixture cycle notation")
}

fn machine(m: usize, top: &[&str], states: &[(&str, &str, &[&str])]) -> Arc<Machine> {
    let top = top.iter().map(|t| cycles(m, t)).collect();
    let states: Vec<_> = states
        .iter()
        .map(|(name, root, secs)| {
            (
                name.to_string(),
                cycles(m, root),
                secs.iter().map(|s| s.to_string()).collect(),
            )
        })
        .collect();
    Arc::new(Machine::from_states(m, top, &states).expect("fixture machine"))
}

fn wreath_spec(name: &str, m: usize, top: &[&str]) -> GroupSpec {
    let top: Vec<Permutation> = top.iter().map(|t| cycles(m, t)).collect();
    GroupSpec {
        name: name.to_string(),
        m,
        machine: Arc::new(Machine::new(m, top.clone()).expect("fixture top")),
        top,
        generators: Vec::new(),
        construction: Construction::WreathFull,
    }
}

fn named(mut spec: GroupSpec, name: &str) -> GroupSpec {
    spec.name = name.to_string();
    spec
}

/// Names of the bundled specs, in catalog order.
pub const FIXTURE_NAMES: &[&str] = &[
    "trivial",
    "cyclic",
    "odometer",
    "odometer3",
    "grigorchuk",
    "w2",
    "w3c",
    "w3s",
    "gk-trivial",
    "gk-odometer",
    "gk-odometer3",
    "gk-s3-odometer3",
    "gk-grigorchuk",
    "gk-w2",
    "gk-w3c",
    "gk-w3s",
];

/// A bundled spec by name.
pub fn fixture(name: &str) -> Option<GroupSpec> {
    let s2 = || alloc::vec![cycles(2, "(1 2)")];
    let c3 = || alloc::vec![cycles(3, "(1 2 3)")];
    let s3 = || alloc::vec![cycles(3, "(1 2 3)"), cycles(3, "(1 2)")];
    let gk = |h: Vec<Permutation>, k: &str, name: &str| {
        Some(named(
            build_gk(&h, &fixture(k)?).expect("fixture G_K"),
            name,
        ))
    };
    let spec = match name {
        "trivial" => GroupSpec::plain(name, machine(2, &["(1 2)"], &[]), &[]).ok()?,
        "cyclic" => {
            let mut spec = GroupSpec::plain(
                name,
                machine(3, &["(1 2 3)"], &[("r", "(1 2 3)", &["1", "1", "1"])]),
                &["r"],
            )
            .ok()?;
            spec.construction = Construction::Rooted;
            spec
        }
        "odometer" => GroupSpec::plain(
            name,
            machine(2, &["(1 2)"], &[("a", "(1 2)", &["1", "a"])]),
            &["a"],
        )
        .ok()?,
        "odometer3" => GroupSpec::plain(
            name,
            machine(3, &["(1 2 3)"], &[("a", "(1 2 3)", &["1", "1", "a"])]),
            &["a"],
        )
        .ok()?,
        "grigorchuk" => GroupSpec::plain(
            name,
            machine(
                2,
                &["(1 2)"],
                &[
                    ("a", "(1 2)", &["1", "1"]),
                    ("b", "()", &["a", "c"]),
                    ("c", "()", &["a", "d"]),
                    ("d", "()", &["1", "b"]),
                ],
            ),
            &["a", "b", "c", "d"],
        )
        .ok()?,
        "w2" => wreath_spec(name, 2, &["(1 2)"]),
        "w3c" => wreath_spec(name, 3, &["(1 2 3)"]),
        "w3s" => wreath_spec(name, 3, &["(1 2 3)", "(1 2)"]),
        "gk-trivial" => return gk(s2(), "trivial", name),
        "gk-odometer" => return gk(s2(), "odometer", name),
        "gk-odometer3" => return gk(c3(), "odometer3", name),
        "gk-s3-odometer3" => return gk(s3(), "odometer3", name),
        "gk-grigorchuk" => return gk(s2(), "grigorchuk", name),
        "gk-w2" => return gk(s2(), "w2", name),
        "gk-w3c" => return gk(c3(), "w3c", name),
        "gk-w3s" => return gk(s3(), "w3s", name),
        _ => return None,
    };
    Some(spec)
}

/// The whole catalog.
pub fn fixtures() -> Vec<GroupSpec> {
    FIXTURE_NAMES
        .iter()
        .map(|n| fixture(n).expect("catalog entry"))
        .collect()
}

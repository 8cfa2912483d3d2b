//! Finite-level computations on the congruence quotients `π_n(G)`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use num_bigint::BigUint;
use num_traits::One;

use crate::chain::StabilizerChain;
use crate::constructions::{self, GroupSpec};
use crate::error::{Error, Result};
use crate::groups;
use crate::order::{self, LogOrder};
use crate::perm::{Permutation, Point};
use crate::tree::{self, Vertex};

/// Default tolerance of the convergence diagnostic.
pub const DEFAULT_TOLERANCE: f64 = 0.02;

/// Default number of trailing level-to-level differences the diagnostic inspects.
pub const DEFAULT_WINDOW: usize = 3;

/// Chain of `π_n(G)` on the tree base.
pub fn quotient(spec: &GroupSpec, n: usize, cap: u64) -> Result<StabilizerChain> {
    spec.quotient(n, cap)
}

fn pow_big(m: usize, e: usize) -> BigUint {
    BigUint::from(m).pow(e as u32)
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionRecord {
    pub level: usize,
    pub order: BigUint,
    /// `log_m |π_n(G)|`.
    pub logm_index: LogOrder,
    /// `log_m |π_n(W_H)| = (m^n - 1)/(m - 1) · log_m |H|`.
    pub logm_wreath: LogOrder,
    pub ratio: f64,
    /// The ratio as a reduced fraction when both orders are powers of one prime.
    pub ratio_exact: Option<(u64, u64)>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DimensionSequence {
    pub name: String,
    pub m: usize,
    pub records: Vec<DimensionRecord>,
    pub window: usize,
    pub tolerance: f64,
    /// Largest `|ratio_n - ratio_{n-1}|` over the last `window` levels, if
    /// enough levels were computed.
    pub max_oscillation: Option<f64>,
}

impl DimensionSequence {
    /// Heuristic only: the tail of the sequence varies by less than the tolerance.
    pub fn strong_looking(&self) -> bool {
        self.max_oscillation.is_some_and(|o| o < self.tolerance)
    }
}

/// One record of the dimension sequence from an already known order.
pub fn dimension_record(spec: &GroupSpec, level: usize, order: BigUint) -> DimensionRecord {
    let m = spec.m as u64;
    let wreath = spec.wreath_order(level);
    let (ratio, ratio_exact) = order::log_ratio(&order, &wreath);
    DimensionRecord {
        level,
        logm_index: order::log_order(&order, m),
        logm_wreath: order::log_order(&wreath, m),
        ratio,
        ratio_exact,
        order,
    }
}

/// Assembles a sequence from per-level records (sorted by level).
pub fn dimension_from_records(
    spec: &GroupSpec,
    mut records: Vec<DimensionRecord>,
    window: usize,
    tolerance: f64,
) -> DimensionSequence {
    records.sort_by_key(|r| r.level);
    let max_oscillation = (window > 0 && records.len() > window).then(|| {
        records[records.len() - window - 1..]
            .windows(2)
            .map(|w| libm::fabs(w[1].ratio - w[0].ratio))
            .fold(0.0, f64::max)
    });
    DimensionSequence {
        name: spec.name.clone(),
        m: spec.m,
        records,
        window,
        tolerance,
        max_oscillation,
    }
}

/// Ratios `log|π_n(G)| / log|π_n(W_H)|` for `n = 1..=levels`.
pub fn dimension_sequence(
    spec: &GroupSpec,
    levels: usize,
    cap: u64,
    tolerance: f64,
) -> Result<DimensionSequence> {
    let records = (1..=levels)
        .map(|n| Ok(dimension_record(spec, n, quotient(spec, n, cap)?.order())))
        .collect::<Result<Vec<_>>>()?;
    Ok(dimension_from_records(
        spec,
        records,
        DEFAULT_WINDOW,
        tolerance,
    ))
}

#[derive(Clone, Debug, PartialEq)]
pub struct AbelianizationRecord {
    pub level: usize,
    pub order: BigUint,
    pub derived_order: BigUint,
    /// `|G_n : G_n'|`.
    pub index: BigUint,
    pub logm_index: LogOrder,
    pub log2_index: LogOrder,
    /// `#X - 1 - log_2 |G_n : G_n'|` with `#X = m^n`.
    pub easy_bound_slack: f64,
    /// Exact form of `|G_n : G_n'| <= 2^{#X - 1}`.
    pub easy_bound_holds: bool,
}

/// `|G : G'|` for the group of `chain`, a level-`level` quotient.
pub fn abelianization_of(
    chain: &StabilizerChain,
    level: usize,
    m: usize,
) -> Result<AbelianizationRecord> {
    let derived = groups::derived_subgroup(chain)?;
    let order = chain.order();
    let derived_order = derived.order();
    let index = &order / &derived_order;
    let points = chain.degree();
    let bound = BigUint::one() << points.saturating_sub(1);
    let log2_index = order::log_order(&index, 2);
    Ok(AbelianizationRecord {
        level,
        logm_index: order::log_order(&index, m as u64),
        easy_bound_slack: points as f64 - 1.0 - log2_index.value,
        easy_bound_holds: index <= bound,
        log2_index,
        order,
        derived_order,
        index,
    })
}

/// `log_m |G_n : G_n'|` with the easy-bound slack.
pub fn abelianization_index(spec: &GroupSpec, n: usize, cap: u64) -> Result<AbelianizationRecord> {
    abelianization_of(&quotient(spec, n, cap)?, n, spec.m)
}

/// Orbits of the group generated by `gens` on the aligned blocks of
/// `block` points (vertices of the level with that block size).
pub fn block_orbits(gens: &[Permutation], degree: usize, block: usize) -> Vec<Vec<Point>> {
    let count = degree / block;
    let blocked: Vec<Permutation> = gens
        .iter()
        .map(|g| {
            let images = (0..count)
                .map(|b| g.apply((b * block) as Point) / block as Point)
                .collect();
            Permutation::from_images(images).expect("group preserves the blocks")
        })
        .collect();
    groups::orbits(&blocked, 0..count as Point)
}

/// An ancestor orbit whose branching count is strictly between `m^k/2` and `m^k`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassificationGap {
    pub ancestor: usize,
    pub branches: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrbitStats {
    pub level: usize,
    pub window: usize,
    /// `#O_n`.
    pub orbits: usize,
    pub a: usize,
    pub b: usize,
    /// `#P_{n-k}`: orbits at level `n - k`.
    pub predecessor_orbits: usize,
    /// Number of level-`n` orbits below each level-`(n-k)` orbit.
    pub branching: Vec<usize>,
    pub gaps: Vec<ClassificationGap>,
    /// `#A_n + 2 #B_n` and `m^k #O_{n-k}`.
    pub counting: (usize, usize),
    pub logm_abelianization: LogOrder,
    pub abelianization_index: BigUint,
    /// `log_m |G_n : G_n'| / m^n`.
    pub value: f64,
    /// `m^{-k} + #B_n / m^n`.
    pub bound: f64,
    /// Exact form of `value <= bound`: `|G_n:G_n'| <= m^{m^{n-k} + #B_n}`.
    pub bound_holds: bool,
}

impl OrbitStats {
    pub fn counting_holds(&self) -> bool {
        self.counting.0 <= self.counting.1
    }
}

/// A/B classification of the level-`n` orbits against their level-`(n-k)` ancestors.
pub fn orbit_stats_of(chain: &StabilizerChain, m: usize, n: usize, k: usize) -> Result<OrbitStats> {
    if k == 0 || k > n {
        return Err(Error::LevelMismatch { level: k, n });
    }
    orbit_stats_with(chain, &abelianization_of(chain, n, m)?, m, k)
}

/// [`orbit_stats_of`] with the abelianization already computed.
pub fn orbit_stats_with(
    chain: &StabilizerChain,
    record: &AbelianizationRecord,
    m: usize,
    k: usize,
) -> Result<OrbitStats> {
    let n = record.level;
    if k == 0 || k > n {
        return Err(Error::LevelMismatch { level: k, n });
    }
    let degree = chain.degree();
    let gens = chain.generators();
    let leaves = groups::orbits(gens, 0..degree as Point);
    let span = m.pow(k as u32);
    let ancestors = block_orbits(gens, degree, span);
    let mut label = alloc::vec![0usize; degree / span];
    for (i, orbit) in ancestors.iter().enumerate() {
        for &b in orbit {
            label[b as usize] = i;
        }
    }
    let mut branching = alloc::vec![0usize; ancestors.len()];
    for orbit in &leaves {
        branching[label[orbit[0] as usize / span]] += 1;
    }
    let mut a = 0;
    let mut b = 0;
    let mut gaps = Vec::new();
    for (ancestor, &branches) in branching.iter().enumerate() {
        if branches == span {
            a += branches;
        } else {
            b += branches;
            if 2 * branches > span {
                gaps.push(ClassificationGap { ancestor, branches });
            }
        }
    }
    let level_size = m.pow(n as u32);
    let exponent = m.pow((n - k) as u32) + b;
    Ok(OrbitStats {
        level: n,
        window: k,
        orbits: leaves.len(),
        a,
        b,
        predecessor_orbits: ancestors.len(),
        counting: (a + 2 * b, span * ancestors.len()),
        value: record.logm_index.value / level_size as f64,
        bound: 1.0 / span as f64 + b as f64 / level_size as f64,
        bound_holds: record.index <= pow_big(m, exponent),
        logm_abelianization: record.logm_index.clone(),
        abelianization_index: record.index.clone(),
        branching,
        gaps,
    })
}

pub fn orbit_stats(spec: &GroupSpec, n: usize, k: usize, cap: u64) -> Result<OrbitStats> {
    orbit_stats_of(&quotient(spec, n, cap)?, spec.m, n, k)
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerfectnessRow {
    pub level: usize,
    /// `log_m |G_n : G_n'| / m^n`.
    pub value: f64,
    /// The value as a fraction when the logarithm is exact.
    pub value_exact: Option<(BigUint, BigUint)>,
    pub bound: f64,
    pub bound_holds: bool,
    pub b: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PerfectnessScan {
    pub name: String,
    pub window: usize,
    pub rows: Vec<PerfectnessRow>,
}

impl PerfectnessScan {
    pub fn all_bounded(&self) -> bool {
        self.rows.iter().all(|r| r.bound_holds)
    }

    /// Whether values are non-increasing from level `from` on.
    pub fn decreasing_from(&self, from: usize) -> bool {
        let tail: Vec<&PerfectnessRow> = self.rows.iter().filter(|r| r.level >= from).collect();
        tail.windows(2).all(|w| less_or_equal(w[1], w[0]))
    }
}

fn less_or_equal(a: &PerfectnessRow, b: &PerfectnessRow) -> bool {
    match (&a.value_exact, &b.value_exact) {
        (Some((an, ad)), Some((bn, bd))) => an * bd <= bn * ad,
        _ => a.value <= b.value,
    }
}

pub fn perfectness_row(stats: &OrbitStats, m: usize) -> PerfectnessRow {
    let level_size = pow_big(m, stats.level);
    PerfectnessRow {
        level: stats.level,
        value: stats.value,
        value_exact: stats
            .logm_abelianization
            .exact
            .map(|(num, den)| (BigUint::from(num), BigUint::from(den) * &level_size)),
        bound: stats.bound,
        bound_holds: stats.bound_holds,
        b: stats.b,
    }
}

/// `log_m|G_n:G_n'|/m^n` against `m^{-k} + #B_n/m^n` for `n = k..=levels`.
pub fn perfectness_scan(
    spec: &GroupSpec,
    levels: usize,
    k: usize,
    cap: u64,
) -> Result<PerfectnessScan> {
    let rows = (k.max(1)..=levels)
        .map(|n| Ok(perfectness_row(&orbit_stats(spec, n, k, cap)?, spec.m)))
        .collect::<Result<Vec<_>>>()?;
    Ok(PerfectnessScan {
        name: spec.name.clone(),
        window: k,
        rows,
    })
}

/// Whether `π_n(G)` is transitive on level `j`, for `j = 1..=n`.
pub fn transitivity_of(gens: &[Permutation], m: usize, n: usize) -> Vec<bool> {
    let degree = m.pow(n as u32);
    (1..=n)
        .map(|j| block_orbits(gens, degree, m.pow((n - j) as u32)).len() == 1)
        .collect()
}

/// Single-orbit test at each level `1..=n`.
pub fn level_transitivity(spec: &GroupSpec, n: usize, cap: u64) -> Result<Vec<bool>> {
    Ok(transitivity_of(&spec.realize(n, cap)?, spec.m, n))
}

/// Chain of `π_n(G)` whose tail after `cut` levels is the pointwise stabilizer
/// of every leaf outside the subtree of `v`.
fn rigid_chain(gens: &[Permutation], v: &Vertex, n: usize) -> Result<(StabilizerChain, usize)> {
    let (items, cut) = tree::tree_base_outside_first(v, n);
    let chain = StabilizerChain::build_with_base(v.m().pow(n as u32), gens, &items)?;
    Ok((chain, cut))
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidEntry {
    pub vertex: Vertex,
    pub order: BigUint,
}

/// Order of the pointwise stabilizer in `π_n(G)` of all leaves outside `v`.
pub fn local_rigid(spec: &GroupSpec, v: &Vertex, n: usize, cap: u64) -> Result<RigidEntry> {
    local_rigid_of(&spec.realize(n, cap)?, v, n)
}

pub fn local_rigid_of(gens: &[Permutation], v: &Vertex, n: usize) -> Result<RigidEntry> {
    if v.level() > n {
        return Err(Error::LevelMismatch {
            level: v.level(),
            n,
        });
    }
    let (chain, cut) = rigid_chain(gens, v, n)?;
    Ok(RigidEntry {
        vertex: v.clone(),
        order: chain.order_from(cut),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RigidReport {
    pub outer: usize,
    pub level: usize,
    pub entries: Vec<RigidEntry>,
    /// Order of the group generated by all local rigid subgroups.
    pub order: BigUint,
    pub product: BigUint,
    pub quotient_order: BigUint,
    /// `log |Rist quotient| / log |π_n(G)|`.
    pub ratio: f64,
}

impl RigidReport {
    pub fn product_holds(&self) -> bool {
        self.order == self.product
    }

    pub fn orders_equal(&self) -> bool {
        self.entries.windows(2).all(|w| w[0].order == w[1].order)
    }
}

/// The level-`k` rigid stabilizer in `π_n(G)` and its factorization over vertices.
pub fn rigid_level(spec: &GroupSpec, k: usize, n: usize, cap: u64) -> Result<RigidReport> {
    if k > n {
        return Err(Error::LevelMismatch { level: k, n });
    }
    let gens = spec.realize(n, cap)?;
    let degree = spec.m.pow(n as u32);
    let base = tree::tree_base(spec.m, n);
    let mut rist = StabilizerChain::trivial_with_base(degree, &base);
    let mut entries = Vec::new();
    let mut product = BigUint::one();
    for v in tree::level_vertices(spec.m, k, cap)? {
        let (chain, cut) = rigid_chain(&gens, &v, n)?;
        let order = chain.order_from(cut);
        for g in chain.stabilizer_generators(cut) {
            rist.add_generator(&g)?;
        }
        product *= &order;
        entries.push(RigidEntry { vertex: v, order });
    }
    let quotient_order = StabilizerChain::build_with_base(degree, &gens, &base)?.order();
    let order = rist.order();
    Ok(RigidReport {
        outer: k,
        level: n,
        ratio: order::log_ratio(&order, &quotient_order).0,
        entries,
        order,
        product,
        quotient_order,
    })
}

/// Outcome of one of the `G_K` checks at one level.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: &'static str,
    pub passed: bool,
    pub witness: Option<String>,
}

impl Check {
    fn pass(name: &'static str) -> Self {
        Self {
            name,
            passed: true,
            witness: None,
        }
    }

    fn fail(name: &'static str, witness: String) -> Self {
        Self {
            name,
            passed: false,
            witness: Some(witness),
        }
    }

    fn from(name: &'static str, ok: bool, witness: impl FnOnce() -> String) -> Self {
        if ok {
            Self::pass(name)
        } else {
            Self::fail(name, witness())
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct GkLevel {
    pub level: usize,
    pub order: BigUint,
    pub checks: Vec<Check>,
    pub center_order: BigUint,
    pub ratio: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct GkReport {
    pub name: String,
    pub levels: Vec<GkLevel>,
}

impl GkReport {
    pub fn passed(&self) -> bool {
        self.levels
            .iter()
            .all(|l| l.checks.iter().all(|c| c.passed))
    }

    pub fn failures(&self) -> impl Iterator<Item = (usize, &Check)> {
        self.levels.iter().flat_map(|l| {
            l.checks
                .iter()
                .filter(|c| !c.passed)
                .map(move |c| (l.level, c))
        })
    }
}

fn short(p: &Permutation) -> String {
    let mut s = p.to_cycles();
    if s.len() > 120 {
        s.truncate(117);
        s.push_str("...");
    }
    s
}

/// Verifies the structure of `G_K = ⟨H, D_m(K)⟩` in `π_n` for `n = 2..=levels`.
pub fn verify_gk(
    h: &[Permutation],
    k: &GroupSpec,
    levels: usize,
    cap: u64,
    budget: u64,
) -> Result<GkReport> {
    let gk = constructions::build_gk(h, k)?;
    let m = gk.m;
    let h_chain = StabilizerChain::build(m, h)?;
    let z_h = groups::center(&h_chain, budget)?;
    let mut out = Vec::new();
    for n in 2..=levels {
        tree::level_size(m, n, cap)?;
        let degree = m.pow(n as u32);
        let base = tree::tree_base(m, n);
        let rooted: Vec<Permutation> = h
            .iter()
            .filter(|g| !g.is_identity())
            .map(|g| constructions::rooted_permutation(m, g, n))
            .collect();
        let k_gens = k.realize(n - 1, cap)?;
        let k_chain =
            StabilizerChain::build_with_base(degree / m, &k_gens, &tree::tree_base(m, n - 1))?;
        let diagonal: Vec<Permutation> = k_gens
            .iter()
            .map(|g| constructions::diagonal_permutation(m, g))
            .collect();
        let mut gens = rooted.clone();
        gens.extend(diagonal.iter().cloned());
        let g = StabilizerChain::build_with_base(degree, &gens, &base)?;
        let mut checks = Vec::new();

        // (a) level-transitivity
        let transitive = transitivity_of(&gens, m, n);
        checks.push(Check::from(
            "level_transitive",
            transitive.iter().all(|&t| t),
            || {
                let j = transitive.iter().position(|&t| !t).unwrap_or(0) + 1;
                format!("not transitive on level {j}")
            },
        ));

        // (b) rooted H normal, commuting with the diagonal generators
        let h_image = StabilizerChain::build_with_base(degree, &rooted, &base)?;
        let normal = groups::is_normal(&g, &h_image)?;
        checks.push(Check::from("rooted_normal", normal, || {
            String::from("a conjugate of a rooted generator leaves H")
        }));
        let clash = rooted
            .iter()
            .flat_map(|r| diagonal.iter().map(move |d| (r, d)))
            .find(|(r, d)| !r.commutator(d).is_identity());
        checks.push(Check::from(
            "rooted_commutes_with_diagonal",
            clash.is_none(),
            || {
                let (r, d) = clash.unwrap();
                format!("[{}, {}] != 1", short(r), short(d))
            },
        ));

        // (c) |π_n(G_K)| = |H| |π_{n-1}(K)|
        let expected = h_chain.order() * k_chain.order();
        let order = g.order();
        checks.push(Check::from("index_law", order == expected, || {
            format!("|pi_n(G_K)| = {order}, |H| |pi_(n-1)(K)| = {expected}")
        }));

        // (d) trivial rigid stabilizers at level 1
        let mut rigid_witness = None;
        for v in tree::level_vertices(m, 1, cap)? {
            let entry = local_rigid_of(&gens, &v, n)?;
            if !entry.order.is_one() {
                rigid_witness = Some(format!("rist({v}) has order {}", entry.order));
                break;
            }
        }
        checks.push(match rigid_witness {
            None => Check::pass("rigid_level_one_trivial"),
            Some(w) => Check::fail("rigid_level_one_trivial", w),
        });

        // (e) Z(π_n(G_K)) = Z(H) x diag(Z(π_{n-1}(K)))
        let z_g = groups::center(&g, budget)?;
        let z_k = groups::center(&k_chain, budget)?;
        let mut expected_gens: Vec<Permutation> = z_h
            .generators()
            .iter()
            .map(|z| constructions::rooted_permutation(m, z, n))
            .collect();
        expected_gens.extend(
            z_k.generators()
                .iter()
                .map(|z| constructions::diagonal_permutation(m, z)),
        );
        let z_expected = StabilizerChain::build_with_base(degree, &expected_gens, &base)?;
        let mut center_witness = None;
        if z_g.order() != z_expected.order() {
            center_witness = Some(format!(
                "|Z| = {}, |Z(H)| |Z(K)| = {}",
                z_g.order(),
                z_expected.order()
            ));
        } else if let Some(x) = expected_gens
            .iter()
            .find(|x| !z_g.contains(x).unwrap_or(false))
        {
            center_witness = Some(format!("{} is not central", short(x)));
        } else if let Some(x) = z_g
            .generators()
            .iter()
            .find(|x| !z_expected.contains(x).unwrap_or(false))
        {
            center_witness = Some(format!("central {} is not in Z(H) x diag Z(K)", short(x)));
        }
        checks.push(match center_witness {
            None => Check::pass("center"),
            Some(w) => Check::fail("center", w),
        });

        // (f) g = h d(k) maps to k: kernel rooted H, image π_{n-1}(K)
        checks.push(branch_action_check(
            m, n, &rooted, &diagonal, &k_gens, &g, &h_chain, &k_chain,
        )?);

        out.push(GkLevel {
            level: n,
            ratio: order::log_ratio(&order, &gk.wreath_order(n)).0,
            center_order: z_g.order(),
            order,
            checks,
        });
    }
    Ok(GkReport {
        name: gk.name,
        levels: out,
    })
}

/// Builds the graph of `h d(k) ↦ k` on `m^n + m^{n-1}` points; it is a
/// function iff the graph has the order of its first projection.
#[allow(clippy::too_many_arguments)]
fn branch_action_check(
    m: usize,
    n: usize,
    rooted: &[Permutation],
    diagonal: &[Permutation],
    k_gens: &[Permutation],
    g: &StabilizerChain,
    h_chain: &StabilizerChain,
    k_chain: &StabilizerChain,
) -> Result<Check> {
    let degree = m.pow(n as u32);
    let lower = degree / m;
    let id_lower = Permutation::identity(lower);
    let mut pairs: Vec<Permutation> = rooted.iter().map(|r| r.direct_sum(&id_lower)).collect();
    pairs.extend(diagonal.iter().zip(k_gens).map(|(d, k)| d.direct_sum(k)));
    let mut items: Vec<_> = tree::tree_base(m, n - 1)
        .into_iter()
        .map(|mut b| {
            b.start += degree as Point;
            b
        })
        .collect();
    let cut = items.len();
    items.extend(tree::tree_base(m, n));
    let graph = StabilizerChain::build_with_base(degree + lower, &pairs, &items)?;
    let kernel_order = graph.order_from(cut);
    let image_order = graph.order() / &kernel_order;
    if graph.order() != g.order() {
        return Ok(Check::fail(
            "branch_action",
            format!(
                "g -> section is not well defined: graph order {} vs {}",
                graph.order(),
                g.order()
            ),
        ));
    }
    if kernel_order != h_chain.order() || image_order != k_chain.order() {
        return Ok(Check::fail(
            "branch_action",
            format!(
                "kernel order {kernel_order} (|H| = {}), image order {image_order} (|pi_(n-1)(K)| = {})",
                h_chain.order(),
                k_chain.order()
            ),
        ));
    }
    let kernel = graph.tail(cut);
    for r in rooted {
        if !kernel.contains(&r.direct_sum(&id_lower))? {
            return Ok(Check::fail(
                "branch_action",
                format!("rooted {} not in the kernel", short(r)),
            ));
        }
    }
    Ok(Check::pass("branch_action"))
}

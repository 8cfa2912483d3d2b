//! Command execution.

use std::ops::RangeInclusive;

use num_bigint::BigUint;
use rayon::prelude::*;
use serde_json::{json, Value};
use treedim_core::analysis::{self, PerfectnessScan};
use treedim_core::constructions::{Construction, GroupSpec};
use treedim_core::machine;
use treedim_core::{groups, order, Error as CoreError, Permutation, StabilizerChain, Vertex};

use crate::cache::{self, Cache};
use crate::config::{load_spec, Command, ConfigError, RunConfig};
use crate::report::{fmt_float, log_json, log_text, num, Report, Section};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_ERROR: i32 = 2;

#[derive(Debug)]
pub struct Outcome {
    pub code: i32,
    pub report: Report,
}

struct Ctx<'a> {
    cfg: &'a RunConfig,
    cache: Option<Cache>,
}

/// Runs `cfg` to completion. Errors are folded into the report and exit code.
pub fn run(cfg: &RunConfig) -> Outcome {
    let mut report = Report::new(cfg.command.name());
    let cache = match &cfg.cache_dir {
        Some(dir) => match Cache::open(dir) {
            Ok(c) => Some(c),
            Err(e) => return error(report, e.to_string()),
        },
        None => None,
    };
    let ctx = Ctx { cfg, cache };
    let result = match &cfg.command {
        Command::VerifyGk { h, k } => verify_gk(&ctx, h, k, &mut report),
        Command::Check => check(&ctx, &mut report),
        command => (|| {
            if cfg.specs.is_empty() {
                return Err(ConfigError::Invalid(String::from("no --spec given")));
            }
            let specs = cfg
                .specs
                .iter()
                .map(|s| load_spec(s))
                .collect::<Result<Vec<_>, _>>()?;
            for spec in &specs {
                cfg.check_levels(spec.m)?;
            }
            for spec in &specs {
                match command {
                    Command::Dim => dim(&ctx, spec, &mut report),
                    Command::Quotient => quotient(&ctx, spec, &mut report),
                    Command::Abel => abel(&ctx, spec, &mut report),
                    Command::Orbits => orbits(&ctx, spec, &mut report),
                    Command::Rist { vertex } => rist(&ctx, spec, vertex.as_deref(), &mut report),
                    _ => unreachable!(),
                }
                if report.truncated {
                    break;
                }
            }
            Ok(())
        })(),
    };
    if let Err(e) = result {
        return error(report, e.to_string());
    }
    let code = if report.truncated || !report.errors.is_empty() {
        EXIT_ERROR
    } else if report.failed {
        EXIT_FAILED
    } else {
        EXIT_OK
    };
    Outcome { code, report }
}

fn error(mut report: Report, message: String) -> Outcome {
    report.errors.push(message);
    Outcome {
        code: EXIT_ERROR,
        report,
    }
}

/// Maps `f` over levels in parallel and keeps the prefix before the first error.
fn per_level<T: Send>(
    levels: RangeInclusive<usize>,
    report: &mut Report,
    f: impl Fn(usize) -> Result<T, CoreError> + Sync,
) -> Vec<T> {
    let results: Vec<(usize, Result<T, CoreError>)> =
        levels.into_par_iter().map(|n| (n, f(n))).collect();
    let mut out = Vec::new();
    for (n, r) in results {
        match r {
            Ok(t) => out.push(t),
            Err(e) => {
                report.truncated = true;
                report.errors.push(format!("level {n}: {e}"));
                break;
            }
        }
    }
    out
}

impl Ctx<'_> {
    fn cap(&self) -> u64 {
        self.cfg.cap_points
    }

    fn order(&self, spec: &GroupSpec, hash: &str, n: usize) -> Result<BigUint, CoreError> {
        if let Some(order) = self.cache.as_ref().and_then(|c| c.get(hash, n)) {
            return Ok(order);
        }
        let order = analysis::quotient(spec, n, self.cap())?.order();
        if let Some(c) = &self.cache {
            // the store is best effort; a failed write only costs a recomputation
            let _ = c.put(hash, n, &order);
        }
        Ok(order)
    }
}

fn opt_pair(p: Option<(u64, u64)>) -> Value {
    p.map_or(Value::Null, |(a, b)| json!([a, b]))
}

fn dim(ctx: &Ctx, spec: &GroupSpec, report: &mut Report) {
    let hash = cache::spec_hash(spec);
    let records = per_level(1..=ctx.cfg.levels, report, |n| {
        Ok(analysis::dimension_record(
            spec,
            n,
            ctx.order(spec, &hash, n)?,
        ))
    });
    let seq = analysis::dimension_from_records(
        spec,
        records,
        analysis::DEFAULT_WINDOW,
        ctx.cfg.tolerance,
    );
    let mut s = Section::new(
        &spec.name,
        &[
            "level",
            "logm_index_num",
            "logm_index_den_note",
            "logm_wreath",
            "ratio",
        ],
    );
    s.set("m", json!(spec.m));
    s.set(
        "levels",
        Value::Array(
            seq.records
                .iter()
                .map(|r| {
                    json!({
                        "level": r.level,
                        "order": r.order.to_string(),
                        "logm_index": log_json(&r.logm_index),
                        "logm_wreath": log_json(&r.logm_wreath),
                        "ratio": num(r.ratio),
                        "ratio_exact": opt_pair(r.ratio_exact),
                    })
                })
                .collect(),
        ),
    );
    s.set(
        "diagnostic",
        json!({
            "window": seq.window,
            "tolerance": num(seq.tolerance),
            "max_oscillation": seq.max_oscillation.map_or(Value::Null, num),
            "strong_looking": seq.strong_looking(),
        }),
    );
    for r in &seq.records {
        let (index_num, index_den) = match r.logm_index.exact {
            Some((n, d)) => (n.to_string(), d.to_string()),
            None => (fmt_float(r.logm_index.value), String::from("float")),
        };
        s.rows.push(vec![
            r.level.to_string(),
            index_num,
            index_den,
            log_text(&r.logm_wreath),
            fmt_float(r.ratio),
        ]);
    }
    s.notes.push(format!(
        "max oscillation over the last {} levels: {} (tolerance {}, strong-looking: {})",
        seq.window,
        seq.max_oscillation.map_or(String::from("n/a"), fmt_float),
        fmt_float(seq.tolerance),
        seq.strong_looking()
    ));
    report.sections.push(s);
}

fn quotient(ctx: &Ctx, spec: &GroupSpec, report: &mut Report) {
    let hash = cache::spec_hash(spec);
    let orders = per_level(1..=ctx.cfg.levels, report, |n| {
        Ok((n, ctx.order(spec, &hash, n)?))
    });
    let mut s = Section::new(&spec.name, &["level", "order", "logm_order"]);
    s.set("m", json!(spec.m));
    let mut rows = Vec::new();
    for (n, o) in &orders {
        let log = order::log_order(o, spec.m as u64);
        rows.push(json!({"level": n, "order": o.to_string(), "logm_order": log_json(&log)}));
        s.rows
            .push(vec![n.to_string(), o.to_string(), log_text(&log)]);
    }
    s.set("levels", Value::Array(rows));
    report.sections.push(s);
}

fn abel(ctx: &Ctx, spec: &GroupSpec, report: &mut Report) {
    let k = ctx.cfg.window;
    let rows = per_level(1..=ctx.cfg.levels, report, |n| {
        let chain = analysis::quotient(spec, n, ctx.cap())?;
        let record = analysis::abelianization_of(&chain, n, spec.m)?;
        let stats = if n >= k && k >= 1 {
            Some(analysis::orbit_stats_with(&chain, &record, spec.m, k)?)
        } else {
            None
        };
        Ok((record, stats))
    });
    let scan = PerfectnessScan {
        name: spec.name.clone(),
        window: k,
        rows: rows
            .iter()
            .filter_map(|(_, s)| s.as_ref().map(|s| analysis::perfectness_row(s, spec.m)))
            .collect(),
    };
    let mut s = Section::new(
        &spec.name,
        &[
            "level",
            "logm_index",
            "log2_index",
            "easy_bound_slack",
            "easy_bound_holds",
            "value",
            "bound",
            "bound_holds",
        ],
    );
    s.set("m", json!(spec.m));
    s.set("window", json!(k));
    let mut levels = Vec::new();
    for (r, stats) in &rows {
        let row = scan.rows.iter().find(|p| p.level == r.level);
        levels.push(json!({
            "level": r.level,
            "order": r.order.to_string(),
            "derived_order": r.derived_order.to_string(),
            "index": r.index.to_string(),
            "logm_index": log_json(&r.logm_index),
            "log2_index": log_json(&r.log2_index),
            "easy_bound_slack": num(r.easy_bound_slack),
            "easy_bound_holds": r.easy_bound_holds,
            "value": row.map_or(Value::Null, |p| num(p.value)),
            "value_exact": row.and_then(|p| p.value_exact.as_ref()).map_or(Value::Null, |(a, b)| json!([a.to_string(), b.to_string()])),
            "bound": stats.as_ref().map_or(Value::Null, |s| num(s.bound)),
            "bound_holds": stats.as_ref().map(|s| s.bound_holds),
            "b": stats.as_ref().map(|s| s.b),
        }));
        s.rows.push(vec![
            r.level.to_string(),
            log_text(&r.logm_index),
            log_text(&r.log2_index),
            fmt_float(r.easy_bound_slack),
            r.easy_bound_holds.to_string(),
            row.map_or(String::from("-"), |p| fmt_float(p.value)),
            stats
                .as_ref()
                .map_or(String::from("-"), |s| fmt_float(s.bound)),
            stats
                .as_ref()
                .map_or(String::from("-"), |s| s.bound_holds.to_string()),
        ]);
        if !r.easy_bound_holds || stats.as_ref().is_some_and(|s| !s.bound_holds) {
            report.failed = true;
        }
    }
    let decreasing = scan.decreasing_from(3);
    s.set("levels", Value::Array(levels));
    s.set("decreasing_from_level_3", json!(decreasing));
    s.notes
        .push(format!("values non-increasing from level 3: {decreasing}"));
    report.sections.push(s);
}

fn orbits(ctx: &Ctx, spec: &GroupSpec, report: &mut Report) {
    let k = ctx.cfg.window;
    if k == 0 || k > ctx.cfg.levels {
        report
            .errors
            .push(format!("--window {k} must lie in 1..=levels"));
        return;
    }
    let counts = per_level(1..=ctx.cfg.levels, report, |n| {
        let gens = spec.realize(n, ctx.cap())?;
        Ok(groups::orbits(&gens, 0..spec.m.pow(n as u32) as u32).len())
    });
    let stats = per_level(k..=ctx.cfg.levels, report, |n| {
        analysis::orbit_stats_of(&analysis::quotient(spec, n, ctx.cap())?, spec.m, n, k)
    });
    let mut s = Section::new(
        &spec.name,
        &[
            "level",
            "orbits",
            "a",
            "b",
            "predecessor_orbits",
            "counting_lhs",
            "counting_rhs",
            "gaps",
            "value",
            "bound",
            "bound_holds",
        ],
    );
    s.set("m", json!(spec.m));
    s.set("window", json!(k));
    let density_ok = counts.windows(2).all(|w| w[1] <= spec.m * w[0]);
    let mut levels = Vec::new();
    for st in &stats {
        levels.push(json!({
            "level": st.level,
            "orbits": st.orbits,
            "a": st.a,
            "b": st.b,
            "predecessor_orbits": st.predecessor_orbits,
            "branching": st.branching,
            "counting": [st.counting.0, st.counting.1],
            "counting_holds": st.counting_holds(),
            "classification_gaps": st.gaps.iter().map(|g| json!({"ancestor": g.ancestor, "branches": g.branches})).collect::<Vec<_>>(),
            "logm_abelianization": log_json(&st.logm_abelianization),
            "value": num(st.value),
            "bound": num(st.bound),
            "bound_holds": st.bound_holds,
        }));
        s.rows.push(vec![
            st.level.to_string(),
            st.orbits.to_string(),
            st.a.to_string(),
            st.b.to_string(),
            st.predecessor_orbits.to_string(),
            st.counting.0.to_string(),
            st.counting.1.to_string(),
            st.gaps.len().to_string(),
            fmt_float(st.value),
            fmt_float(st.bound),
            st.bound_holds.to_string(),
        ]);
        if !st.counting_holds() || !st.bound_holds {
            report.failed = true;
        }
        if !st.gaps.is_empty() {
            s.notes.push(format!(
                "level {}: classification gap, {} ancestor orbit(s) branch into a count in (m^k/2, m^k)",
                st.level,
                st.gaps.len()
            ));
        }
    }
    if !density_ok {
        report.failed = true;
    }
    s.set("orbit_counts", json!(counts));
    s.set("density_non_increasing", json!(density_ok));
    s.set("levels", Value::Array(levels));
    s.notes
        .push(format!("#O_n/m^n non-increasing: {density_ok}"));
    report.sections.push(s);
}

fn rist(ctx: &Ctx, spec: &GroupSpec, vertex: Option<&str>, report: &mut Report) {
    let (k, n) = (ctx.cfg.window, ctx.cfg.levels);
    let mut s = Section::new(&spec.name, &["vertex", "order"]);
    s.set("m", json!(spec.m));
    s.set("outer_level", json!(k));
    s.set("level", json!(n));
    if let Some(text) = vertex {
        match Vertex::parse(spec.m, text)
            .and_then(|v| analysis::local_rigid(spec, &v, n, ctx.cap()))
        {
            Ok(entry) => {
                s.set(
                    "vertex",
                    json!({"vertex": entry.vertex.to_string(), "order": entry.order.to_string()}),
                );
                s.notes.push(format!(
                    "rist({}) in pi_{n}: order {}",
                    entry.vertex, entry.order
                ));
            }
            Err(e) => {
                report.errors.push(e.to_string());
                report.truncated = matches!(e, CoreError::ResourceLimit { .. });
                report.sections.push(s);
                return;
            }
        }
    }
    match analysis::rigid_level(spec, k, n, ctx.cap()) {
        Ok(r) => {
            for e in &r.entries {
                s.rows.push(vec![e.vertex.to_string(), e.order.to_string()]);
            }
            s.set(
                "entries",
                Value::Array(
                    r.entries
                        .iter()
                        .map(|e| json!({"vertex": e.vertex.to_string(), "order": e.order.to_string()}))
                        .collect(),
                ),
            );
            s.set("order", json!(r.order.to_string()));
            s.set("product", json!(r.product.to_string()));
            s.set("product_holds", json!(r.product_holds()));
            s.set("orders_equal", json!(r.orders_equal()));
            s.set("quotient_order", json!(r.quotient_order.to_string()));
            s.set("ratio", num(r.ratio));
            s.notes.push(format!(
                "Rist({k}) in pi_{n}: order {}, product of local orders {}, ratio {}",
                r.order,
                r.product,
                fmt_float(r.ratio)
            ));
            if !r.product_holds() {
                report.failed = true;
            }
        }
        Err(e) => {
            report.truncated = matches!(e, CoreError::ResourceLimit { .. });
            report.errors.push(e.to_string());
        }
    }
    report.sections.push(s);
}

fn verify_gk(ctx: &Ctx, h: &[String], k: &str, report: &mut Report) -> Result<(), ConfigError> {
    let k = load_spec(k)?;
    ctx.cfg.check_levels(k.m)?;
    let h = h
        .iter()
        .map(|t| {
            Permutation::from_cycles(k.m, t)
                .map_err(|e| ConfigError::Invalid(format!("--H {t:?}: {e}")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if h.is_empty() {
        return Err(ConfigError::Invalid(String::from("--H is required")));
    }
    let rep = match analysis::verify_gk(
        &h,
        &k,
        ctx.cfg.levels,
        ctx.cap(),
        groups::DEFAULT_NODE_BUDGET,
    ) {
        Ok(r) => r,
        Err(CoreError::NotTransitive { orbits }) => {
            return Err(ConfigError::Invalid(format!(
                "H not transitive on {{1..{}}} ({orbits} orbits)",
                k.m
            )))
        }
        Err(e) => {
            report.truncated = matches!(e, CoreError::ResourceLimit { .. });
            report.errors.push(e.to_string());
            return Ok(());
        }
    };
    let mut s = Section::new(&rep.name, &["level", "check", "passed", "witness"]);
    s.set("m", json!(k.m));
    s.set(
        "h",
        json!(h.iter().map(|p| p.to_cycles()).collect::<Vec<_>>()),
    );
    s.set("k", json!(k.name));
    let mut levels = Vec::new();
    for l in &rep.levels {
        levels.push(json!({
            "level": l.level,
            "order": l.order.to_string(),
            "center_order": l.center_order.to_string(),
            "ratio": num(l.ratio),
            "checks": l.checks.iter().map(|c| json!({"name": c.name, "passed": c.passed, "witness": c.witness})).collect::<Vec<_>>(),
        }));
        for c in &l.checks {
            s.rows.push(vec![
                l.level.to_string(),
                c.name.to_string(),
                c.passed.to_string(),
                c.witness.clone().unwrap_or_default(),
            ]);
        }
    }
    s.set("levels", Value::Array(levels));
    s.set("passed", json!(rep.passed()));
    report.failed |= !rep.passed();
    report.sections.push(s);
    Ok(())
}

struct CheckRow {
    check: String,
    level: usize,
    passed: bool,
    detail: String,
}

fn row(
    check: impl Into<String>,
    level: usize,
    passed: bool,
    detail: impl Into<String>,
) -> CheckRow {
    CheckRow {
        check: check.into(),
        level,
        passed,
        detail: detail.into(),
    }
}

/// The invariant suite for one spec at levels `1..=levels`.
fn check_spec(spec: &GroupSpec, levels: usize, cap: u64) -> Result<Vec<CheckRow>, CoreError> {
    let m = spec.m;
    let mut rows = Vec::new();
    let mut prev_orbits: Option<usize> = None;
    let mut prev_log: Option<f64> = None;
    let mut values = Vec::new();
    for n in 1..=levels {
        let chain = analysis::quotient(spec, n, cap)?;
        let order = chain.order();
        let record = analysis::abelianization_of(&chain, n, m)?;
        rows.push(row(
            "easy_bound",
            n,
            record.easy_bound_holds,
            format!("slack {}", fmt_float(record.easy_bound_slack)),
        ));
        let dim = analysis::dimension_record(spec, n, order.clone());
        let monotone = prev_log.is_none_or(|p| dim.logm_index.value >= p - 1e-9);
        rows.push(row(
            "dimension_ratio",
            n,
            monotone && (0.0..=1.0 + 1e-12).contains(&dim.ratio),
            format!("ratio {}", fmt_float(dim.ratio)),
        ));
        prev_log = Some(dim.logm_index.value);
        for k in 1..=n.min(3) {
            let st = analysis::orbit_stats_with(&chain, &record, m, k)?;
            rows.push(row(
                format!("counting_k{k}"),
                n,
                st.counting_holds(),
                format!("{} <= {}", st.counting.0, st.counting.1),
            ));
            if k == 1 {
                if let Some(p) = prev_orbits {
                    rows.push(row(
                        "orbit_density",
                        n,
                        st.orbits <= m * p,
                        format!("#O_n = {}, #O_(n-1) = {p}", st.orbits),
                    ));
                }
                prev_orbits = Some(st.orbits);
                values.push(analysis::perfectness_row(&st, m));
            }
        }
        let rigid = analysis::rigid_level(spec, 1, n, cap)?;
        rows.push(row(
            "rigid_product",
            n,
            rigid.product_holds(),
            format!("{} vs {}", rigid.order, rigid.product),
        ));
        match &spec.construction {
            Construction::GK { h, k } => {
                let h_order = StabilizerChain::build(m, h)?.order();
                let below = if n == 1 {
                    BigUint::from(1u32)
                } else {
                    k.quotient(n - 1, cap)?.order()
                };
                let expected = h_order * below;
                rows.push(row(
                    "index_law",
                    n,
                    order == expected,
                    format!("{order} vs {expected}"),
                ));
            }
            Construction::WreathFull => {
                let expected = spec.wreath_order(n);
                rows.push(row(
                    "wreath_order",
                    n,
                    order == expected,
                    format!("{order} vs {expected}"),
                ));
            }
            Construction::Plain | Construction::Rooted => {
                let report = machine::self_similarity_check(&spec.generators, n, cap)?;
                rows.push(row(
                    "self_similar",
                    n,
                    report.passed(),
                    format!("{} failures", report.failures.len()),
                ));
            }
            Construction::Diagonal(_) => {}
        }
        if spec.is_finite_state() {
            let mut ok = true;
            for g in &spec.generators {
                for h in &spec.generators {
                    let gh = g.multiply(h)?.evaluate_capped(n, cap)?;
                    ok &= gh == g.evaluate_capped(n, cap)?.then(&h.evaluate_capped(n, cap)?);
                    ok &= g
                        .multiply(&g.inverse())?
                        .evaluate_capped(n, cap)?
                        .is_identity();
                }
            }
            rows.push(row("homomorphism", n, ok, ""));
        }
    }
    let scan = PerfectnessScan {
        name: spec.name.clone(),
        window: 1,
        rows: values,
    };
    rows.push(row(
        "perfectness_decreasing",
        levels,
        scan.decreasing_from(3),
        "from level 3",
    ));
    Ok(rows)
}

fn check(ctx: &Ctx, report: &mut Report) -> Result<(), ConfigError> {
    let specs = if ctx.cfg.specs.is_empty() {
        treedim_core::constructions::fixtures()
    } else {
        ctx.cfg
            .specs
            .iter()
            .map(|s| load_spec(s))
            .collect::<Result<Vec<_>, _>>()?
    };
    for spec in &specs {
        ctx.cfg.check_levels(spec.m)?;
    }
    let results: Vec<Result<Vec<CheckRow>, CoreError>> = specs
        .par_iter()
        .map(|spec| check_spec(spec, ctx.cfg.levels, ctx.cap()))
        .collect();
    for (spec, result) in specs.iter().zip(results) {
        let mut s = Section::new(&spec.name, &["check", "level", "passed", "detail"]);
        match result {
            Ok(rows) => {
                let failed = rows.iter().filter(|r| !r.passed).count();
                s.set("passed", json!(failed == 0));
                s.set(
                    "checks",
                    Value::Array(
                        rows.iter()
                            .map(|r| json!({"check": r.check, "level": r.level, "passed": r.passed, "detail": r.detail}))
                            .collect(),
                    ),
                );
                for r in &rows {
                    s.rows.push(vec![
                        r.check.clone(),
                        r.level.to_string(),
                        r.passed.to_string(),
                        r.detail.clone(),
                    ]);
                }
                s.notes
                    .push(format!("{} checks, {failed} failed", rows.len()));
                report.failed |= failed > 0;
            }
            Err(e) => {
                report.truncated |= matches!(e, CoreError::ResourceLimit { .. });
                report.errors.push(format!("{}: {e}", spec.name));
            }
        }
        report.sections.push(s);
    }
    Ok(())
}

/// Writes the rendered report to `cfg.out` atomically, or returns it for stdout.
pub fn emit(cfg: &RunConfig, outcome: &Outcome) -> std::io::Result<Option<String>> {
    let text = outcome.report.render(cfg.format);
    match &cfg.out {
        Some(path) => {
            cache::write_atomic(path, text.as_bytes())?;
            Ok(None)
        }
        None => Ok(Some(text)),
    }
}

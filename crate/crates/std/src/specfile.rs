//! JSON group spec files.
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "odometer",
//!   "m": 2,
//!   "top": ["(1 2)"],
//!   "states": { "a": { "root": "(1 2)", "sections": ["1", "a"] } },
//!   "generators": ["a"],
//!   "construction": { "type": "plain" }
//! }
//! ```
//!
//! `construction` is one of `plain`, `rooted`, `wreath_full`,
//! `{"type": "diagonal", "k": K}` or `{"type": "gk", "h": [...], "k": K}`,
//! where `K` is a fixture name or a nested spec. Derived constructions
//! (`wreath_full`, `diagonal`, `gk`) leave `states` and `generators` empty.

use std::fmt;
use std::path::Path;
use std::sync::Arc;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;
use treedim_core::constructions::{self, Construction, GroupSpec};
use treedim_core::machine::{Machine, IDENTITY};
use treedim_core::{Error as CoreError, Permutation};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ValidationError {
    /// Dotted path of the offending field, e.g. `states.b.sections[1]`.
    pub field: String,
    pub line: Option<usize>,
    pub message: String,
}

impl fmt::Display for ValidationError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(line) => write!(f, "line {line}, field {}: {}", self.field, self.message),
            None => write!(f, "field {}: {}", self.field, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum SpecError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}: parse error at {source}")]
    Parse { path: String, source: ParseError },
    #[error("{path}: invalid spec, {source}")]
    Validation {
        path: String,
        source: ValidationError,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    schema_version: Option<u32>,
    name: String,
    m: usize,
    #[serde(default)]
    top: Vec<String>,
    #[serde(default)]
    states: IndexMap<String, RawState>,
    #[serde(default)]
    generators: Vec<String>,
    #[serde(default)]
    construction: RawConstruction,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawState {
    root: String,
    sections: Vec<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum RawConstruction {
    #[default]
    Plain,
    Rooted,
    WreathFull,
    Diagonal {
        k: RawRef,
    },
    Gk {
        h: Vec<String>,
        k: RawRef,
    },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum RawRef {
    Fixture(String),
    Spec(Box<RawSpec>),
}

struct Validator<'a> {
    text: &'a str,
    prefix: String,
}

impl Validator<'_> {
    fn err(&self, field: &str, message: impl Into<String>) -> ValidationError {
        let field = if self.prefix.is_empty() {
            field.to_string()
        } else {
            format!("{}.{field}", self.prefix)
        };
        ValidationError {
            line: locate(self.text, &field),
            field,
            message: message.into(),
        }
    }

    fn nested(&self, field: &str) -> Self {
        Validator {
            text: self.text,
            prefix: if self.prefix.is_empty() {
                field.to_string()
            } else {
                format!("{}.{field}", self.prefix)
            },
        }
    }
}

/// Line of the most specific key of a dotted field path, searched in order.
fn locate(text: &str, field: &str) -> Option<usize> {
    let mut from = 0;
    let mut found = None;
    for part in field.split('.') {
        let key = part.split('[').next().unwrap_or(part);
        let needle = format!("\"{key}\"");
        if let Some(pos) = text[from..].find(&needle) {
            from += pos;
            found = Some(text[..from].matches('\n').count() + 1);
        }
    }
    found
}

fn cycles(
    v: &Validator,
    field: &str,
    m: usize,
    text: &str,
) -> Result<Permutation, ValidationError> {
    Permutation::from_cycles(m, text).map_err(|e| v.err(field, e.to_string()))
}

fn build(raw: &RawSpec, v: &Validator) -> Result<GroupSpec, ValidationError> {
    if raw.m < 2 || raw.m > 9 {
        return Err(v.err("m", format!("degree {} outside 2..=9", raw.m)));
    }
    let m = raw.m;
    let derived = matches!(
        raw.construction,
        RawConstruction::WreathFull | RawConstruction::Diagonal { .. } | RawConstruction::Gk { .. }
    );
    if derived && !(raw.states.is_empty() && raw.generators.is_empty()) {
        return Err(v.err(
            "states",
            "derived constructions take no states or generators",
        ));
    }
    let top = raw
        .top
        .iter()
        .enumerate()
        .map(|(i, t)| cycles(v, &format!("top[{i}]"), m, t))
        .collect::<Result<Vec<_>, _>>()?;
    let mut spec = match &raw.construction {
        RawConstruction::Gk { h, k } => {
            let h = h
                .iter()
                .enumerate()
                .map(|(i, t)| cycles(v, &format!("construction.h[{i}]"), m, t))
                .collect::<Result<Vec<_>, _>>()?;
            if !top.is_empty() && top != h {
                return Err(v.err("top", "top must be empty or equal to construction.h"));
            }
            let k = resolve(k, m, v)?;
            constructions::build_gk(&h, &k).map_err(|e| match e {
                CoreError::NotTransitive { orbits } => v.err(
                    "construction.h",
                    format!("H not transitive on {{1..{m}}} ({orbits} orbits)"),
                ),
                e => v.err("construction", e.to_string()),
            })?
        }
        RawConstruction::Diagonal { k } => {
            let k = resolve(k, m, v)?;
            constructions::build_diagonal(&k).map_err(|e| v.err("construction", e.to_string()))?
        }
        RawConstruction::Plain | RawConstruction::Rooted | RawConstruction::WreathFull => {
            let machine = build_machine(raw, v, top)?;
            let generators = raw
                .generators
                .iter()
                .enumerate()
                .map(|(i, w)| {
                    treedim_core::machine::Element::parse(machine.clone(), w)
                        .map_err(|e| v.err(&format!("generators[{i}]"), e.to_string()))
                })
                .collect::<Result<Vec<_>, _>>()?;
            let construction = match raw.construction {
                RawConstruction::Rooted => {
                    for s in 1..machine.len() {
                        if machine.sections(s).iter().any(|&t| t != IDENTITY) {
                            let name = machine.name(s);
                            return Err(v.err(
                                &format!("states.{name}.sections"),
                                format!("rooted state {name:?} has a nontrivial section"),
                            ));
                        }
                    }
                    Construction::Rooted
                }
                RawConstruction::WreathFull => Construction::WreathFull,
                _ => Construction::Plain,
            };
            GroupSpec {
                name: String::new(),
                m,
                top: machine.top().to_vec(),
                machine,
                generators,
                construction,
            }
        }
    };
    spec.name = raw.name.clone();
    Ok(spec)
}

fn build_machine(
    raw: &RawSpec,
    v: &Validator,
    top: Vec<Permutation>,
) -> Result<Arc<Machine>, ValidationError> {
    let m = raw.m;
    let mut states = Vec::new();
    for (name, state) in &raw.states {
        let root = cycles(v, &format!("states.{name}.root"), m, &state.root)?;
        if state.sections.len() != m {
            return Err(v.err(
                &format!("states.{name}.sections"),
                format!("expected {m} sections, found {}", state.sections.len()),
            ));
        }
        for (j, s) in state.sections.iter().enumerate() {
            if s != "1" && !raw.states.contains_key(s) {
                return Err(v.err(
                    &format!("states.{name}.sections[{j}]"),
                    format!("unknown state {s:?}"),
                ));
            }
        }
        states.push((name.clone(), root, state.sections.clone()));
    }
    Machine::from_states(m, top, &states)
        .map(Arc::new)
        .map_err(|e| match e {
            CoreError::RootOutsideTop { state } => v.err(
                &format!("states.{state}.root"),
                format!("root of state {state:?} lies outside the declared top group"),
            ),
            e => v.err("states", e.to_string()),
        })
}

fn resolve(k: &RawRef, m: usize, v: &Validator) -> Result<GroupSpec, ValidationError> {
    let spec = match k {
        RawRef::Fixture(name) => constructions::fixture(name)
            .ok_or_else(|| v.err("construction.k", format!("unknown fixture {name:?}")))?,
        RawRef::Spec(raw) => build(raw, &v.nested("construction.k"))?,
    };
    if spec.m != m {
        return Err(v.err(
            "construction.k",
            format!("K has degree {}, expected {m}", spec.m),
        ));
    }
    Ok(spec)
}

/// Parses and validates spec text.
pub fn parse_str(text: &str) -> Result<GroupSpec, SpecErrorKind> {
    let raw: RawSpec = serde_json::from_str(text).map_err(|e| {
        SpecErrorKind::Parse(ParseError {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    })?;
    let v = Validator {
        text,
        prefix: String::new(),
    };
    match raw.schema_version {
        Some(SCHEMA_VERSION) => {}
        Some(other) => {
            return Err(SpecErrorKind::Validation(
                v.err("schema_version", format!("unsupported version {other}")),
            ))
        }
        None => {
            return Err(SpecErrorKind::Validation(
                v.err("schema_version", "missing"),
            ))
        }
    }
    build(&raw, &v).map_err(SpecErrorKind::Validation)
}

/// The two failure classes of [`parse_str`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SpecErrorKind {
    #[error(transparent)]
    Parse(ParseError),
    #[error(transparent)]
    Validation(ValidationError),
}

/// Reads and validates a spec file.
pub fn parse_spec(path: &Path) -> Result<GroupSpec, SpecError> {
    let shown = path.display().to_string();
    let text = std::fs::read_to_string(path).map_err(|source| SpecError::Io {
        path: shown.clone(),
        source,
    })?;
    parse_str(&text).map_err(|e| match e {
        SpecErrorKind::Parse(source) => SpecError::Parse {
            path: shown,
            source,
        },
        SpecErrorKind::Validation(source) => SpecError::Validation {
            path: shown,
            source,
        },
    })
}

fn to_raw(spec: &GroupSpec) -> RawSpec {
    let machine = &spec.machine;
    let derived = matches!(
        spec.construction,
        Construction::WreathFull | Construction::Diagonal(_) | Construction::GK { .. }
    );
    let mut states = IndexMap::new();
    if !derived {
        for s in 1..machine.len() {
            states.insert(
                machine.name(s).to_string(),
                RawState {
                    root: machine.root(s).to_cycles(),
                    sections: machine
                        .sections(s)
                        .iter()
                        .map(|&t| machine.name(t).to_string())
                        .collect(),
                },
            );
        }
    }
    let generators = if derived {
        Vec::new()
    } else {
        spec.generators.iter().map(|g| g.to_string()).collect()
    };
    let construction = match &spec.construction {
        Construction::Plain => RawConstruction::Plain,
        Construction::Rooted => RawConstruction::Rooted,
        Construction::WreathFull => RawConstruction::WreathFull,
        Construction::Diagonal(k) => RawConstruction::Diagonal {
            k: RawRef::Spec(Box::new(to_raw(k))),
        },
        Construction::GK { h, k } => RawConstruction::Gk {
            h: h.iter().map(|p| p.to_cycles()).collect(),
            k: RawRef::Spec(Box::new(to_raw(k))),
        },
    };
    RawSpec {
        schema_version: None,
        name: spec.name.clone(),
        m: spec.m,
        top: spec.top.iter().map(|p| p.to_cycles()).collect(),
        states,
        generators,
        construction,
    }
}

/// Pretty JSON that [`parse_str`] maps back to an equal spec.
pub fn emit(spec: &GroupSpec) -> String {
    let mut raw = to_raw(spec);
    raw.schema_version = Some(SCHEMA_VERSION);
    let mut out = serde_json::to_string_pretty(&raw).expect("spec serializes");
    out.push('\n');
    out
}

//! Run configuration and spec resolution.

use std::path::{Path, PathBuf};

use treedim_core::constructions::{self, GroupSpec};

use crate::report::Format;
use crate::specfile::{self, SpecError};

pub const DEFAULT_CAP_POINTS: u64 = treedim_core::machine::DEFAULT_POINT_CAP;

#[derive(Clone, Debug, PartialEq)]
pub enum Command {
    Dim,
    Abel,
    Orbits,
    Rist { vertex: Option<String> },
    VerifyGk { h: Vec<String>, k: String },
    Check,
    Quotient,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Self::Dim => "dim",
            Self::Abel => "abel",
            Self::Orbits => "orbits",
            Self::Rist { .. } => "rist",
            Self::VerifyGk { .. } => "verify-gk",
            Self::Check => "check",
            Self::Quotient => "quotient",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    /// Spec file paths or fixture names.
    pub specs: Vec<String>,
    pub command: Command,
    pub levels: usize,
    /// Branching window `k`.
    pub window: usize,
    pub cap_points: u64,
    pub tolerance: f64,
    pub cache_dir: Option<PathBuf>,
    pub format: Format,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            specs: Vec::new(),
            command,
            levels: 6,
            window: 1,
            cap_points: DEFAULT_CAP_POINTS,
            tolerance: treedim_core::analysis::DEFAULT_TOLERANCE,
            cache_dir: None,
            format: Format::Json,
            out: None,
        }
    }

    /// Rejects `levels` when `m^levels` exceeds the point cap.
    pub fn check_levels(&self, m: usize) -> Result<(), ConfigError> {
        let points = (m as u128).checked_pow(self.levels as u32);
        if points.is_some_and(|p| p <= self.cap_points as u128) {
            return Ok(());
        }
        let mut max_level = 0;
        while (m as u128).pow(max_level as u32 + 1) <= self.cap_points as u128 {
            max_level += 1;
        }
        Err(ConfigError::LevelCap {
            levels: self.levels,
            m,
            cap: self.cap_points,
            max_level,
        })
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("--levels {levels} needs {m}^{levels} points, over the cap of {cap}; the largest allowed level for m = {m} is {max_level}")]
    LevelCap {
        levels: usize,
        m: usize,
        cap: u64,
        max_level: usize,
    },
    #[error("{0:?} is neither a spec file nor a fixture name (fixtures: {1})")]
    UnknownSpec(String, String),
    #[error("{0}")]
    Invalid(String),
    #[error(transparent)]
    Spec(#[from] SpecError),
}

/// A spec file path, or the name of a bundled fixture.
pub fn load_spec(name: &str) -> Result<GroupSpec, ConfigError> {
    let path = Path::new(name);
    if path.is_file() {
        return Ok(specfile::parse_spec(path)?);
    }
    constructions::fixture(name).ok_or_else(|| {
        ConfigError::UnknownSpec(name.to_string(), constructions::FIXTURE_NAMES.join(", "))
    })
}

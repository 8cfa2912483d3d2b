use alloc::string::String;

/// Errors raised by the group engine, the tree machinery and the analyses.
#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum Error {
    #[error("degree mismatch: expected {expected}, found {found}")]
    DegreeMismatch { expected: usize, found: usize },

    #[error("invalid permutation: {0}")]
    InvalidPermutation(String),

    #[error("vertex of level {level} does not fit at level {n}")]
    LevelMismatch { level: usize, n: usize },

    #[error("invalid vertex {0:?}")]
    InvalidVertex(String),

    #[error("resource limit exceeded: {what} > {limit}")]
    ResourceLimit { what: &'static str, limit: u64 },

    #[error("state explosion: more than {limit} states discovered")]
    StateExplosion { limit: usize },

    #[error("generator {index} of the candidate subgroup is not a member of the group")]
    NotSubgroup { index: usize },

    #[error("top group is not transitive: {orbits} orbits on the letters")]
    NotTransitive { orbits: usize },

    #[error("unknown state {0:?}")]
    UnknownState(String),

    #[error("state {state:?}: root permutation is not in the top group")]
    RootOutsideTop { state: String },

    #[error("invalid machine: {0}")]
    InvalidMachine(String),

    #[error("invalid word {0:?}")]
    InvalidWord(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

#![no_std]

extern crate alloc;

pub mod analysis;
pub mod chain;
pub mod constructions;
pub mod error;
pub mod groups;
pub mod machine;
pub mod order;
pub mod perm;
pub mod tree;

pub use chain::{BaseItem, StabilizerChain};
pub use error::{Error, Result};
pub use perm::{Permutation, Point};
pub use tree::Vertex;

//! Vertices of the m-adic rooted tree and their leaf-index blocks.
//!
//! Letters are `1..=m`; the leaf index of `x_1 .. x_n` is
//! `Σ (x_i - 1) m^{n-i}` (first letter most significant).

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::ops::Range;

use crate::chain::BaseItem;
use crate::error::{Error, Result};
use crate::perm::Point;

/// Default cap on the number of vertices enumerated at one level.
pub const DEFAULT_LEVEL_CAP: u64 = 1 << 20;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Vertex {
    m: usize,
    word: Vec<u8>,
}

impl Vertex {
    pub fn root(m: usize) -> Self {
        assert!(m >= 2, "tree degree must be at least 2");
        Self {
            m,
            word: Vec::new(),
        }
    }

    /// `letters` are 1-based.
    pub fn new(m: usize, letters: &[u8]) -> Result<Self> {
        if m < 2 || m > u8::MAX as usize {
            return Err(Error::InvalidVertex(format!("degree {m}")));
        }
        if let Some(&x) = letters.iter().find(|&&x| x == 0 || x as usize > m) {
            return Err(Error::InvalidVertex(format!("letter {x} for m = {m}")));
        }
        Ok(Self {
            m,
            word: letters.to_vec(),
        })
    }

    /// Parses `"x1x2..xk"` (single-digit letters); `""` is the root.
    pub fn parse(m: usize, text: &str) -> Result<Self> {
        if m > 9 {
            return Err(Error::InvalidVertex(format!(
                "string syntax supports m <= 9, got {m}"
            )));
        }
        let letters = text
            .chars()
            .map(|c| {
                c.to_digit(10)
                    .map(|d| d as u8)
                    .ok_or_else(|| Error::InvalidVertex(String::from(text)))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(m, &letters).map_err(|_| Error::InvalidVertex(String::from(text)))
    }

    /// Vertex at `level` whose leaf index is `index`.
    pub fn from_index(m: usize, level: usize, mut index: u64) -> Self {
        let mut word = alloc::vec![0u8; level];
        for slot in word.iter_mut().rev() {
            *slot = (index % m as u64) as u8 + 1;
            index /= m as u64;
        }
        Self { m, word }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn level(&self) -> usize {
        self.word.len()
    }

    pub fn letters(&self) -> &[u8] {
        &self.word
    }

    /// Positional value among the vertices of its own level.
    pub fn index(&self) -> u64 {
        self.word
            .iter()
            .fold(0u64, |acc, &x| acc * self.m as u64 + (x as u64 - 1))
    }

    pub fn child(&self, letter: u8) -> Self {
        debug_assert!(letter >= 1 && letter as usize <= self.m);
        let mut word = self.word.clone();
        word.push(letter);
        Self { m: self.m, word }
    }

    pub fn concat(&self, other: &Self) -> Self {
        let mut word = self.word.clone();
        word.extend_from_slice(&other.word);
        Self { m: self.m, word }
    }

    /// Leaf indices at level `n` lying below this vertex.
    pub fn leaf_block(&self, n: usize) -> Result<Range<u64>> {
        if self.level() > n {
            return Err(Error::LevelMismatch {
                level: self.level(),
                n,
            });
        }
        let width = (self.m as u64).pow((n - self.level()) as u32);
        let lo = self.index() * width;
        Ok(lo..lo + width)
    }
}

impl fmt::Display for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &x in &self.word {
            write!(f, "{x}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Vertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Vertex({:?}, m={})", format!("{self}"), self.m)
    }
}

/// Index range of leaf words, see [`Vertex::leaf_block`].
pub fn leaf_index(v: &Vertex, n: usize) -> Result<Range<u64>> {
    v.leaf_block(n)
}

/// `m^n`, or `ResourceLimit` if it exceeds `cap`.
pub fn level_size(m: usize, n: usize, cap: u64) -> Result<u64> {
    let mut size: u64 = 1;
    for _ in 0..n {
        size = size
            .checked_mul(m as u64)
            .filter(|&s| s <= cap)
            .ok_or(Error::ResourceLimit {
                what: "vertices per level",
                limit: cap,
            })?;
    }
    if size > cap {
        return Err(Error::ResourceLimit {
            what: "vertices per level",
            limit: cap,
        });
    }
    Ok(size)
}

/// The `m^n` vertices of level `n` in index order.
pub fn level_vertices(m: usize, n: usize, cap: u64) -> Result<Vec<Vertex>> {
    let size = level_size(m, n, cap)?;
    Ok((0..size).map(|i| Vertex::from_index(m, n, i)).collect())
}

/// Base items for a group of tree automorphisms acting on the `m^n` leaves:
/// every vertex of levels `1..=n`, level by level.
pub fn tree_base(m: usize, n: usize) -> Vec<BaseItem> {
    let mut items = Vec::new();
    let leaves = (m as u64).pow(n as u32);
    let mut size = leaves;
    for _ in 1..=n {
        size /= m as u64;
        let mut start = 0;
        while start < leaves {
            items.push(BaseItem {
                start: start as Point,
                size: size as Point,
            });
            start += size;
        }
    }
    items
}

/// Number of base items of [`tree_base`] that belong to levels `1..=k`.
pub fn tree_base_prefix(m: usize, k: usize) -> usize {
    (1..=k).map(|j| m.pow(j as u32)).sum()
}

/// Base items covering every vertex outside the subtree of `v` (levels
/// `1..=n`), followed by the vertices of the subtree itself.
pub fn tree_base_outside_first(v: &Vertex, n: usize) -> (Vec<BaseItem>, usize) {
    let m = v.m();
    let block = v.leaf_block(n).expect("vertex below level n");
    let (outside, inside): (Vec<_>, Vec<_>) = tree_base(m, n).into_iter().partition(|item| {
        let lo = item.start as u64;
        let hi = lo + item.size as u64;
        // a vertex is inside the subtree of v iff its block is contained in v's block
        !(lo >= block.start && hi <= block.end)
    });
    let cut = outside.len();
    let mut items = outside;
    items.extend(inside);
    (items, cut)
}

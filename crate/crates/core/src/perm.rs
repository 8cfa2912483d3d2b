//! Permutations of `{0, .., degree - 1}` under the right-action convention:
//! `p.then(q)` applies `p` first and `q` second, so `x^(pq) = (x^p)^q`.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::error::{Error, Result};

/// A point of a permutation domain.
pub type Point = u32;

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Permutation {
    images: Vec<Point>,
}

impl Permutation {
    pub fn identity(degree: usize) -> Self {
        Self {
            images: (0..degree as Point).collect(),
        }
    }

    /// Builds a permutation from its image table, checking that it is a bijection.
    pub fn from_images(images: Vec<Point>) -> Result<Self> {
        let n = images.len();
        let mut seen = alloc::vec![false; n];
        for &y in &images {
            let y = y as usize;
            if y >= n || seen[y] {
                return Err(Error::InvalidPermutation(format!(
                    "image table of length {n} is not a bijection"
                )));
            }
            seen[y] = true;
        }
        Ok(Self { images })
    }

    pub(crate) fn from_images_unchecked(images: Vec<Point>) -> Self {
        debug_assert!(Self::from_images(images.clone()).is_ok());
        Self { images }
    }

    /// Parses 1-based cycle notation such as `"(1 2)(3 4 5)"` or `"()"`.
    pub fn from_cycles(degree: usize, text: &str) -> Result<Self> {
        let bad = |why: &str| Error::InvalidPermutation(format!("{text:?}: {why}"));
        let mut images: Vec<Point> = (0..degree as Point).collect();
        let mut touched = alloc::vec![false; degree];
        let mut rest = text.trim();
        if rest.is_empty() {
            return Err(bad("empty cycle string"));
        }
        while !rest.is_empty() {
            let body = rest.strip_prefix('(').ok_or_else(|| bad("expected '('"))?;
            let close = body.find(')').ok_or_else(|| bad("missing ')'"))?;
            let mut cycle = Vec::new();
            for tok in body[..close].split(|c: char| c == ',' || c.is_whitespace()) {
                if tok.is_empty() {
                    continue;
                }
                let letter: usize = tok.parse().map_err(|_| bad("non-numeric letter"))?;
                if letter == 0 || letter > degree {
                    return Err(bad("letter out of range"));
                }
                let x = letter - 1;
                if touched[x] {
                    return Err(bad("letter repeated"));
                }
                touched[x] = true;
                cycle.push(x as Point);
            }
            for (i, &x) in cycle.iter().enumerate() {
                images[x as usize] = cycle[(i + 1) % cycle.len()];
            }
            rest = body[close + 1..].trim_start();
        }
        Ok(Self { images })
    }

    /// 1-based cycle notation, `"()"` for the identity.
    pub fn to_cycles(&self) -> String {
        let mut out = String::new();
        let mut seen = alloc::vec![false; self.degree()];
        for start in 0..self.degree() {
            if seen[start] || self.images[start] as usize == start {
                continue;
            }
            out.push('(');
            let mut x = start;
            let mut first = true;
            while !seen[x] {
                seen[x] = true;
                if !first {
                    out.push(' ');
                }
                first = false;
                out.push_str(&format!("{}", x + 1));
                x = self.images[x] as usize;
            }
            out.push(')');
        }
        if out.is_empty() {
            out.push_str("()");
        }
        out
    }

    #[inline]
    pub fn degree(&self) -> usize {
        self.images.len()
    }

    #[inline]
    pub fn images(&self) -> &[Point] {
        &self.images
    }

    pub fn into_images(self) -> Vec<Point> {
        self.images
    }

    #[inline]
    pub fn apply(&self, x: Point) -> Point {
        self.images[x as usize]
    }

    pub fn is_identity(&self) -> bool {
        self.images
            .iter()
            .enumerate()
            .all(|(i, &y)| i as Point == y)
    }

    /// `self` followed by `other`; errors on degree mismatch.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        if self.degree() != other.degree() {
            return Err(Error::DegreeMismatch {
                expected: self.degree(),
                found: other.degree(),
            });
        }
        Ok(self.then(other))
    }

    /// Unchecked right-action product: apply `self`, then `other`.
    #[inline]
    pub fn then(&self, other: &Self) -> Self {
        debug_assert_eq!(self.degree(), other.degree());
        let o = &other.images;
        Self {
            images: self.images.iter().map(|&y| o[y as usize]).collect(),
        }
    }

    /// `self * other^{-1}` without materializing the inverse of `other`.
    pub fn then_inverse_of(&self, other: &Self) -> Self {
        let mut inv = alloc::vec![0 as Point; self.degree()];
        for (x, &y) in other.images.iter().enumerate() {
            inv[y as usize] = x as Point;
        }
        Self {
            images: self.images.iter().map(|&y| inv[y as usize]).collect(),
        }
    }

    pub fn inverse(&self) -> Self {
        let mut inv = alloc::vec![0 as Point; self.degree()];
        for (x, &y) in self.images.iter().enumerate() {
            inv[y as usize] = x as Point;
        }
        Self { images: inv }
    }

    /// `other^{-1} self other`, i.e. the conjugate `self^other`.
    pub fn conjugate_by(&self, other: &Self) -> Self {
        other.inverse().then(self).then(other)
    }

    /// `[self, other] = self^{-1} other^{-1} self other`.
    pub fn commutator(&self, other: &Self) -> Self {
        self.inverse().then(&other.inverse()).then(self).then(other)
    }

    pub fn commutes_with(&self, other: &Self) -> bool {
        self.images
            .iter()
            .zip(&other.images)
            .all(|(&a, &b)| other.images[a as usize] == self.images[b as usize])
    }

    /// Points moved by the permutation.
    pub fn support(&self) -> impl Iterator<Item = Point> + '_ {
        self.images
            .iter()
            .enumerate()
            .filter(|(i, &y)| *i as Point != y)
            .map(|(i, _)| i as Point)
    }

    /// Action on a union of invariant points, relabelled `0..points.len()` in the
    /// given order. Returns `None` if the points are not invariant.
    pub fn restrict(&self, points: &[Point]) -> Option<Self> {
        let mut index = alloc::collections::BTreeMap::new();
        for (i, &p) in points.iter().enumerate() {
            index.insert(p, i as Point);
        }
        let images = points
            .iter()
            .map(|&p| index.get(&self.apply(p)).copied())
            .collect::<Option<Vec<_>>>()?;
        Self::from_images(images).ok()
    }

    /// Disjoint union `self ⊔ other` acting on `degree(self) + degree(other)` points.
    pub fn direct_sum(&self, other: &Self) -> Self {
        let shift = self.degree() as Point;
        let mut images = self.images.clone();
        images.extend(other.images.iter().map(|&y| y + shift));
        Self { images }
    }
}

impl fmt::Debug for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Permutation[{}]{}", self.degree(), self.to_cycles())
    }
}

impl fmt::Display for Permutation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_cycles())
    }
}

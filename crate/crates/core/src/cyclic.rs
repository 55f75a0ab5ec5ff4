//! Cyclic words: closed, cyclically reduced paths up to rotation.

use std::cmp::Ordering;

use thiserror::Error;

use crate::graph::{Dart, MarkedGraph, VertexId};
use crate::path::EdgePath;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CyclicError {
    #[error("cyclic word is empty")]
    Empty,
    #[error("path is not closed")]
    NotClosed,
    #[error("path is not cyclically reduced")]
    NotCyclicallyReduced,
}

/// A nonempty cyclically reduced closed path, remembered with a chosen
/// starting dart. Equality of values compares the stored rotation; use
/// [`CyclicWord::canonical`] or [`CyclicWord::same_axis`] to compare classes.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CyclicWord {
    darts: Vec<Dart>,
}

impl CyclicWord {
    pub fn from_path(g: &MarkedGraph, p: &EdgePath) -> Result<Self, CyclicError> {
        if p.is_empty() {
            return Err(CyclicError::Empty);
        }
        if !p.is_closed(g) {
            return Err(CyclicError::NotClosed);
        }
        if !p.is_cyclically_reduced() {
            return Err(CyclicError::NotCyclicallyReduced);
        }
        Ok(CyclicWord {
            darts: p.darts().to_vec(),
        })
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }

    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    /// The word read as a based path from its first dart.
    pub fn to_path(&self, g: &MarkedGraph) -> EdgePath {
        EdgePath::from_parts_unchecked(g.init(self.darts[0]), self.darts.clone())
    }

    pub fn inverse(&self) -> Self {
        CyclicWord {
            darts: self.darts.iter().rev().map(|d| d.inv()).collect(),
        }
    }

    pub fn rotate(&self, k: usize) -> Self {
        let mut darts = self.darts.clone();
        darts.rotate_left(k % self.darts.len());
        CyclicWord { darts }
    }

    /// Lexicographically least rotation, orientation kept.
    pub fn min_rotation(&self) -> Self {
        let k = least_rotation(&self.darts);
        self.rotate(k)
    }

    /// Least rotation of the word or of its inverse: a single representative
    /// for the conjugacy class of the cyclic subgroup it generates.
    pub fn canonical(&self) -> Self {
        let a = self.min_rotation();
        let b = self.inverse().min_rotation();
        if b.darts < a.darts {
            b
        } else {
            a
        }
    }

    /// `+1` if `self` is a rotation of `other`, `-1` if it is a rotation of
    /// `other`'s inverse, `None` if the axes differ.
    pub fn orientation_against(&self, other: &CyclicWord) -> Option<i32> {
        if self.len() != other.len() {
            return None;
        }
        let mine = self.min_rotation();
        if mine == other.min_rotation() {
            Some(1)
        } else if mine == other.inverse().min_rotation() {
            Some(-1)
        } else {
            None
        }
    }

    pub fn same_axis(&self, other: &CyclicWord) -> bool {
        self.orientation_against(other).is_some()
    }

    /// Returns `(w, n)` with `self = w^n` and `n` maximal. The root keeps the
    /// starting dart of `self`.
    pub fn primitive_root(&self) -> (CyclicWord, usize) {
        let n = self.darts.len();
        for p in 1..=n {
            if n.is_multiple_of(p) && (p..n).all(|i| self.darts[i] == self.darts[i - p]) {
                return (
                    CyclicWord {
                        darts: self.darts[..p].to_vec(),
                    },
                    n / p,
                );
            }
        }
        unreachable!("a word is always a power of itself")
    }

    pub fn power(&self, n: usize) -> Self {
        CyclicWord {
            darts: self.darts.repeat(n),
        }
    }

    /// Vertices visited by the cycle, deduplicated and sorted.
    pub fn vertices(&self, g: &MarkedGraph) -> Vec<VertexId> {
        let mut vs: Vec<VertexId> = self.darts.iter().map(|&d| g.init(d)).collect();
        vs.sort();
        vs.dedup();
        vs
    }

    pub fn display(&self, g: &MarkedGraph) -> String {
        self.darts
            .iter()
            .map(|&d| g.dart_name(d))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Index of the lexicographically least rotation (naive quadratic scan; the
/// words handled here are short).
fn least_rotation(w: &[Dart]) -> usize {
    let n = w.len();
    let mut best = 0;
    for k in 1..n {
        let cmp = (0..n)
            .map(|i| w[(k + i) % n].cmp(&w[(best + i) % n]))
            .find(|c| *c != Ordering::Equal)
            .unwrap_or(Ordering::Equal);
        if cmp == Ordering::Less {
            best = k;
        }
    }
    best
}

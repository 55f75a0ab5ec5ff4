//! Normal forms in the mapping torus `F ⋊_Φ Z`.
//!
//! Elements are pairs `(u, k)` standing for `u·t^k`, where `u` is a reduced
//! closed path at the basepoint and `t u t^-1 = Φ(u)`. Negative powers of
//! `Φ` use an inverse computed once by labelled folding of the images of a
//! basis.

use std::sync::OnceLock;

use serde_json::{json, Value};
use thiserror::Error;

use crate::fold::{labelled_fold, stallings_fold, FoldError, FreeWord};
use crate::graph::{Dart, MarkedGraph, VertexId};
use crate::map::GraphMap;
use crate::path::{push_reduced, EdgePath};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum TorusError {
    #[error("element is not a closed path at the basepoint `{0}`")]
    BasepointMismatch(String),
    #[error("the map moves the basepoint")]
    BasepointMoved,
    #[error("the map is not invertible on the fundamental group: {0}")]
    NotInvertible(String),
}

/// `word · t^t_exp`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TorusElement {
    pub word: EdgePath,
    pub t_exp: i64,
}

impl TorusElement {
    pub fn identity(g: &MarkedGraph) -> Self {
        TorusElement {
            word: EdgePath::empty(g.basepoint()),
            t_exp: 0,
        }
    }

    pub fn t(g: &MarkedGraph) -> Self {
        TorusElement {
            word: EdgePath::empty(g.basepoint()),
            t_exp: 1,
        }
    }

    pub fn from_word(word: EdgePath) -> Self {
        TorusElement {
            word: word.tighten(),
            t_exp: 0,
        }
    }

    pub fn display(&self, g: &MarkedGraph) -> String {
        format!("({}, {})", self.word.display(g), self.t_exp)
    }

    pub fn to_json(&self, g: &MarkedGraph) -> Value {
        json!({ "word": self.word.display(g).to_string(), "t": self.t_exp })
    }
}

/// Basis of `π1(G, x)` from a spanning tree: one loop per non-tree edge.
#[derive(Clone, Debug)]
struct TreeBasis {
    /// `tree_path[v]`: reduced tree path from the basepoint to `v`.
    tree_path: Vec<Vec<Dart>>,
    /// `slot[e]`: index of edge `e` among non-tree edges.
    slot: Vec<Option<usize>>,
    loops: Vec<EdgePath>,
}

impl TreeBasis {
    fn new(g: &MarkedGraph) -> Self {
        let x = g.basepoint();
        let parent = g.spanning_tree(x);
        let mut tree_path: Vec<Option<Vec<Dart>>> = vec![None; g.vertex_count()];
        tree_path[x.index()] = Some(Vec::new());
        fn resolve(
            g: &MarkedGraph,
            parent: &[Option<Dart>],
            memo: &mut [Option<Vec<Dart>>],
            v: VertexId,
        ) -> Vec<Dart> {
            if let Some(p) = &memo[v.index()] {
                return p.clone();
            }
            let d = parent[v.index()].expect("connected graph");
            let mut p = resolve(g, parent, memo, g.init(d));
            p.push(d);
            memo[v.index()] = Some(p.clone());
            p
        }
        for v in g.vertices() {
            resolve(g, &parent, &mut tree_path, v);
        }
        let tree_path: Vec<Vec<Dart>> = tree_path.into_iter().map(Option::unwrap).collect();
        let tree_edges: Vec<bool> = {
            let mut t = vec![false; g.edge_count()];
            for d in parent.iter().flatten() {
                t[d.edge().index()] = true;
            }
            t
        };
        let mut slot = vec![None; g.edge_count()];
        let mut loops = Vec::new();
        for e in g.edges() {
            if tree_edges[e.index()] {
                continue;
            }
            slot[e.index()] = Some(loops.len());
            let mut darts = tree_path[g.source(e).index()].clone();
            darts.push(e.forward());
            darts.extend(tree_path[g.target(e).index()].iter().rev().map(|d| d.inv()));
            loops.push(EdgePath::from_parts_unchecked(x, darts).tighten());
        }
        TreeBasis {
            tree_path,
            slot,
            loops,
        }
    }

    /// Writes a closed path at the basepoint as a word in the basis.
    fn coordinates(&self, darts: &[Dart]) -> FreeWord {
        let mut out = Vec::new();
        for d in darts {
            if let Some(i) = self.slot[d.edge().index()] {
                let letter = i as i32 + 1;
                let letter = if d.is_reversed() { -letter } else { letter };
                if out.last() == Some(&-letter) {
                    out.pop();
                } else {
                    out.push(letter);
                }
            }
        }
        out
    }
}

/// Report of [`validate_pi1_bijectivity`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Pi1Report {
    pub expected_rank: usize,
    pub image_rank: usize,
    pub surjective: bool,
}

impl Pi1Report {
    pub fn passes(&self) -> bool {
        self.surjective && self.image_rank == self.expected_rank
    }
}

/// Folds the images of a free basis of `π1(G, x)` and checks that they
/// generate the whole group with the right rank (hence form a basis).
pub fn validate_pi1_bijectivity(f: &GraphMap) -> Pi1Report {
    let g = f.graph();
    let basis = TreeBasis::new(g);
    let x = g.basepoint();
    let expected_rank = basis.loops.len();
    if f.vertex_image(x) != x {
        // Conjugate the images back to the basepoint along the tree.
        let back =
            EdgePath::from_parts_unchecked(x, basis.tree_path[f.vertex_image(x).index()].clone());
        let images: Vec<EdgePath> = basis
            .loops
            .iter()
            .map(|l| {
                back.concat(g, &f.map_path(l))
                    .and_then(|p| p.concat(g, &back.reverse(g)))
                    .expect("composable")
                    .tighten()
            })
            .collect();
        return report_for(g, x, &basis, &images, expected_rank);
    }
    let images: Vec<EdgePath> = basis.loops.iter().map(|l| f.map_path(l)).collect();
    report_for(g, x, &basis, &images, expected_rank)
}

fn report_for(
    g: &MarkedGraph,
    x: VertexId,
    basis: &TreeBasis,
    images: &[EdgePath],
    expected_rank: usize,
) -> Pi1Report {
    let folded = stallings_fold(g, x, images).expect("images are closed at the basepoint");
    let surjective = basis.loops.iter().all(|l| folded.contains(l));
    Pi1Report {
        expected_rank,
        image_rank: folded.rank(),
        surjective,
    }
}

/// The mapping torus of a vertex-fixing graph map, with cached `Φ^-1`.
pub struct MappingTorus<'a> {
    f: &'a GraphMap,
    basis: TreeBasis,
    inverse: OnceLock<Result<Vec<Vec<Dart>>, TorusError>>,
}

impl<'a> MappingTorus<'a> {
    pub fn new(f: &'a GraphMap) -> Result<Self, TorusError> {
        let g = f.graph();
        if f.vertex_image(g.basepoint()) != g.basepoint() {
            return Err(TorusError::BasepointMoved);
        }
        Ok(MappingTorus {
            f,
            basis: TreeBasis::new(g),
            inverse: OnceLock::new(),
        })
    }

    pub fn map(&self) -> &GraphMap {
        self.f
    }

    pub fn graph(&self) -> &MarkedGraph {
        self.f.graph()
    }

    fn check(&self, u: &EdgePath) -> Result<(), TorusError> {
        let g = self.graph();
        if u.start() != g.basepoint() || !u.is_closed(g) {
            return Err(TorusError::BasepointMismatch(
                g.vertex_name(g.basepoint()).to_string(),
            ));
        }
        Ok(())
    }

    /// Images under `Φ^-1` of the basis loops.
    fn inverse_images(&self) -> Result<&Vec<Vec<Dart>>, TorusError> {
        self.inverse
            .get_or_init(|| {
                let g = self.graph();
                let petals: Vec<(EdgePath, FreeWord)> = self
                    .basis
                    .loops
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (self.f.map_path(l), vec![i as i32 + 1]))
                    .collect();
                let folded = labelled_fold(g, g.basepoint(), &petals).map_err(|e| match e {
                    FoldError::Relation => {
                        TorusError::NotInvertible("basis images satisfy a relation".into())
                    }
                    FoldError::NotBased => TorusError::BasepointMoved,
                })?;
                self.basis
                    .loops
                    .iter()
                    .map(|l| {
                        let w = folded.read(l.darts()).ok_or_else(|| {
                            TorusError::NotInvertible("basis images do not generate".into())
                        })?;
                        Ok(self.substitute(&w))
                    })
                    .collect()
            })
            .as_ref()
            .map_err(Clone::clone)
    }

    /// Replaces letter `i` by the `i`-th basis loop.
    fn substitute(&self, w: &[i32]) -> Vec<Dart> {
        let mut out = Vec::new();
        for &letter in w {
            let l = &self.basis.loops[letter.unsigned_abs() as usize - 1];
            if letter > 0 {
                for &d in l.darts() {
                    push_reduced(&mut out, d);
                }
            } else {
                for &d in l.darts().iter().rev() {
                    push_reduced(&mut out, d.inv());
                }
            }
        }
        out
    }

    fn phi_inverse(&self, darts: &[Dart]) -> Result<Vec<Dart>, TorusError> {
        let images = self.inverse_images()?;
        let mut out = Vec::new();
        for letter in self.basis.coordinates(darts) {
            let img = &images[letter.unsigned_abs() as usize - 1];
            if letter > 0 {
                for &d in img {
                    push_reduced(&mut out, d);
                }
            } else {
                for &d in img.iter().rev() {
                    push_reduced(&mut out, d.inv());
                }
            }
        }
        Ok(out)
    }

    /// `Φ^k(u)` for a closed path `u` at the basepoint.
    pub fn phi_power(&self, u: &EdgePath, k: i64) -> Result<EdgePath, TorusError> {
        self.check(u)?;
        let mut darts = u.tighten().darts().to_vec();
        if k >= 0 {
            for _ in 0..k {
                darts = self.f.map_darts(&darts);
            }
        } else {
            for _ in 0..(-k) {
                darts = self.phi_inverse(&darts)?;
            }
        }
        Ok(EdgePath::from_parts_unchecked(u.start(), darts))
    }

    /// `(u1, k1)(u2, k2) = (u1 · Φ^k1(u2), k1 + k2)`.
    pub fn mul(&self, a: &TorusElement, b: &TorusElement) -> Result<TorusElement, TorusError> {
        self.check(&a.word)?;
        let moved = self.phi_power(&b.word, a.t_exp)?;
        let word = a
            .word
            .concat(self.graph(), &moved)
            .expect("both closed at the basepoint")
            .tighten();
        Ok(TorusElement {
            word,
            t_exp: a.t_exp + b.t_exp,
        })
    }

    pub fn inverse(&self, a: &TorusElement) -> Result<TorusElement, TorusError> {
        let word = self.phi_power(&a.word.reverse(self.graph()), -a.t_exp)?;
        Ok(TorusElement {
            word,
            t_exp: -a.t_exp,
        })
    }

    pub fn pow(&self, a: &TorusElement, n: i64) -> Result<TorusElement, TorusError> {
        let base = if n < 0 { self.inverse(a)? } else { a.clone() };
        let mut acc = TorusElement::identity(self.graph());
        for _ in 0..n.unsigned_abs() {
            acc = self.mul(&acc, &base)?;
        }
        Ok(acc)
    }

    pub fn commutes(&self, a: &TorusElement, b: &TorusElement) -> Result<bool, TorusError> {
        Ok(self.mul(a, b)? == self.mul(b, a)?)
    }

    /// The reduced tree path from the basepoint to `v`.
    pub fn tree_path(&self, v: VertexId) -> EdgePath {
        EdgePath::from_parts_unchecked(
            self.graph().basepoint(),
            self.basis.tree_path[v.index()].clone(),
        )
    }

    /// Moves `(g, k)` based at vertex `y` to the basepoint along the tree
    /// path `τ`: `g ↦ τ g τ̄` and `t_y ↦ (τ · f#(τ̄), 1)`.
    pub fn transport(
        &self,
        y: VertexId,
        g_word: &EdgePath,
        k: i64,
    ) -> Result<TorusElement, TorusError> {
        let g = self.graph();
        if g_word.start() != y || !g_word.is_closed(g) {
            return Err(TorusError::BasepointMismatch(g.vertex_name(y).to_string()));
        }
        let tau = self.tree_path(y);
        let conj = tau
            .concat(g, g_word)
            .and_then(|p| p.concat(g, &tau.reverse(g)))
            .expect("composable")
            .tighten();
        let ty_word = tau
            .concat(g, &self.f.map_path(&tau.reverse(g)))
            .expect("composable")
            .tighten();
        let ty = TorusElement {
            word: ty_word,
            t_exp: 1,
        };
        self.mul(&TorusElement::from_word(conj), &self.pow(&ty, k)?)
    }
}

//! Stallings folding of subgroup graphs over a marked graph.
//!
//! Petals are wedged at a base node and folded until the labelled graph is
//! deterministic (at most one edge per dart label at every node). Each edge
//! may also carry a word in an auxiliary free group; folding then applies
//! gauge changes at nodes so that reading a path still multiplies to the
//! same auxiliary element. With trivial auxiliary words this is ordinary
//! folding.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::graph::{Dart, MarkedGraph, VertexId};
use crate::path::EdgePath;

/// A reduced word in an auxiliary free group: letter `i + 1` is generator
/// `i`, letter `-(i + 1)` its inverse.
pub type FreeWord = Vec<i32>;

pub fn free_mul(a: &[i32], b: &[i32]) -> FreeWord {
    let mut out = a.to_vec();
    for &x in b {
        if out.last() == Some(&-x) {
            out.pop();
        } else {
            out.push(x);
        }
    }
    out
}

pub fn free_inv(a: &[i32]) -> FreeWord {
    a.iter().rev().map(|x| -x).collect()
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum FoldError {
    #[error("word is not a closed path at the base vertex")]
    NotBased,
    #[error("the generators satisfy a nontrivial relation, so their images are not a free basis")]
    Relation,
}

type Adjacency = BTreeMap<Dart, Vec<(usize, FreeWord)>>;

/// A folded (deterministic) labelled graph with a base node. Petals can be
/// added one at a time; the graph is folded after each addition.
#[derive(Clone, Debug)]
pub struct FoldedGraph {
    graph_base: VertexId,
    adj: Vec<Adjacency>,
    alive: Vec<bool>,
    base: usize,
    dirty: Vec<usize>,
}

impl FoldedGraph {
    /// The trivial subgroup at `base`.
    pub fn new(base: VertexId) -> Self {
        FoldedGraph {
            graph_base: base,
            adj: vec![BTreeMap::new()],
            alive: vec![true],
            base: 0,
            dirty: Vec::new(),
        }
    }

    fn new_node(&mut self) -> usize {
        self.adj.push(BTreeMap::new());
        self.alive.push(true);
        self.adj.len() - 1
    }

    fn add_edge(&mut self, u: usize, d: Dart, w: usize, label: FreeWord) {
        let back = free_inv(&label);
        self.adj[u].entry(d).or_default().push((w, label));
        self.adj[w].entry(d.inv()).or_default().push((u, back));
        self.dirty.push(u);
        self.dirty.push(w);
    }

    fn remove_entry(&mut self, u: usize, d: Dart, w: usize, label: &[i32]) {
        let list = self.adj[u].get_mut(&d).expect("edge present");
        let pos = list
            .iter()
            .position(|(t, l)| *t == w && l == label)
            .expect("edge present");
        list.swap_remove(pos);
        if list.is_empty() {
            self.adj[u].remove(&d);
        }
    }

    /// Changes the potential at `n` by `h`: labels on edges leaving `n` are
    /// premultiplied by `h^-1`, labels entering `n` postmultiplied by `h`.
    fn gauge(&mut self, n: usize, h: &[i32]) {
        if h.is_empty() {
            return;
        }
        let hinv = free_inv(h);
        let old = std::mem::take(&mut self.adj[n]);
        let mut new: Adjacency = BTreeMap::new();
        for (d, list) in old {
            for (z, mu) in list {
                if z == n {
                    let nm = free_mul(&free_mul(&hinv, &mu), h);
                    new.entry(d).or_default().push((z, nm));
                } else {
                    let nm = free_mul(&hinv, &mu);
                    let back_old = free_inv(&mu);
                    let back_new = free_inv(&nm);
                    let list_z = self.adj[z].get_mut(&d.inv()).expect("reverse edge present");
                    let pos = list_z
                        .iter()
                        .position(|(t, l)| *t == n && *l == back_old)
                        .expect("reverse edge present");
                    list_z[pos].1 = back_new;
                    new.entry(d).or_default().push((z, nm));
                }
            }
        }
        self.adj[n] = new;
    }

    /// Moves every edge at `from` to `into` and kills `from`.
    fn merge(&mut self, into: usize, from: usize) {
        let old = std::mem::take(&mut self.adj[from]);
        for (d, list) in old {
            for (z, mu) in list {
                if z == from {
                    self.adj[into].entry(d).or_default().push((into, mu));
                } else {
                    let back = free_inv(&mu);
                    let list_z = self.adj[z].get_mut(&d.inv()).expect("reverse edge present");
                    let pos = list_z
                        .iter()
                        .position(|(t, l)| *t == from && *l == back)
                        .expect("reverse edge present");
                    list_z[pos].0 = into;
                    self.dirty.push(z);
                    self.adj[into].entry(d).or_default().push((z, mu));
                }
            }
        }
        self.alive[from] = false;
        if self.base == from {
            self.base = into;
        }
        self.dirty.push(into);
    }

    fn fold_all(&mut self) -> Result<(), FoldError> {
        while let Some(u) = self.dirty.pop() {
            if !self.alive[u] {
                continue;
            }
            let clash = self.adj[u]
                .iter()
                .find(|(_, l)| l.len() >= 2)
                .map(|(d, l)| (*d, l[0].clone(), l[1].clone()));
            let Some((d, (w1, l1), (w2, l2))) = clash else {
                continue;
            };
            self.dirty.push(u);
            if w1 == w2 {
                if l1 != l2 {
                    return Err(FoldError::Relation);
                }
                self.remove_entry(u, d, w1, &l1);
                self.remove_entry(w1, d.inv(), u, &free_inv(&l1));
                continue;
            }
            // Keep the base node alive and gauge-free.
            let ((keep, lk), (gone, lg)) = if w2 == self.base {
                ((w2, l2), (w1, l1))
            } else {
                ((w1, l1), (w2, l2))
            };
            let h = free_mul(&free_inv(&lg), &lk);
            self.gauge(gone, &h);
            self.merge(keep, gone);
            self.dirty.push(keep);
        }
        Ok(())
    }
}

/// Folds the petals `(path, label)`; every path must be a closed path at
/// `base`. The first dart of each petal carries its label.
pub fn labelled_fold(
    g: &MarkedGraph,
    base: VertexId,
    petals: &[(EdgePath, FreeWord)],
) -> Result<FoldedGraph, FoldError> {
    let mut folded = FoldedGraph::new(base);
    for (path, label) in petals {
        folded.add_petal(g, path, label.clone())?;
    }
    Ok(folded)
}

/// Ordinary Stallings folding of a set of closed paths at `base`.
pub fn stallings_fold(
    g: &MarkedGraph,
    base: VertexId,
    words: &[EdgePath],
) -> Result<FoldedGraph, FoldError> {
    let petals: Vec<(EdgePath, FreeWord)> =
        words.iter().map(|w| (w.tighten(), Vec::new())).collect();
    labelled_fold(g, base, &petals)
}

impl FoldedGraph {
    /// Wedges one more petal at the base and folds.
    pub fn add_petal(
        &mut self,
        g: &MarkedGraph,
        path: &EdgePath,
        label: FreeWord,
    ) -> Result<(), FoldError> {
        if path.start() != self.graph_base || !path.is_closed(g) {
            return Err(FoldError::NotBased);
        }
        let darts = path.darts();
        if darts.is_empty() {
            return if label.is_empty() {
                Ok(())
            } else {
                Err(FoldError::Relation)
            };
        }
        let root = self.base;
        let mut cur = root;
        for (i, &d) in darts.iter().enumerate() {
            let next = if i + 1 == darts.len() {
                root
            } else {
                self.new_node()
            };
            let l = if i == 0 { label.clone() } else { Vec::new() };
            self.add_edge(cur, d, next, l);
            cur = next;
        }
        self.fold_all()
    }

    pub fn vertex_count(&self) -> usize {
        self.alive.iter().filter(|a| **a).count()
    }

    pub fn edge_count(&self) -> usize {
        let darts: usize = self
            .adj
            .iter()
            .zip(&self.alive)
            .filter(|(_, a)| **a)
            .map(|(m, _)| m.values().map(Vec::len).sum::<usize>())
            .sum();
        darts / 2
    }

    /// Rank of the subgroup, the first Betti number of the folded graph.
    pub fn rank(&self) -> usize {
        self.edge_count() + 1 - self.vertex_count()
    }

    /// Reads `darts` from the base node; returns the product of labels if
    /// the walk exists and closes up at the base.
    pub fn read(&self, darts: &[Dart]) -> Option<FreeWord> {
        let mut cur = self.base;
        let mut acc = Vec::new();
        for d in darts {
            let (next, label) = self.adj[cur].get(d)?.first()?;
            acc = free_mul(&acc, label);
            cur = *next;
        }
        (cur == self.base).then_some(acc)
    }

    /// Membership of the element represented by a closed path at the base.
    pub fn contains(&self, p: &EdgePath) -> bool {
        self.read(p.tighten().darts()).is_some()
    }
}

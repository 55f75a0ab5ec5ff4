//! Brute-force search for closed Nielsen paths, independent of the vertex
//! space construction.
//!
//! A reduced loop `p = q·s̄` at `v` is a Nielsen path exactly when
//! `[q̄·f#(q)] = [s̄·f#(s)]` as paths at the common endpoint, so loops of
//! length `ℓ` are found by matching keys of the paths of length `⌈ℓ/2⌉`
//! against those of length `⌊ℓ/2⌋`. The search is exponential in `L`.

use std::collections::HashMap;

use crate::fold::{FoldError, FoldedGraph};
use crate::graph::{Dart, VertexId};
use crate::map::GraphMap;
use crate::path::{reduce, EdgePath};

/// Outcome of a bounded search at one vertex.
#[derive(Clone, Debug)]
pub struct OracleReport {
    pub vertex: VertexId,
    pub max_len: usize,
    /// Number of reduced closed Nielsen paths of length at most `max_len`.
    pub loops_found: usize,
    /// The loops that enlarged the folded subgroup, shortest first. They
    /// generate the same subgroup as all loops found.
    pub generators: Vec<EdgePath>,
    /// Rank of the subgroup generated by all loops found.
    pub rank: usize,
}

type Key = (VertexId, Vec<Dart>);

/// All reduced paths from `v`, grouped by length `0..=max`.
fn paths_by_length(f: &GraphMap, v: VertexId, max: usize) -> Vec<Vec<Vec<Dart>>> {
    let g = f.graph();
    let mut layers: Vec<Vec<Vec<Dart>>> = vec![vec![Vec::new()]];
    for k in 1..=max {
        let mut next = Vec::new();
        for p in &layers[k - 1] {
            let at = p.last().map_or(v, |&d| g.term(d));
            for &d in g.outgoing(at) {
                if p.last() == Some(&d.inv()) {
                    continue;
                }
                let mut q = p.clone();
                q.push(d);
                next.push(q);
            }
        }
        layers.push(next);
    }
    layers
}

fn key(f: &GraphMap, v: VertexId, q: &[Dart]) -> Key {
    let g = f.graph();
    let end = q.last().map_or(v, |&d| g.term(d));
    let mut w: Vec<Dart> = q.iter().rev().map(|d| d.inv()).collect();
    w.extend(f.map_darts(q));
    (end, reduce(&w))
}

/// Searches all reduced closed paths at `v` of length `1..=max_len` that
/// are fixed by `f_#` and folds them.
///
/// # Panics
///
/// If `f` moves `v`, or if the loops found fail to fold (which would mean
/// a bug in folding, since loops in a graph never satisfy relations).
pub fn oracle_fix_generators(f: &GraphMap, v: VertexId, max_len: usize) -> OracleReport {
    assert_eq!(f.vertex_image(v), v, "the oracle needs a fixed vertex");
    let half = max_len.div_ceil(2);
    let layers = paths_by_length(f, v, half);
    let keyed: Vec<HashMap<Key, Vec<usize>>> = layers
        .iter()
        .map(|layer| {
            let mut m: HashMap<Key, Vec<usize>> = HashMap::new();
            for (i, q) in layer.iter().enumerate() {
                m.entry(key(f, v, q)).or_default().push(i);
            }
            m
        })
        .collect();

    let g = f.graph();
    let mut folded = FoldedGraph::new(v);
    let mut generators = Vec::new();
    let mut loops_found = 0;
    for len in 1..=max_len {
        let (lq, ls) = (len.div_ceil(2), len / 2);
        let mut found: Vec<Vec<Dart>> = Vec::new();
        for (k, qs) in &keyed[lq] {
            let Some(ss) = keyed[ls].get(k) else { continue };
            for &qi in qs {
                let q = &layers[lq][qi];
                for &si in ss {
                    let s = &layers[ls][si];
                    if s.last().is_some() && s.last() == q.last() {
                        continue;
                    }
                    let mut p = q.clone();
                    p.extend(s.iter().rev().map(|d| d.inv()));
                    found.push(p);
                }
            }
        }
        found.sort();
        loops_found += found.len();
        for p in found {
            let path = EdgePath::from_parts_unchecked(v, p);
            debug_assert!(path.is_closed(g) && path.is_reduced());
            if folded.contains(&path) {
                continue;
            }
            match folded.add_petal(g, &path, Vec::new()) {
                Ok(()) => generators.push(path),
                Err(FoldError::NotBased | FoldError::Relation) => {
                    unreachable!("unlabelled closed loops always fold")
                }
            }
        }
    }
    OracleReport {
        vertex: v,
        max_len,
        loops_found,
        rank: folded.rank(),
        generators,
    }
}

//! Layering of linear edges, rewriting of Nielsen cycles into vertex
//! spaces, and the black/white graph of groups of a linear mapping torus.

use std::collections::{BTreeSet, HashMap};

use thiserror::Error;

use crate::cyclic::CyclicWord;
use crate::delta::{BlackVertex, DeltaEdge, DeltaGraph, WhiteVertex, CENTRAL};
use crate::graph::{Dart, EdgeId, MarkedGraph};
use crate::map::GraphMap;
use crate::nielsen::{fix_basis, LinearEdgeRecord, NielsenAnalysis};
use crate::path::{reduce, EdgePath};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RewriteError {
    #[error("cycle `{0}` does not split into fixed edges and pieces E·w^m·~E")]
    NotInVertexSpace(String),
    #[error("linear edges {0:?} are not reached by the layering: their roots use edges that are neither fixed nor in an earlier layer")]
    Unlayered(Vec<String>),
}

/// A letter of a cycle in a vertex space: a fixed dart or a power of the
/// new loop of a linear edge.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Letter {
    Fixed(Dart),
    Mu { edge: EdgeId, power: i64 },
}

pub fn display_letters(g: &MarkedGraph, letters: &[Letter]) -> String {
    letters
        .iter()
        .map(|l| match l {
            Letter::Fixed(d) => g.dart_name(*d),
            Letter::Mu { edge, power: 1 } => format!("mu_{}", g.edge_name(*edge)),
            Letter::Mu { edge, power } => format!("mu_{}^{}", g.edge_name(*edge), power),
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Layers `S_1, S_2, …`: `S_1` holds linear edges whose roots use only
/// fixed edges, and `S_k` those whose roots use fixed edges and edges of
/// earlier layers, at least one of them in `S_{k-1}`.
pub fn dt_stratify(
    f: &GraphMap,
    linear: &[LinearEdgeRecord],
) -> Result<Vec<Vec<EdgeId>>, RewriteError> {
    let g = f.graph();
    let mut allowed: BTreeSet<EdgeId> = g.edges().filter(|&e| f.is_fixed_edge(e)).collect();
    let mut remaining: Vec<&LinearEdgeRecord> = linear.iter().collect();
    let mut layers = Vec::new();
    while !remaining.is_empty() {
        let (layer, rest): (Vec<&LinearEdgeRecord>, Vec<&LinearEdgeRecord>) = remaining
            .into_iter()
            .partition(|r| r.root.darts().iter().all(|d| allowed.contains(&d.edge())));
        if layer.is_empty() {
            return Err(RewriteError::Unlayered(
                rest.iter()
                    .map(|r| g.edge_name(r.edge.edge()).to_string())
                    .collect(),
            ));
        }
        let mut edges: Vec<EdgeId> = layer.iter().map(|r| r.edge.edge()).collect();
        edges.sort();
        allowed.extend(edges.iter().copied());
        layers.push(edges);
        remaining = rest;
    }
    Ok(layers)
}

/// `w^m` as a reduced dart word (`m` may be negative).
fn root_power(root: &[Dart], m: i64) -> Vec<Dart> {
    let unit: Vec<Dart> = if m > 0 {
        root.to_vec()
    } else {
        root.iter().rev().map(|d| d.inv()).collect()
    };
    reduce(&unit.repeat(m.unsigned_abs() as usize))
}

struct Parser<'a> {
    darts: &'a [Dart],
    fixed: &'a [bool],
    by_dart: &'a HashMap<Dart, &'a LinearEdgeRecord>,
    memo: HashMap<usize, Option<Vec<Letter>>>,
}

impl Parser<'_> {
    fn parse(&mut self, pos: usize) -> Option<Vec<Letter>> {
        if pos == self.darts.len() {
            return Some(Vec::new());
        }
        if let Some(hit) = self.memo.get(&pos) {
            return hit.clone();
        }
        let x = self.darts[pos];
        let mut result = None;
        if self.fixed[x.edge().index()] {
            if let Some(mut rest) = self.parse(pos + 1) {
                rest.insert(0, Letter::Fixed(x));
                result = Some(rest);
            }
        } else if let Some(rec) = self.by_dart.get(&x).copied() {
            let left = self.darts.len() - pos - 1;
            // Try every nonzero power whose literal fits before a closing ~D.
            let mut m = 1i64;
            'powers: loop {
                let mut any_fits = false;
                for power in [m, -m] {
                    let body = root_power(rec.root.darts(), power);
                    if body.len() + 1 > left {
                        continue;
                    }
                    any_fits = true;
                    let end = pos + 1 + body.len();
                    if self.darts[pos + 1..end] == body[..] && self.darts[end] == x.inv() {
                        if let Some(mut rest) = self.parse(end + 1) {
                            rest.insert(
                                0,
                                Letter::Mu {
                                    edge: x.edge(),
                                    power,
                                },
                            );
                            result = Some(rest);
                            break 'powers;
                        }
                    }
                }
                if !any_fits {
                    break;
                }
                m += 1;
            }
        }
        self.memo.insert(pos, result.clone());
        result
    }
}

fn parse_darts(f: &GraphMap, linear: &[LinearEdgeRecord], darts: &[Dart]) -> Option<Vec<Letter>> {
    let g = f.graph();
    let fixed: Vec<bool> = g.edges().map(|e| f.is_fixed_edge(e)).collect();
    let by_dart: HashMap<Dart, &LinearEdgeRecord> = linear.iter().map(|r| (r.edge, r)).collect();
    let mut parser = Parser {
        darts,
        fixed: &fixed,
        by_dart: &by_dart,
        memo: HashMap::new(),
    };
    parser.parse(0)
}

/// Splits a based Nielsen loop into fixed darts and new-loop powers.
pub fn rewrite_path(
    f: &GraphMap,
    linear: &[LinearEdgeRecord],
    p: &EdgePath,
) -> Result<Vec<Letter>, RewriteError> {
    parse_darts(f, linear, p.darts())
        .ok_or_else(|| RewriteError::NotInVertexSpace(p.display(f.graph()).to_string()))
}

/// Rewrites a Nielsen cycle as a cycle in one vertex space, replacing each
/// piece `E·w^m·~E` by `mu_E^m`. Rotations are tried in order and the first
/// that splits is returned.
pub fn rewrite_cycle(
    f: &GraphMap,
    linear: &[LinearEdgeRecord],
    u: &CyclicWord,
) -> Result<Vec<Letter>, RewriteError> {
    for k in 0..u.len() {
        if let Some(letters) = parse_darts(f, linear, u.rotate(k).darts()) {
            return Ok(letters);
        }
    }
    Err(RewriteError::NotInVertexSpace(u.display(f.graph())))
}

/// Alias matching the operation name used in reports.
pub fn rewrite_to_vertex_space(
    f: &GraphMap,
    linear: &[LinearEdgeRecord],
    u: &CyclicWord,
) -> Result<Vec<Letter>, RewriteError> {
    rewrite_cycle(f, linear, u)
}

/// The cylinder of one axis: its centre and one leaf per supported edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CylinderStar {
    pub axis: CyclicWord,
    pub center: usize,
    /// `(edge, component of its initial vertex, twist)`.
    pub leaves: Vec<(EdgeId, usize, i64)>,
}

pub fn cylinder_stars(f: &GraphMap, a: &NielsenAnalysis) -> Vec<CylinderStar> {
    let g = f.graph();
    a.classes
        .iter()
        .map(|c| CylinderStar {
            axis: c.axis.clone(),
            center: c.central_component,
            leaves: c
                .records
                .iter()
                .map(|&i| {
                    let r = &a.linear[i];
                    (
                        r.edge.edge(),
                        a.component_of[g.init(r.edge).index()],
                        r.twist,
                    )
                })
                .collect(),
        })
        .collect()
}

/// The graph of groups together with remarks about skipped leaves.
#[derive(Clone, Debug)]
pub struct DeltaBuild {
    pub delta: DeltaGraph,
    pub notes: Vec<String>,
}

/// One black vertex per axis, one white vertex per vertex space of rank at
/// least two, a leaf edge per supported linear edge (twist = signed
/// exponent) and a `CENTRAL` edge when the centre has rank above one.
/// Black vertices left with valence at most one are pruned and counted.
pub fn build_delta(f: &GraphMap, a: &NielsenAnalysis) -> DeltaBuild {
    let g = f.graph();
    let mut notes = Vec::new();
    let white_id = |c: usize| format!("w{c}");
    let white: Vec<WhiteVertex> = a
        .spaces
        .iter()
        .filter(|s| s.rank >= 2)
        .map(|s| WhiteVertex {
            id: white_id(s.id),
            component: Some(s.id),
            rank: s.rank,
            generators: fix_basis(f, a, s.vertices[0])
                .iter()
                .map(|p| p.display(g).to_string())
                .collect(),
        })
        .collect();
    let is_white = |c: usize| a.spaces[c].rank >= 2;

    let mut black = Vec::new();
    let mut edges = Vec::new();
    for (i, star) in cylinder_stars(f, a).into_iter().enumerate() {
        let id = format!("b{i}");
        let axis = star.axis.display(g);
        for &(e, comp, twist) in &star.leaves {
            if is_white(comp) {
                edges.push(DeltaEdge {
                    black: id.clone(),
                    white: white_id(comp),
                    via: g.edge_name(e).to_string(),
                    k: twist,
                });
            } else {
                notes.push(format!(
                    "leaf `{}` of axis `{axis}` ends in a vertex space of rank {}, which is not a white vertex",
                    g.edge_name(e),
                    a.spaces[comp].rank
                ));
            }
        }
        if is_white(star.center) {
            edges.push(DeltaEdge {
                black: id.clone(),
                white: white_id(star.center),
                via: CENTRAL.to_string(),
                k: 0,
            });
        }
        black.push(BlackVertex {
            group: format!("⟨{axis}⟩×⟨t⟩"),
            id,
            axis,
        });
    }
    let mut delta = DeltaGraph {
        black,
        white,
        edges,
        pruned_black: 0,
    };
    for id in delta.prune_low_valence() {
        notes.push(format!(
            "black vertex `{id}` has valence at most one and was pruned"
        ));
    }
    DeltaBuild { delta, notes }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nielsen::analyze;
    use crate::parse::parse_graph_map;

    const GERSTEN: &str =
        "vertex x\nedge a x x\nedge b x x\nedge c x x\nmap a = a\nmap b = b a\nmap c = c a a\n";
    const NESTED: &str = "vertex x\nedge a x x\nedge b x x\nedge d x x\nmap a = a\nmap b = b a\nmap d = d b a ~b a\n";
    const NOTRICH1: &str = "vertex x\nvertex y1\nvertex y2\nedge A x x\nedge B1 y1 y1\nedge B2 y2 y2\nedge C1 y1 x\nedge C2 y2 x\nmap A = A\nmap B1 = B1\nmap B2 = B2\nmap C1 = C1 A\nmap C2 = C2 A A\n";

    fn layer_names(f: &GraphMap) -> Vec<Vec<String>> {
        let a = analyze(f).unwrap();
        dt_stratify(f, &a.linear)
            .unwrap()
            .iter()
            .map(|l| {
                l.iter()
                    .map(|&e| f.graph().edge_name(e).to_string())
                    .collect()
            })
            .collect()
    }

    #[test]
    fn layers() {
        assert_eq!(
            layer_names(&parse_graph_map(GERSTEN).unwrap()),
            vec![vec!["b", "c"]]
        );
        assert_eq!(
            layer_names(&parse_graph_map(NESTED).unwrap()),
            vec![vec!["b"], vec!["d"]]
        );
        let id = GraphMap::identity(parse_graph_map(GERSTEN).unwrap().graph().clone());
        assert!(layer_names(&id).is_empty());
    }

    #[test]
    fn rewriting() {
        let f = parse_graph_map(NESTED).unwrap();
        let g = f.graph();
        let a = analyze(&f).unwrap();
        let u = CyclicWord::from_path(g, &EdgePath::parse(g, "b a ~b a", None).unwrap()).unwrap();
        let r = rewrite_to_vertex_space(&f, &a.linear, &u).unwrap();
        assert_eq!(display_letters(g, &r), "mu_b a");

        let f = parse_graph_map(GERSTEN).unwrap();
        let a = analyze(&f).unwrap();
        let u = CyclicWord::from_path(f.graph(), &EdgePath::parse(f.graph(), "a", None).unwrap())
            .unwrap();
        assert_eq!(
            display_letters(f.graph(), &rewrite_cycle(&f, &a.linear, &u).unwrap()),
            "a"
        );

        let f = parse_graph_map(NOTRICH1).unwrap();
        let a = analyze(&f).unwrap();
        assert_eq!(display_letters(f.graph(), &a.classes[0].rewritten), "A");
    }

    #[test]
    fn rewriting_higher_powers_and_failure() {
        let f = parse_graph_map(GERSTEN).unwrap();
        let g = f.graph();
        let a = analyze(&f).unwrap();
        let p = EdgePath::parse(g, "c ~a ~a ~a ~c b a a ~b a", None).unwrap();
        assert_eq!(
            display_letters(g, &rewrite_path(&f, &a.linear, &p).unwrap()),
            "mu_c^-3 mu_b^2 a"
        );
        let q = EdgePath::parse(g, "b", None).unwrap();
        assert!(rewrite_path(&f, &a.linear, &q).is_err());
    }

    #[test]
    fn deltas() {
        let count = |text: &str| {
            let f = parse_graph_map(text).unwrap();
            let a = analyze(&f).unwrap();
            let d = build_delta(&f, &a).delta;
            (d.black.len(), d.white.len(), d.edges.len())
        };
        assert_eq!(count(NOTRICH1), (1, 2, 2));
        assert_eq!(
            count(&format!("{NOTRICH1}edge P x x\nmap P = P\n")),
            (1, 3, 3)
        );
        assert_eq!(count(GERSTEN), (1, 1, 3));

        let f = parse_graph_map(GERSTEN).unwrap();
        let a = analyze(&f).unwrap();
        let d = build_delta(&f, &a).delta;
        let pairs: Vec<(&str, i64)> = d.edges.iter().map(|e| (e.via.as_str(), e.k)).collect();
        assert_eq!(pairs, vec![("b", 1), ("c", 2), ("CENTRAL", 0)]);
        assert_eq!(d.white[0].generators, vec!["a", "b a ~b", "c a ~c"]);
    }

    #[test]
    fn single_leaf_black_vertex_is_pruned() {
        // a fixed, b -> b a: one leaf and a central edge of rank 2, so the
        // black vertex survives with valence two.
        let f =
            parse_graph_map("vertex x\nedge a x x\nedge b x x\nmap a = a\nmap b = b a\n").unwrap();
        let a = analyze(&f).unwrap();
        let d = build_delta(&f, &a).delta;
        assert_eq!((d.black.len(), d.edges.len(), d.pruned_black), (1, 2, 0));
        assert!(d.unbranched());
    }
}

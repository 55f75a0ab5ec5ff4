//! Nielsen paths, linear edges, fixed-subgraph components and the vertex
//! spaces obtained by attaching one new loop per linear edge.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::classify::{ct_normal_form_check, ct_subgraph_check, CtReport, Growth, GrowthReport};
use crate::cyclic::CyclicWord;
use crate::decompose::{self, Letter, RewriteError};
use crate::graph::{Dart, EdgeId, MarkedGraph, VertexId};
use crate::map::GraphMap;
use crate::path::EdgePath;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum NielsenError {
    #[error("linear edge `{edge}` has suffix root `{root}`, which is not a Nielsen path")]
    RootNotNielsen { edge: String, root: String },
    #[error("input is not in the supported normal form: {0}")]
    NotNormalForm(String),
    #[error(transparent)]
    Rewrite(#[from] RewriteError),
}

/// `true` iff `f_#(p) = p`.
pub fn is_nielsen_path(f: &GraphMap, p: &EdgePath) -> bool {
    f.map_path(p) == *p
}

/// A linear edge `D` with `f(D) = D·w^exponent`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearEdgeRecord {
    /// The edge, oriented so that its image starts with it.
    pub edge: Dart,
    /// Root-free Nielsen loop at `term(edge)`.
    pub root: EdgePath,
    /// Positive exponent of `root` in the suffix.
    pub exponent: i64,
    /// Canonical cyclic word of the conjugacy class of `⟨root⟩`.
    pub axis: CyclicWord,
    /// `exponent`, signed by the orientation of `root` against `axis`.
    pub twist: i64,
}

/// Splits a closed reduced path as `p · c · p̄` with `c` cyclically reduced.
pub fn cyclic_reduction(g: &MarkedGraph, w: &EdgePath) -> (EdgePath, CyclicWord) {
    let d = w.darts();
    let mut i = 0;
    while i + 1 < d.len() - i && d[i] == d[d.len() - 1 - i].inv() {
        i += 1;
    }
    let prefix = EdgePath::from_parts_unchecked(w.start(), d[..i].to_vec());
    let core = EdgePath::from_parts_unchecked(prefix.end(g), d[i..d.len() - i].to_vec());
    let cyc = CyclicWord::from_path(g, &core)
        .expect("core of a nonempty reduced loop is cyclically reduced");
    (prefix, cyc)
}

/// Writes a nonempty closed reduced path as `w^n` with `w` root-free.
pub fn loop_root(g: &MarkedGraph, u: &EdgePath) -> (EdgePath, i64) {
    let (p, core) = cyclic_reduction(g, u);
    let (r, n) = core.primitive_root();
    let mut darts = p.darts().to_vec();
    darts.extend_from_slice(r.darts());
    darts.extend(p.darts().iter().rev().map(|d| d.inv()));
    (EdgePath::from_parts_unchecked(u.start(), darts), n as i64)
}

/// One record per edge of degree one, in edge order.
pub fn linear_edges(
    f: &GraphMap,
    growth: &GrowthReport,
) -> Result<Vec<LinearEdgeRecord>, NielsenError> {
    let g = f.graph();
    let mut out = Vec::new();
    for e in g.edges() {
        if growth.degree(e) != Growth::Poly(1) {
            continue;
        }
        let form = growth
            .suffix_form(e)
            .expect("non-fixed polynomial edge has a suffix form");
        let (root, exponent) = loop_root(g, &form.suffix);
        if !is_nielsen_path(f, &root) {
            return Err(NielsenError::RootNotNielsen {
                edge: g.edge_name(e).to_string(),
                root: root.display(g).to_string(),
            });
        }
        let (_, core) = cyclic_reduction(g, &root);
        let axis = core.canonical();
        let sign = core
            .orientation_against(&axis)
            .expect("a word shares its own axis");
        out.push(LinearEdgeRecord {
            edge: form.dart,
            root,
            exponent,
            axis,
            twist: sign as i64 * exponent,
        });
    }
    Ok(out)
}

/// A component of the fixed subgraph together with the new loops attached
/// at it. `rank` is the first Betti number of the enlarged graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VertexSpace {
    pub id: usize,
    pub vertices: Vec<VertexId>,
    pub fixed_edges: Vec<EdgeId>,
    /// `(linear edge, attachment vertex)`; the loop stands for `D·w·D̄`.
    pub new_loops: Vec<(EdgeId, VertexId)>,
    pub rank: usize,
}

/// Connected components of all vertices plus the fixed edges, numbered by
/// their smallest vertex. `new_loops` is empty and `rank` counts only
/// fixed edges.
pub fn fixed_components(f: &GraphMap) -> (Vec<VertexSpace>, Vec<usize>) {
    let g = f.graph();
    let n = g.vertex_count();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut r = x;
        while p[r] != r {
            r = p[r];
        }
        let mut c = x;
        while p[c] != r {
            let next = p[c];
            p[c] = r;
            c = next;
        }
        r
    }
    for e in g.edges().filter(|&e| f.is_fixed_edge(e)) {
        let (a, b) = (
            find(&mut parent, g.source(e).index()),
            find(&mut parent, g.target(e).index()),
        );
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut id_of_root: BTreeMap<usize, usize> = BTreeMap::new();
    let component_of: Vec<usize> = (0..n)
        .map(|v| {
            let r = find(&mut parent, v);
            let next = id_of_root.len();
            *id_of_root.entry(r).or_insert(next)
        })
        .collect();
    let mut spaces: Vec<VertexSpace> = (0..id_of_root.len())
        .map(|id| VertexSpace {
            id,
            vertices: Vec::new(),
            fixed_edges: Vec::new(),
            new_loops: Vec::new(),
            rank: 0,
        })
        .collect();
    for v in g.vertices() {
        spaces[component_of[v.index()]].vertices.push(v);
    }
    for e in g.edges().filter(|&e| f.is_fixed_edge(e)) {
        spaces[component_of[g.source(e).index()]]
            .fixed_edges
            .push(e);
    }
    for s in &mut spaces {
        s.rank = s.fixed_edges.len() + 1 - s.vertices.len();
    }
    (spaces, component_of)
}

/// Fixed components with one new loop per linear edge at `init(D)`.
pub fn vertex_spaces(f: &GraphMap, linear: &[LinearEdgeRecord]) -> (Vec<VertexSpace>, Vec<usize>) {
    let g = f.graph();
    let (mut spaces, component_of) = fixed_components(f);
    for rec in linear {
        let v = g.init(rec.edge);
        spaces[component_of[v.index()]]
            .new_loops
            .push((rec.edge.edge(), v));
    }
    for s in &mut spaces {
        s.rank = s.fixed_edges.len() + s.new_loops.len() + 1 - s.vertices.len();
    }
    (spaces, component_of)
}

/// Axis of linear edges with the edges it supports and the high-rank
/// vertices it passes through.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NielsenClass {
    pub axis: CyclicWord,
    /// Indices into the linear-edge list, in edge order.
    pub records: Vec<usize>,
    /// `E(u)`.
    pub edges: Vec<EdgeId>,
    /// `T(u)`: vertices on the axis whose fixed subgroup has rank above one.
    pub high_rank_vertices: Vec<VertexId>,
    /// The vertex space containing the rewritten axis.
    pub central_component: usize,
    /// The axis rewritten as a cycle in the central vertex space.
    pub rewritten: Vec<Letter>,
}

/// Everything the decision procedures read from a normal-form map.
#[derive(Clone, Debug)]
pub struct NielsenAnalysis {
    pub growth: GrowthReport,
    pub linear: Vec<LinearEdgeRecord>,
    pub spaces: Vec<VertexSpace>,
    pub component_of: Vec<usize>,
    pub classes: Vec<NielsenClass>,
}

impl NielsenAnalysis {
    pub fn fix_rank(&self, v: VertexId) -> usize {
        self.spaces[self.component_of[v.index()]].rank
    }

    pub fn record(&self, e: EdgeId) -> Option<&LinearEdgeRecord> {
        self.linear.iter().find(|r| r.edge.edge() == e)
    }
}

/// Runs the normal-form check and all Nielsen computations.
pub fn analyze(f: &GraphMap) -> Result<NielsenAnalysis, NielsenError> {
    analyze_report(f, ct_normal_form_check(f))
}

/// [`analyze`] for a map restricted to an invariant subgraph, which may
/// have hanging edges.
pub fn analyze_subgraph(f: &GraphMap) -> Result<NielsenAnalysis, NielsenError> {
    analyze_report(f, ct_subgraph_check(f))
}

fn analyze_report(f: &GraphMap, report: CtReport) -> Result<NielsenAnalysis, NielsenError> {
    if !report.passes() {
        let msg = report
            .hard()
            .map(|d| format!("[{}] {}", d.axiom, d.message))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(NielsenError::NotNormalForm(msg));
    }
    let growth = report.growth.expect("passing report carries growth");
    let linear = report.linear;
    let (spaces, component_of) = vertex_spaces(f, &linear);
    let mut analysis = NielsenAnalysis {
        growth,
        linear,
        spaces,
        component_of,
        classes: Vec::new(),
    };
    analysis.classes = nielsen_cycle_classes(f, &analysis)?;
    Ok(analysis)
}

/// `rank Fix_v(f)`, read from the vertex space containing `v`.
pub fn fix_rank(f: &GraphMap, v: VertexId) -> Result<usize, NielsenError> {
    Ok(analyze(f)?.fix_rank(v))
}

/// Groups linear edges by axis, in order of canonical axis.
pub fn nielsen_cycle_classes(
    f: &GraphMap,
    a: &NielsenAnalysis,
) -> Result<Vec<NielsenClass>, NielsenError> {
    let g = f.graph();
    let mut groups: BTreeMap<Vec<Dart>, Vec<usize>> = BTreeMap::new();
    for (i, rec) in a.linear.iter().enumerate() {
        groups.entry(rec.axis.darts().to_vec()).or_default().push(i);
    }
    let mut classes = Vec::new();
    for (_, records) in groups {
        let axis = a.linear[records[0]].axis.clone();
        let edges = records.iter().map(|&i| a.linear[i].edge.edge()).collect();
        let high_rank_vertices = axis
            .vertices(g)
            .into_iter()
            .filter(|&v| a.fix_rank(v) > 1)
            .collect();
        let first = &a.linear[records[0]];
        let central_component = a.component_of[g.term(first.edge).index()];
        let rewritten = decompose::rewrite_cycle(f, &a.linear, &axis)?;
        classes.push(NielsenClass {
            axis,
            records,
            edges,
            high_rank_vertices,
            central_component,
            rewritten,
        });
    }
    Ok(classes)
}

/// A free basis of `Fix_v(f)` as reduced loops at `v`: one loop per fixed
/// edge outside a spanning tree of the component and one conjugate of
/// `D·w·D̄` per new loop.
pub fn fix_basis(f: &GraphMap, a: &NielsenAnalysis, v: VertexId) -> Vec<EdgePath> {
    let g = f.graph();
    let space = &a.spaces[a.component_of[v.index()]];
    // Spanning tree of the component's fixed edges, from `v`.
    let mut tree: Vec<Option<Vec<Dart>>> = vec![None; g.vertex_count()];
    tree[v.index()] = Some(Vec::new());
    let mut tree_edges = vec![false; g.edge_count()];
    let mut queue = std::collections::VecDeque::from([v]);
    while let Some(x) = queue.pop_front() {
        for &d in g.outgoing(x) {
            if !f.is_fixed_edge(d.edge()) {
                continue;
            }
            let y = g.term(d);
            if tree[y.index()].is_none() {
                let mut p = tree[x.index()].clone().expect("visited");
                p.push(d);
                tree[y.index()] = Some(p);
                tree_edges[d.edge().index()] = true;
                queue.push_back(y);
            }
        }
    }
    let to = |x: VertexId| tree[x.index()].clone().expect("vertex in component");
    let conj = |inner: &[Dart], at: VertexId| {
        let tau = to(at);
        let mut darts = tau.clone();
        darts.extend_from_slice(inner);
        darts.extend(tau.iter().rev().map(|d| d.inv()));
        EdgePath::from_parts_unchecked(v, darts).tighten()
    };
    let mut basis = Vec::new();
    for &e in &space.fixed_edges {
        if !tree_edges[e.index()] {
            basis.push(conj(&[e.forward()], g.source(e)));
        }
    }
    for &(e, at) in &space.new_loops {
        let rec = a.record(e).expect("new loop comes from a linear edge");
        let mut inner = vec![rec.edge];
        inner.extend_from_slice(rec.root.darts());
        inner.push(rec.edge.inv());
        basis.push(conj(&inner, at));
    }
    basis
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fold::stallings_fold;
    use crate::parse::parse_graph_map;

    const GERSTEN: &str =
        "vertex x\nedge a x x\nedge b x x\nedge c x x\nmap a = a\nmap b = b a\nmap c = c a a\n";
    const NOTRICH1: &str = "vertex x\nvertex y1\nvertex y2\nedge A x x\nedge B1 y1 y1\nedge B2 y2 y2\nedge C1 y1 x\nedge C2 y2 x\nmap A = A\nmap B1 = B1\nmap B2 = B2\nmap C1 = C1 A\nmap C2 = C2 A A\n";

    fn notrich2() -> GraphMap {
        parse_graph_map(&format!("{NOTRICH1}edge P x x\nmap P = P\n")).unwrap()
    }

    fn path(f: &GraphMap, s: &str) -> EdgePath {
        EdgePath::parse(f.graph(), s, None).unwrap()
    }

    #[test]
    fn nielsen_paths() {
        let f = parse_graph_map(GERSTEN).unwrap();
        assert!(is_nielsen_path(&f, &path(&f, "a")));
        assert!(!is_nielsen_path(&f, &path(&f, "b")));
        assert!(is_nielsen_path(&f, &path(&f, "b a ~b")));
    }

    #[test]
    fn linear_edge_records() {
        let f = parse_graph_map(NOTRICH1).unwrap();
        let a = analyze(&f).unwrap();
        let g = f.graph();
        let got: Vec<(String, String, i64)> = a
            .linear
            .iter()
            .map(|r| {
                (
                    g.dart_name(r.edge),
                    r.root.display(g).to_string(),
                    r.exponent,
                )
            })
            .collect();
        assert_eq!(
            got,
            vec![("C1".into(), "A".into(), 1), ("C2".into(), "A".into(), 2)]
        );
        let id = GraphMap::identity(g.clone());
        assert!(analyze(&id).unwrap().linear.is_empty());
    }

    #[test]
    fn components_and_ranks() {
        let f = parse_graph_map(NOTRICH1).unwrap();
        let g = f.graph();
        let (comps, _) = fixed_components(&f);
        let shape: Vec<(Vec<&str>, Vec<&str>)> = comps
            .iter()
            .map(|c| {
                (
                    c.vertices.iter().map(|&v| g.vertex_name(v)).collect(),
                    c.fixed_edges.iter().map(|&e| g.edge_name(e)).collect(),
                )
            })
            .collect();
        assert_eq!(
            shape,
            vec![
                (vec!["x"], vec!["A"]),
                (vec!["y1"], vec!["B1"]),
                (vec!["y2"], vec!["B2"])
            ]
        );
        let a = analyze(&f).unwrap();
        let ranks: Vec<usize> = a.spaces.iter().map(|s| s.rank).collect();
        assert_eq!(ranks, vec![1, 2, 2]);
        assert_eq!(a.fix_rank(g.vertex_id("x").unwrap()), 1);

        let f2 = notrich2();
        assert_eq!(
            fix_rank(&f2, f2.graph().vertex_id("x").unwrap()).unwrap(),
            2
        );

        let gersten = parse_graph_map(GERSTEN).unwrap();
        let a = analyze(&gersten).unwrap();
        assert_eq!(a.spaces.len(), 1);
        assert_eq!(a.spaces[0].rank, 3);
    }

    #[test]
    fn fix_basis_matches_hand_computation() {
        let f = parse_graph_map(GERSTEN).unwrap();
        let g = f.graph();
        let a = analyze(&f).unwrap();
        let basis = fix_basis(&f, &a, g.basepoint());
        let shown: Vec<String> = basis.iter().map(|p| p.display(g).to_string()).collect();
        assert_eq!(shown, vec!["a", "b a ~b", "c a ~c"]);
        assert!(basis.iter().all(|p| is_nielsen_path(&f, p)));
        assert_eq!(stallings_fold(g, g.basepoint(), &basis).unwrap().rank(), 3);
    }

    #[test]
    fn classes() {
        let f = parse_graph_map(GERSTEN).unwrap();
        let g = f.graph();
        let a = analyze(&f).unwrap();
        assert_eq!(a.classes.len(), 1);
        let c = &a.classes[0];
        assert_eq!(c.axis.display(g), "a");
        assert_eq!(
            c.edges.iter().map(|&e| g.edge_name(e)).collect::<Vec<_>>(),
            vec!["b", "c"]
        );
        assert_eq!(c.high_rank_vertices, vec![g.vertex_id("x").unwrap()]);

        let f = parse_graph_map(NOTRICH1).unwrap();
        let a = analyze(&f).unwrap();
        assert_eq!(a.classes.len(), 1);
        assert_eq!(a.classes[0].edges.len(), 2);
        assert!(a.classes[0].high_rank_vertices.is_empty());
    }

    #[test]
    fn non_cyclically_reduced_roots() {
        // At y the suffix b a ~b is a Nielsen loop whose axis is a.
        let f = parse_graph_map(
            "vertex x\nvertex y\nedge a x x\nedge b y x\nedge c y y\nmap a = a\nmap b = b\nmap c = c b a ~b\n",
        )
        .unwrap();
        let g = f.graph();
        let a = analyze(&f).unwrap();
        let rec = a.record(g.edge_id("c").unwrap()).unwrap();
        assert_eq!(rec.root.display(g).to_string(), "b a ~b");
        assert_eq!(rec.axis.display(g), "a");
        assert_eq!(a.classes.len(), 1);
    }

    #[test]
    fn loop_root_extracts_powers() {
        let f =
            parse_graph_map("vertex x\nedge a x x\nedge b x x\nmap a = a\nmap b = b a\n").unwrap();
        let (root, n) = loop_root(f.graph(), &path(&f, "a b a b"));
        assert_eq!(
            (root.display(f.graph()).to_string(), n),
            ("a b".to_string(), 2)
        );
    }
}

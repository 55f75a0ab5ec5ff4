//! Invariant filtrations, transition matrices and growth of strata.

use std::cmp::Reverse;
use std::collections::BinaryHeap;
use std::fmt;

use petgraph::algo::tarjan_scc;
use petgraph::graph::DiGraph;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::graph::{Dart, EdgeId};
use crate::map::GraphMap;
use crate::nielsen::{self, LinearEdgeRecord};
use crate::path::{reduce, EdgePath};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ClassifyError {
    #[error("input outside the supported class at edge `{edge}`: {reason}")]
    Unsupported { edge: String, reason: String },
    #[error("cancellation while iterating edge `{edge}` at step {step}: the splitting E·u·f(u)·… is not complete")]
    Cancellation { edge: String, step: usize },
}

/// Polynomial degree or exponential growth; ordered by speed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Growth {
    Poly(u32),
    Exponential,
}

impl fmt::Display for Growth {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Growth::Poly(d) => write!(f, "{d}"),
            Growth::Exponential => write!(f, "exp"),
        }
    }
}

impl Serialize for Growth {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            Growth::Poly(d) => s.serialize_u32(*d),
            Growth::Exponential => s.serialize_str("exp"),
        }
    }
}

/// Strata in an order where each stratum's images only use itself and
/// earlier strata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Filtration {
    pub strata: Vec<Vec<EdgeId>>,
}

impl Filtration {
    /// Edges of the cumulative subgraph `G_r` (strata `0..=r`).
    pub fn cumulative(&self, r: usize) -> Vec<EdgeId> {
        let mut out: Vec<EdgeId> = self.strata[..=r].iter().flatten().copied().collect();
        out.sort();
        out
    }

    pub fn stratum_of(&self, e: EdgeId) -> usize {
        self.strata
            .iter()
            .position(|s| s.contains(&e))
            .expect("every edge lies in a stratum")
    }
}

/// Strongly connected components of "occurs in the image of", ordered so
/// that a component comes after every component it uses. Ties are broken
/// by smallest edge index, so the order is deterministic.
pub fn compute_filtration(f: &GraphMap) -> Filtration {
    let g = f.graph();
    let mut dg: DiGraph<EdgeId, ()> = DiGraph::new();
    let nodes: Vec<_> = g.edges().map(|e| dg.add_node(e)).collect();
    for e in g.edges() {
        let mut seen: Vec<EdgeId> = f.edge_image(e).iter().map(|d| d.edge()).collect();
        seen.sort();
        seen.dedup();
        for used in seen {
            dg.add_edge(nodes[e.index()], nodes[used.index()], ());
        }
    }
    let mut comps: Vec<Vec<EdgeId>> = tarjan_scc(&dg)
        .into_iter()
        .map(|c| c.into_iter().map(|n| dg[n]).collect())
        .collect();
    for c in &mut comps {
        c.sort();
    }
    let mut comp_of = vec![0usize; g.edge_count()];
    for (i, c) in comps.iter().enumerate() {
        for e in c {
            comp_of[e.index()] = i;
        }
    }
    // Kahn's algorithm on the condensation: a component is ready once all
    // components it uses are placed.
    let n = comps.len();
    let mut uses: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut used_by: Vec<Vec<usize>> = vec![Vec::new(); n];
    for e in g.edges() {
        for d in f.edge_image(e) {
            let (a, b) = (comp_of[e.index()], comp_of[d.edge().index()]);
            if a != b && !uses[a].contains(&b) {
                uses[a].push(b);
                used_by[b].push(a);
            }
        }
    }
    let mut pending: Vec<usize> = uses.iter().map(Vec::len).collect();
    let mut heap: BinaryHeap<Reverse<(EdgeId, usize)>> = (0..n)
        .filter(|&i| pending[i] == 0)
        .map(|i| Reverse((comps[i][0], i)))
        .collect();
    let mut strata = Vec::with_capacity(n);
    while let Some(Reverse((_, i))) = heap.pop() {
        strata.push(comps[i].clone());
        for &j in &used_by[i] {
            pending[j] -= 1;
            if pending[j] == 0 {
                heap.push(Reverse((comps[j][0], j)));
            }
        }
    }
    Filtration { strata }
}

/// Entry `(i, j)`: occurrences of stratum edge `i` (either orientation) in
/// the image of stratum edge `j`.
pub fn transition_matrix(f: &GraphMap, stratum: &[EdgeId]) -> Vec<Vec<u64>> {
    let m = stratum.len();
    let mut mat = vec![vec![0u64; m]; m];
    for (j, &ej) in stratum.iter().enumerate() {
        for d in f.edge_image(ej) {
            if let Some(i) = stratum.iter().position(|&e| e == d.edge()) {
                mat[i][j] += 1;
            }
        }
    }
    mat
}

/// Exact test for Perron–Frobenius eigenvalue above one: iterate the matrix
/// on the all-ones vector for `4m` steps and compare the total with `m`.
pub fn is_exponential(mat: &[Vec<u64>]) -> bool {
    let m = mat.len();
    let mut v = vec![1u128; m];
    for _ in 0..4 * m {
        let next: Vec<u128> = (0..m)
            .map(|i| {
                (0..m).fold(0u128, |acc, j| {
                    acc.saturating_add((mat[i][j] as u128).saturating_mul(v[j]))
                })
            })
            .collect();
        v = next;
    }
    v.iter().fold(0u128, |a, b| a.saturating_add(*b)) > m as u128
}

/// How a non-fixed polynomially growing edge is presented: the dart `D`
/// (the edge or its reverse) with `f(D) = D·u`, and the suffix `u`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SuffixForm {
    pub dart: Dart,
    pub suffix: EdgePath,
}

#[derive(Clone, Debug)]
pub struct GrowthReport {
    pub filtration: Filtration,
    pub degrees: Vec<Growth>,
    /// Indices into `filtration.strata` of exponentially growing strata.
    pub eg_strata: Vec<usize>,
    /// Suffix presentation of each non-fixed edge of polynomial growth.
    pub suffix_forms: Vec<Option<SuffixForm>>,
    pub overall: Growth,
}

impl GrowthReport {
    pub fn degree(&self, e: EdgeId) -> Growth {
        self.degrees[e.index()]
    }

    pub fn suffix_form(&self, e: EdgeId) -> Option<&SuffixForm> {
        self.suffix_forms[e.index()].as_ref()
    }

    pub fn has_eg(&self) -> bool {
        !self.eg_strata.is_empty()
    }
}

/// Number of iterations used for the complete-splitting check.
pub fn splitting_check_steps(f: &GraphMap) -> usize {
    2 * f.graph().rank().max(1) + 2
}

/// Reads a single NEG edge as `D·u`, trying both orientations.
fn suffix_form(f: &GraphMap, e: EdgeId) -> Result<SuffixForm, String> {
    let g = f.graph();
    for d in [e.forward(), e.backward()] {
        let img = f.dart_image(d);
        if img.first() == Some(&d) {
            let suffix = EdgePath::from_parts_unchecked(g.term(d), img[1..].to_vec());
            return Ok(SuffixForm { dart: d, suffix });
        }
    }
    Err("the image neither begins nor ends with the edge itself".into())
}

/// Checks `[f^k(D)] = D·[u·f#(u)·…·f#^{k-1}(u)]` for `k <= steps`, with the
/// leading `D` never cancelled. The suffix terms may cancel against each
/// other only when the suffix is a Nielsen path that is not cyclically
/// reduced; otherwise the concatenation must already be reduced.
pub fn check_complete_splitting(
    f: &GraphMap,
    form: &SuffixForm,
    steps: usize,
) -> Result<(), usize> {
    let mut tail: Vec<Dart> = Vec::new();
    let mut piece = form.suffix.darts().to_vec();
    let nielsen_suffix = f.map_darts(&piece) == piece;
    let mut expected_len = 0;
    let mut actual = vec![form.dart];
    for k in 1..=steps {
        tail.extend_from_slice(&piece);
        expected_len += piece.len();
        tail = reduce(&tail);
        actual = f.map_darts(&actual);
        if !nielsen_suffix && tail.len() != expected_len {
            return Err(k);
        }
        let ok = tail.first() != Some(&form.dart.inv())
            && actual.first() == Some(&form.dart)
            && actual[1..] == tail[..];
        if !ok {
            return Err(k);
        }
        piece = f.map_darts(&piece);
    }
    Ok(())
}

pub fn classify_strata(f: &GraphMap) -> Result<GrowthReport, ClassifyError> {
    let g = f.graph();
    let filtration = compute_filtration(f);
    let mut degrees = vec![Growth::Poly(0); g.edge_count()];
    let mut suffix_forms = vec![None; g.edge_count()];
    let mut eg_strata = Vec::new();
    let steps = splitting_check_steps(f);
    let unsupported = |e: EdgeId, reason: &str| ClassifyError::Unsupported {
        edge: g.edge_name(e).to_string(),
        reason: reason.to_string(),
    };

    for (r, stratum) in filtration.strata.iter().enumerate() {
        let mat = transition_matrix(f, stratum);
        if is_exponential(&mat) {
            eg_strata.push(r);
            for e in stratum {
                degrees[e.index()] = Growth::Exponential;
            }
            continue;
        }
        if stratum.len() > 1 {
            return Err(unsupported(
                stratum[0],
                "periodic edges must be fixed, but this stratum permutes several edges",
            ));
        }
        let e = stratum[0];
        if f.is_fixed_edge(e) {
            continue;
        }
        if mat[0][0] != 1 {
            return Err(unsupported(e, "the edge does not occur in its own image"));
        }
        let form = suffix_form(f, e).map_err(|reason| unsupported(e, &reason))?;
        // A Nielsen suffix makes the edge linear whatever edges it crosses.
        let top = if f.map_path(&form.suffix).darts() == form.suffix.darts() {
            Growth::Poly(0)
        } else {
            form.suffix
                .darts()
                .iter()
                .map(|d| degrees[d.edge().index()])
                .max()
                .expect("suffix of a non-fixed edge is nonempty")
        };
        degrees[e.index()] = match top {
            Growth::Exponential => Growth::Exponential,
            Growth::Poly(d) => Growth::Poly(d + 1),
        };
        if top != Growth::Exponential {
            check_complete_splitting(f, &form, steps).map_err(|step| {
                ClassifyError::Cancellation {
                    edge: g.edge_name(e).to_string(),
                    step,
                }
            })?;
        }
        suffix_forms[e.index()] = Some(form);
    }
    let overall = degrees.iter().copied().max().unwrap_or(Growth::Poly(0));
    Ok(GrowthReport {
        filtration,
        degrees,
        eg_strata,
        suffix_forms,
        overall,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Severity {
    Note,
    Soft,
    Hard,
}

/// One finding of [`ct_normal_form_check`], named after the violated axiom.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Diagnostic {
    pub axiom: &'static str,
    pub severity: Severity,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct CtReport {
    pub diagnostics: Vec<Diagnostic>,
    pub growth: Option<GrowthReport>,
    pub linear: Vec<LinearEdgeRecord>,
}

impl CtReport {
    pub fn passes(&self) -> bool {
        self.diagnostics
            .iter()
            .all(|d| d.severity != Severity::Hard)
    }

    pub fn hard(&self) -> impl Iterator<Item = &Diagnostic> {
        self.diagnostics
            .iter()
            .filter(|d| d.severity == Severity::Hard)
    }
}

fn push(
    diagnostics: &mut Vec<Diagnostic>,
    axiom: &'static str,
    severity: Severity,
    message: String,
) {
    diagnostics.push(Diagnostic {
        axiom,
        severity,
        message,
    });
}

/// Verifies the normal-form axioms the decision pipeline depends on and
/// collects linear-edge records when they hold.
pub fn ct_normal_form_check(f: &GraphMap) -> CtReport {
    check(f, true)
}

/// As [`ct_normal_form_check`], for the restriction of a normal-form map to
/// an invariant subgraph. Such a restriction may have hanging edges.
pub fn ct_subgraph_check(f: &GraphMap) -> CtReport {
    check(f, false)
}

fn check(f: &GraphMap, require_minimal: bool) -> CtReport {
    let g = f.graph();
    let mut diagnostics = Vec::new();

    for v in g.vertices() {
        if f.vertex_image(v) != v {
            push(
                &mut diagnostics,
                "periodicity",
                Severity::Hard,
                format!(
                    "vertex `{}` is sent to `{}`",
                    g.vertex_name(v),
                    g.vertex_name(f.vertex_image(v))
                ),
            );
        }
        if require_minimal && g.outgoing(v).len() == 1 && g.rank() > 0 {
            push(
                &mut diagnostics,
                "minimal-graph",
                Severity::Hard,
                format!(
                    "vertex `{}` has valence one; remove the hanging edge",
                    g.vertex_name(v)
                ),
            );
        }
    }
    if !diagnostics.is_empty() {
        return CtReport {
            diagnostics,
            growth: None,
            linear: Vec::new(),
        };
    }

    let growth = match classify_strata(f) {
        Ok(r) => r,
        Err(e) => {
            let axiom = match e {
                ClassifyError::Cancellation { .. } => "complete-splitting",
                ClassifyError::Unsupported { .. } => "suffix-form",
            };
            push(&mut diagnostics, axiom, Severity::Hard, e.to_string());
            return CtReport {
                diagnostics,
                growth: None,
                linear: Vec::new(),
            };
        }
    };
    if growth.has_eg() {
        push(
            &mut diagnostics,
            "neg-only",
            Severity::Soft,
            format!(
                "{} exponentially growing strata present; only the polynomial part is checked",
                growth.eg_strata.len()
            ),
        );
    }

    let linear = match nielsen::linear_edges(f, &growth) {
        Ok(l) => l,
        Err(e) => {
            push(
                &mut diagnostics,
                "linear-edges",
                Severity::Hard,
                e.to_string(),
            );
            return CtReport {
                diagnostics,
                growth: Some(growth),
                linear: Vec::new(),
            };
        }
    };
    for (i, a) in linear.iter().enumerate() {
        for b in &linear[i + 1..] {
            if a.axis == b.axis && a.twist == b.twist {
                push(&mut diagnostics,
                    "linear-exponents",
                    Severity::Hard,
                    format!(
                        "linear edges `{}` and `{}` share an axis and the exponent {}; distinct exponents are required on a common axis",
                        g.edge_name(a.edge.edge()),
                        g.edge_name(b.edge.edge()),
                        a.twist
                    ),
                );
            }
            if a.axis == b.axis && a.root.darts() != b.root.darts() {
                push(&mut diagnostics,
                    "linear-roots",
                    Severity::Note,
                    format!(
                        "linear edges `{}` and `{}` share an axis but their roots differ by rotation or inversion; canonicalized",
                        g.edge_name(a.edge.edge()),
                        g.edge_name(b.edge.edge())
                    ),
                );
            }
        }
    }
    CtReport {
        diagnostics,
        growth: Some(growth),
        linear,
    }
}

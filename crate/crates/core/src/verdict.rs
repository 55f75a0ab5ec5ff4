//! Assembling the answer: growth class, excessive linearity, the
//! black-vertex valence test on the graph of groups, and the final flags.

use std::fmt;

use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::classify::{ct_normal_form_check, Growth, GrowthReport};
use crate::decompose::build_delta;
use crate::delta::DeltaGraph;
use crate::graph::{EdgeId, MarkedGraph};
use crate::map::{GraphMap, MapError};
use crate::nielsen::{analyze_subgraph, NielsenAnalysis, NielsenClass, NielsenError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerdictError {
    #[error("input is not in the supported normal form: {0}")]
    NotNormalForm(String),
    #[error(transparent)]
    Analysis(#[from] NielsenError),
    #[error("restricting to the linear part failed: {0}")]
    Restriction(#[from] MapError),
    #[error("internal inconsistency: {0}")]
    InternalInconsistency(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum GrowthClass {
    FiniteOrder,
    Linear,
    Polynomial(u32),
    Exponential,
}

impl GrowthClass {
    pub fn from_growth(g: Growth) -> Self {
        match g {
            Growth::Poly(0) => GrowthClass::FiniteOrder,
            Growth::Poly(1) => GrowthClass::Linear,
            Growth::Poly(d) => GrowthClass::Polynomial(d),
            Growth::Exponential => GrowthClass::Exponential,
        }
    }

    /// Words used in human-readable reports.
    pub fn describe(self) -> String {
        match self {
            GrowthClass::FiniteOrder => "finite-order".into(),
            GrowthClass::Linear => "linear growth".into(),
            GrowthClass::Polynomial(2) => "quadratic growth".into(),
            GrowthClass::Polynomial(3) => "cubic growth".into(),
            GrowthClass::Polynomial(d) => format!("polynomial growth of degree {d}"),
            GrowthClass::Exponential => "exponential growth".into(),
        }
    }
}

impl fmt::Display for GrowthClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GrowthClass::FiniteOrder => f.write_str("finite-order"),
            GrowthClass::Linear => f.write_str("linear"),
            GrowthClass::Polynomial(d) => write!(f, "polynomial({d})"),
            GrowthClass::Exponential => f.write_str("exponential"),
        }
    }
}

impl Serialize for GrowthClass {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

/// A Nielsen cycle together with `E(u)` and `T(u)`, by name.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ExcessiveWitness {
    pub axis: String,
    #[serde(rename = "E")]
    pub edges: Vec<String>,
    #[serde(rename = "T")]
    pub vertices: Vec<String>,
}

impl ExcessiveWitness {
    pub fn count(&self) -> usize {
        self.edges.len() + self.vertices.len()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub growth: GrowthClass,
    pub rank: usize,
    pub excessive: Option<ExcessiveWitness>,
    pub unbranched: bool,
    pub hhg: bool,
    pub coarse_median: bool,
    pub quasicubical: bool,
    pub no_2rbf: bool,
    pub caveats: Vec<String>,
}

impl Verdict {
    fn new(
        growth: GrowthClass,
        rank: usize,
        excessive: Option<ExcessiveWitness>,
        caveats: Vec<String>,
    ) -> Self {
        let yes = excessive.is_none();
        Verdict {
            growth,
            rank,
            excessive,
            unbranched: yes,
            hhg: yes,
            coarse_median: yes,
            quasicubical: yes,
            no_2rbf: yes,
            caveats,
        }
    }

    /// The JSON report, with `witness` filled in by the caller if one was
    /// constructed.
    pub fn to_json(&self, witness: Option<Value>) -> Value {
        let mut v = serde_json::to_value(self).expect("verdicts serialize");
        v["witness"] = witness.unwrap_or(Value::Null);
        v
    }

    pub fn headline(&self) -> String {
        format!(
            "HHG: {} ({})",
            if self.hhg { "yes" } else { "no" },
            self.growth.describe()
        )
    }
}

/// Caveat attached to inputs with exponentially growing strata.
pub const EG_CAVEAT: &str =
    "EG strata present: verdict conditional on input being a CT representative";

/// Whether a class has excessive linearity: at least two linear edges on
/// the cycle and `|E(u)| + |T(u)| >= 3`.
pub fn is_excessive(class: &NielsenClass) -> bool {
    let e = class.edges.len();
    e >= 2 && e + class.high_rank_vertices.len() >= 3
}

fn witness_of(g: &MarkedGraph, class: &NielsenClass) -> ExcessiveWitness {
    ExcessiveWitness {
        axis: class.axis.display(g),
        edges: class
            .edges
            .iter()
            .map(|&e| g.edge_name(e).to_string())
            .collect(),
        vertices: class
            .high_rank_vertices
            .iter()
            .map(|&v| g.vertex_name(v).to_string())
            .collect(),
    }
}

/// Every class with excessive linearity, in order of canonical axis.
pub fn all_excessive(f: &GraphMap, a: &NielsenAnalysis) -> Vec<(usize, ExcessiveWitness)> {
    a.classes
        .iter()
        .enumerate()
        .filter(|(_, c)| is_excessive(c))
        .map(|(i, c)| (i, witness_of(f.graph(), c)))
        .collect()
}

/// The first class with excessive linearity.
pub fn excessive_linearity(f: &GraphMap, a: &NielsenAnalysis) -> Option<ExcessiveWitness> {
    all_excessive(f, a).into_iter().next().map(|(_, w)| w)
}

/// Every black vertex of `d` has valence exactly two.
pub fn unbranched(d: &DeltaGraph) -> bool {
    d.unbranched()
}

/// One connected piece of the linear part, as a map in its own right.
/// Names of vertices and edges are those of the original graph.
#[derive(Clone, Debug)]
pub struct LinearComponent {
    pub edges: Vec<EdgeId>,
    pub map: GraphMap,
}

/// The largest invariant subgraph of edges of degree at most one, split
/// into connected components; components without a cycle are dropped.
pub fn restrict_linear(
    f: &GraphMap,
    growth: &GrowthReport,
) -> Result<Vec<LinearComponent>, VerdictError> {
    let g = f.graph();
    let mut keep: Vec<bool> = g
        .edges()
        .map(|e| growth.degree(e) <= Growth::Poly(1))
        .collect();
    // Invariance: drop edges whose image leaves the subgraph.
    loop {
        let mut changed = false;
        for e in g.edges() {
            if keep[e.index()] && f.edge_image(e).iter().any(|d| !keep[d.edge().index()]) {
                keep[e.index()] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Components of the kept edges.
    let mut comp_of_edge: Vec<Option<usize>> = vec![None; g.edge_count()];
    let mut comps: Vec<Vec<EdgeId>> = Vec::new();
    for start in g.edges().filter(|e| keep[e.index()]) {
        if comp_of_edge[start.index()].is_some() {
            continue;
        }
        let id = comps.len();
        let mut stack = vec![start];
        comp_of_edge[start.index()] = Some(id);
        let mut members = Vec::new();
        while let Some(e) = stack.pop() {
            members.push(e);
            for v in [g.source(e), g.target(e)] {
                for &d in g.outgoing(v) {
                    let n = d.edge();
                    if keep[n.index()] && comp_of_edge[n.index()].is_none() {
                        comp_of_edge[n.index()] = Some(id);
                        stack.push(n);
                    }
                }
            }
        }
        members.sort();
        let mut vs: Vec<_> = members
            .iter()
            .flat_map(|&e| [g.source(e), g.target(e)])
            .collect();
        vs.sort();
        vs.dedup();
        if members.len() >= vs.len() {
            comps.push(members);
        }
    }

    let mut out = Vec::new();
    for edges in comps {
        let mut vertices: Vec<_> = edges
            .iter()
            .flat_map(|&e| [g.source(e), g.target(e)])
            .collect();
        vertices.sort();
        vertices.dedup();
        let sub = MarkedGraph::new(
            vertices.iter().map(|&v| g.vertex_name(v).to_string()),
            edges.iter().map(|&e| {
                (
                    g.edge_name(e).to_string(),
                    g.vertex_name(g.source(e)).to_string(),
                    g.vertex_name(g.target(e)).to_string(),
                )
            }),
        )
        .map_err(|e| VerdictError::InternalInconsistency(format!("restricted graph: {e}")))?;
        let new_index = |e: EdgeId| {
            edges
                .binary_search(&e)
                .expect("image stays in the component")
        };
        let images = edges
            .iter()
            .map(|&e| {
                f.edge_image(e)
                    .iter()
                    .map(|d| {
                        let ne = sub.edges().nth(new_index(d.edge())).expect("edge exists");
                        if d.is_reversed() {
                            ne.backward()
                        } else {
                            ne.forward()
                        }
                    })
                    .collect()
            })
            .collect();
        out.push(LinearComponent {
            map: GraphMap::new(sub, images)?,
            edges,
        });
    }
    Ok(out)
}

/// Per-component record of both decision paths.
#[derive(Clone, Debug)]
pub struct ComponentDecision {
    pub component: LinearComponent,
    pub analysis: NielsenAnalysis,
    pub excessive: Vec<(usize, ExcessiveWitness)>,
    pub delta: DeltaGraph,
    pub delta_notes: Vec<String>,
}

/// Runs excessive linearity and the valence test on one linear map and
/// insists that they agree.
pub fn decide_component(component: LinearComponent) -> Result<ComponentDecision, VerdictError> {
    let f = &component.map;
    let analysis = analyze_subgraph(f)?;
    let excessive = all_excessive(f, &analysis);
    let built = build_delta(f, &analysis);
    let via_delta = built.delta.unbranched();
    if excessive.is_empty() != via_delta {
        let names: Vec<&str> = f.graph().edges().map(|e| f.graph().edge_name(e)).collect();
        return Err(VerdictError::InternalInconsistency(format!(
            "on the linear component {{{}}} excessive linearity is {} but the graph of groups is {}; maximum black valence {}; notes: [{}]",
            names.join(", "),
            if excessive.is_empty() { "absent" } else { "present" },
            if via_delta { "unbranched" } else { "branched" },
            built.delta.max_black_valence(),
            built.notes.join("; ")
        )));
    }
    Ok(ComponentDecision {
        component,
        analysis,
        excessive,
        delta: built.delta,
        delta_notes: built.notes,
    })
}

/// Full decision together with the per-component data it was read from.
#[derive(Clone, Debug)]
pub struct Decision {
    pub verdict: Verdict,
    pub growth: GrowthReport,
    pub components: Vec<ComponentDecision>,
}

pub fn decide_detailed(f: &GraphMap) -> Result<Decision, VerdictError> {
    let report = ct_normal_form_check(f);
    if !report.passes() {
        let msg = report
            .hard()
            .map(|d| format!("[{}] {}", d.axiom, d.message))
            .collect::<Vec<_>>()
            .join("; ");
        return Err(VerdictError::NotNormalForm(msg));
    }
    let growth = report.growth.expect("passing report carries growth");
    let class = GrowthClass::from_growth(growth.overall);
    let rank = f.graph().rank();
    let mut caveats = Vec::new();
    if growth.has_eg() {
        caveats.push(EG_CAVEAT.to_string());
    }
    if class == GrowthClass::FiniteOrder {
        return Ok(Decision {
            verdict: Verdict::new(class, rank, None, caveats),
            growth,
            components: Vec::new(),
        });
    }

    let components = restrict_linear(f, &growth)?
        .into_iter()
        .map(decide_component)
        .collect::<Result<Vec<_>, _>>()?;
    let first = components
        .iter()
        .find_map(|c| c.excessive.first().map(|(_, w)| w.clone()));
    if rank <= 2 {
        if let Some(w) = first {
            return Err(VerdictError::InternalInconsistency(format!(
                "rank {rank} input reported excessive linearity on axis `{}`",
                w.axis
            )));
        }
    }
    Ok(Decision {
        verdict: Verdict::new(class, rank, first, caveats),
        growth,
        components,
    })
}

/// The verdict for a normal-form map.
pub fn decide(f: &GraphMap) -> Result<Verdict, VerdictError> {
    Ok(decide_detailed(f)?.verdict)
}

/// Compact summary used in reports.
pub fn summary_json(d: &Decision, g: &MarkedGraph) -> Value {
    let degrees: serde_json::Map<String, Value> = g
        .edges()
        .map(|e| {
            (
                g.edge_name(e).to_string(),
                serde_json::to_value(d.growth.degree(e)).expect("serializes"),
            )
        })
        .collect();
    json!({ "degrees": degrees, "components": d.components.len() })
}

//! Explicit obstructions for maps with excessive linearity: three blocks of
//! the mapping torus whose common intersection contains a copy of `Z²`.
//!
//! For a linear edge `D` with `f(D) = D·w^d` the block at `y = term(D)` is
//! `D̄·Fix_{init D}·D × ⟨w^d·t_y⟩`, where `t_y` acts on loops at `y` by
//! `f_#`. The central block is `Fix_y × ⟨t_y⟩`. Blocks at different
//! vertices are brought to a common vertex by a Nielsen path that
//! conjugates one root to the other, then everything is moved to the
//! basepoint. Every claimed relation is recomputed before a witness is
//! returned.

use serde_json::{json, Value};
use thiserror::Error;

use crate::fold::stallings_fold;
use crate::graph::{MarkedGraph, VertexId};
use crate::map::GraphMap;
use crate::nielsen::{cyclic_reduction, fix_basis, is_nielsen_path, NielsenAnalysis, NielsenError};
use crate::path::{reduce, EdgePath};
use crate::torus::{MappingTorus, TorusElement, TorusError};
use crate::verdict::is_excessive;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum WitnessError {
    #[error("the axis `{0}` does not have excessive linearity, so there is nothing to witness")]
    NotExcessive(String),
    #[error("witness construction is not supported here: {0}")]
    Unsupported(String),
    #[error(transparent)]
    Torus(#[from] TorusError),
    #[error(transparent)]
    Analysis(#[from] NielsenError),
    #[error("internal error: witness check failed: {0}")]
    CheckFailed(String),
}

/// A subgroup `⟨free_part⟩ × ⟨center⟩` of the mapping torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WitnessBlock {
    /// Linear edge the block comes from, or `None` for the central block.
    pub edge: Option<String>,
    pub free_part: Vec<TorusElement>,
    pub center: TorusElement,
    /// Exponent `e` with `center = w^e · t` at the common vertex.
    pub exponent: i64,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchingWitness {
    pub axis: String,
    pub basepoint: String,
    /// `(r, t)`: the root and the stable letter at the common vertex.
    pub base_quasiflat: (TorusElement, TorusElement),
    pub blocks: Vec<WitnessBlock>,
    /// Generator of the line `L_i` in each block (its centre).
    pub quasilines: Vec<TorusElement>,
    /// Two commuting independent elements lying in all three blocks.
    pub triple_intersection: (TorusElement, TorusElement),
}

impl BranchingWitness {
    pub fn to_json(&self, g: &MarkedGraph) -> Value {
        let el = |e: &TorusElement| e.to_json(g);
        json!({
            "axis": self.axis,
            "basepoint": self.basepoint,
            "base_quasiflat": [el(&self.base_quasiflat.0), el(&self.base_quasiflat.1)],
            "blocks": self.blocks.iter().map(|b| json!({
                "edge": b.edge,
                "free_part": b.free_part.iter().map(el).collect::<Vec<_>>(),
                "center": el(&b.center),
            })).collect::<Vec<_>>(),
            "quasilines": self.quasilines.iter().map(el).collect::<Vec<_>>(),
            "triple_intersection": [el(&self.triple_intersection.0), el(&self.triple_intersection.1)],
        })
    }

    pub fn display(&self, g: &MarkedGraph) -> String {
        let mut out = format!("axis {} (words based at {})\n", self.axis, self.basepoint);
        for (i, b) in self.blocks.iter().enumerate() {
            let free: Vec<String> = b.free_part.iter().map(|e| e.display(g)).collect();
            out.push_str(&format!(
                "block {} [{}]: <{}> x <{}>\n",
                i + 1,
                b.edge.as_deref().unwrap_or("central"),
                free.join(", "),
                b.center.display(g)
            ));
        }
        out.push_str(&format!(
            "triple intersection contains <{}, {}>\n",
            self.triple_intersection.0.display(g),
            self.triple_intersection.1.display(g)
        ));
        out
    }
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

fn power_word(w: &[crate::graph::Dart], n: i64) -> Vec<crate::graph::Dart> {
    let unit: Vec<_> = if n >= 0 {
        w.to_vec()
    } else {
        w.iter().rev().map(|d| d.inv()).collect()
    };
    reduce(&unit.repeat(n.unsigned_abs() as usize))
}

/// `true` iff no nonzero powers of `a` and `b` agree, for commuting `a`, `b`.
/// With `g = gcd(k_a, k_b)` this reduces to `a^(k_b/g) ≠ b^(k_a/g)`.
fn independent(m: &MappingTorus, a: &TorusElement, b: &TorusElement) -> Result<bool, TorusError> {
    let (ka, kb) = (a.t_exp, b.t_exp);
    if ka == 0 && kb == 0 {
        // Commuting elements of a free group are dependent.
        return Ok(false);
    }
    let g = gcd(ka, kb);
    let x = m.pow(a, kb / g)?;
    let y = m.pow(b, ka / g)?;
    Ok(x != y)
}

/// Builds and checks the witness for class `class` of `a`.
pub fn branching_witness(
    f: &GraphMap,
    a: &NielsenAnalysis,
    class: usize,
) -> Result<BranchingWitness, WitnessError> {
    let g = f.graph();
    let cls = &a.classes[class];
    let axis_name = cls.axis.display(g);
    if !is_excessive(cls) {
        return Err(WitnessError::NotExcessive(axis_name));
    }
    let m = MappingTorus::new(f)?;

    let r0 = &a.linear[cls.records[0]];
    let y0 = g.term(r0.edge);
    let w0 = r0.root.darts().to_vec();
    let (p0, c0) = cyclic_reduction(g, &r0.root);

    let mut blocks: Vec<(WitnessBlock, Vec<EdgePath>)> = Vec::new();
    for &ri in &cls.records {
        let r = &a.linear[ri];
        let (p, c) = cyclic_reduction(g, &r.root);
        let (sign, c) = if c.orientation_against(&c0) == Some(1) {
            (1, c)
        } else {
            (-1, c.inverse())
        };
        let k = (0..c0.len()).find(|&k| c0.rotate(k) == c).ok_or_else(|| {
            WitnessError::Unsupported(format!(
                "roots on axis `{axis_name}` are not rotations of each other"
            ))
        })?;
        // σ = p0 · c0[..k] · p̄ runs from y0 to y and conjugates the
        // (oriented) root at y to the root at y0.
        let mut sigma = p0.darts().to_vec();
        sigma.extend_from_slice(&c0.darts()[..k]);
        sigma.extend(p.darts().iter().rev().map(|d| d.inv()));
        let sigma = EdgePath::from_parts_unchecked(y0, reduce(&sigma));
        let oriented = power_word(r.root.darts(), sign);
        let mut check = sigma.darts().to_vec();
        check.extend_from_slice(&oriented);
        check.extend(sigma.darts().iter().rev().map(|d| d.inv()));
        if !is_nielsen_path(f, &sigma) || reduce(&check) != w0 {
            return Err(WitnessError::Unsupported(format!(
                "no Nielsen path aligns the root of `{}` with the root of `{}`",
                g.edge_name(r.edge.edge()),
                g.edge_name(r0.edge.edge())
            )));
        }
        let x = g.init(r.edge);
        let conj = |h: &EdgePath| {
            let mut darts = sigma.darts().to_vec();
            darts.push(r.edge.inv());
            darts.extend_from_slice(h.darts());
            darts.push(r.edge);
            darts.extend(sigma.darts().iter().rev().map(|d| d.inv()));
            EdgePath::from_parts_unchecked(y0, reduce(&darts))
        };
        let free: Vec<EdgePath> = fix_basis(f, a, x).iter().map(conj).collect();
        let exponent = sign * r.exponent;
        let center_word = EdgePath::from_parts_unchecked(y0, power_word(&w0, exponent));
        let block = WitnessBlock {
            edge: Some(g.edge_name(r.edge.edge()).to_string()),
            free_part: free
                .iter()
                .map(|h| m.transport(y0, h, 0))
                .collect::<Result<_, _>>()?,
            center: m.transport(y0, &center_word, 1)?,
            exponent,
        };
        blocks.push((block, free));
    }
    if a.fix_rank(y0) > 1 {
        let free = fix_basis(f, a, y0);
        let block = WitnessBlock {
            edge: None,
            free_part: free
                .iter()
                .map(|h| m.transport(y0, h, 0))
                .collect::<Result<_, _>>()?,
            center: m.transport(y0, &EdgePath::empty(y0), 1)?,
            exponent: 0,
        };
        blocks.push((block, free));
    }
    if blocks.len() < 3 {
        return Err(WitnessError::Unsupported(format!(
            "axis `{axis_name}` yields only {} blocks; the high-rank vertices lie outside the central component",
            blocks.len()
        )));
    }
    blocks.truncate(3);

    let lcm = blocks
        .iter()
        .map(|(b, _)| b.exponent.abs())
        .filter(|&e| e != 0)
        .fold(1i64, |acc, e| acc / gcd(acc, e) * e);
    let r_elem = m.transport(y0, &EdgePath::from_parts_unchecked(y0, w0.clone()), 0)?;
    let t_elem = m.transport(y0, &EdgePath::empty(y0), 1)?;
    let pair2 = m.transport(
        y0,
        &EdgePath::from_parts_unchecked(y0, power_word(&w0, lcm)),
        1,
    )?;
    let witness = BranchingWitness {
        axis: axis_name,
        basepoint: g.vertex_name(g.basepoint()).to_string(),
        base_quasiflat: (r_elem.clone(), t_elem),
        quasilines: blocks.iter().map(|(b, _)| b.center.clone()).collect(),
        blocks: blocks.into_iter().map(|(b, _)| b).collect(),
        triple_intersection: (r_elem, pair2),
    };
    verify_witness(f, &witness)?;
    Ok(witness)
}

/// Rechecks every claim of a witness with mapping-torus arithmetic.
pub fn verify_witness(f: &GraphMap, w: &BranchingWitness) -> Result<(), WitnessError> {
    let g = f.graph();
    let m = MappingTorus::new(f)?;
    let fail = |msg: String| Err(WitnessError::CheckFailed(msg));
    for (i, b) in w.blocks.iter().enumerate() {
        for h in &b.free_part {
            if h.t_exp != 0 {
                return fail(format!(
                    "block {} has a free generator with nonzero t-exponent",
                    i + 1
                ));
            }
            if !m.commutes(&b.center, h)? {
                return fail(format!(
                    "centre {} of block {} does not commute with {}",
                    b.center.display(g),
                    i + 1,
                    h.display(g)
                ));
            }
        }
        if b.center.t_exp != 1 {
            return fail(format!(
                "centre of block {} does not have t-exponent 1",
                i + 1
            ));
        }
    }
    for i in 0..w.blocks.len() {
        for j in i + 1..w.blocks.len() {
            let (ci, cj) = (&w.blocks[i].center, &w.blocks[j].center);
            if m.commutes(ci, cj)? && !independent(&m, ci, cj)? {
                return fail(format!(
                    "centres of blocks {} and {} are commensurable",
                    i + 1,
                    j + 1
                ));
            }
        }
    }
    let (p1, p2) = &w.triple_intersection;
    if !m.commutes(p1, p2)? {
        return fail("the triple-intersection generators do not commute".into());
    }
    if !independent(&m, p1, p2)? {
        return fail("the triple-intersection generators are dependent".into());
    }
    for (i, b) in w.blocks.iter().enumerate() {
        let words: Vec<EdgePath> = b.free_part.iter().map(|h| h.word.clone()).collect();
        let folded = stallings_fold(g, g.basepoint(), &words)
            .map_err(|e| WitnessError::CheckFailed(format!("block {}: {e}", i + 1)))?;
        for p in [p1, p2] {
            let rest = m.mul(p, &m.pow(&b.center, -p.t_exp)?)?;
            if rest.t_exp != 0 || !folded.contains(&rest.word) {
                return fail(format!("{} is not in block {}", p.display(g), i + 1));
            }
        }
    }
    Ok(())
}

/// Vertex at which the witness for `class` is assembled.
pub fn common_vertex(f: &GraphMap, a: &NielsenAnalysis, class: usize) -> VertexId {
    f.graph().term(a.linear[a.classes[class].records[0]].edge)
}

//! The bipartite black/white graph of groups and its file formats.
//!
//! Text format, one record per line, `#` comments:
//!
//! ```text
//! black b0 axis=a
//! white w0 rank=3
//! deltaedge b0 w0 via=b k=1
//! ```
//!
//! The axis value runs to the end of the line, so it may contain spaces.
//! JSON input (detected by a leading `{`) uses the serde field names of
//! [`DeltaGraph`].

use std::collections::{BTreeMap, HashSet};
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::parse::strip_comment;

/// Label of the edge joining a black vertex to its central white vertex.
pub const CENTRAL: &str = "CENTRAL";

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlackVertex {
    pub id: String,
    pub axis: String,
    #[serde(default)]
    pub group: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WhiteVertex {
    pub id: String,
    #[serde(default)]
    pub component: Option<usize>,
    pub rank: usize,
    #[serde(default)]
    pub generators: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaEdge {
    pub black: String,
    pub white: String,
    pub via: String,
    pub k: i64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DeltaGraph {
    pub black: Vec<BlackVertex>,
    pub white: Vec<WhiteVertex>,
    pub edges: Vec<DeltaEdge>,
    #[serde(default)]
    pub pruned_black: usize,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeltaError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate vertex id `{0}`")]
    DuplicateVertex(String),
    #[error("edge refers to unknown vertex `{0}`")]
    UnknownVertex(String),
    #[error(
        "edge `{black}`–`{white}` is not bipartite: it must join a black vertex to a white vertex"
    )]
    NotBipartite { black: String, white: String },
    #[error("white vertex `{id}` has rank {rank}; white vertices need rank at least 2")]
    LowRankWhite { id: String, rank: usize },
    #[error("black vertex `{0}` has two edges with zero twist")]
    ZeroTwists(String),
    #[error("invalid JSON: {0}")]
    Json(String),
}

impl DeltaGraph {
    pub fn valence(&self, black_id: &str) -> usize {
        self.edges.iter().filter(|e| e.black == black_id).count()
    }

    pub fn max_black_valence(&self) -> usize {
        self.black
            .iter()
            .map(|b| self.valence(&b.id))
            .max()
            .unwrap_or(0)
    }

    /// Every black vertex has valence exactly two.
    pub fn unbranched(&self) -> bool {
        self.black.iter().all(|b| self.valence(&b.id) == 2)
    }

    /// Removes black vertices of valence at most one and their edges;
    /// returns the removed ids.
    pub fn prune_low_valence(&mut self) -> Vec<String> {
        let doomed: Vec<String> = self
            .black
            .iter()
            .filter(|b| self.valence(&b.id) <= 1)
            .map(|b| b.id.clone())
            .collect();
        if doomed.is_empty() {
            return doomed;
        }
        let set: HashSet<&String> = doomed.iter().collect();
        self.black.retain(|b| !set.contains(&b.id));
        self.edges.retain(|e| !set.contains(&e.black));
        self.pruned_black += doomed.len();
        doomed
    }

    /// Structural checks. Bipartiteness and vertex references are always
    /// enforced; rank and twist invariants only when `strict`. Returns
    /// warnings for relaxed violations.
    pub fn validate(&self, strict: bool) -> Result<Vec<String>, DeltaError> {
        let mut warnings = Vec::new();
        let mut ids = HashSet::new();
        for id in self
            .black
            .iter()
            .map(|b| &b.id)
            .chain(self.white.iter().map(|w| &w.id))
        {
            if !ids.insert(id) {
                return Err(DeltaError::DuplicateVertex(id.clone()));
            }
        }
        let blacks: HashSet<&String> = self.black.iter().map(|b| &b.id).collect();
        let whites: HashSet<&String> = self.white.iter().map(|w| &w.id).collect();
        for e in &self.edges {
            for id in [&e.black, &e.white] {
                if !ids.contains(id) {
                    return Err(DeltaError::UnknownVertex(id.clone()));
                }
            }
            if !blacks.contains(&e.black) || !whites.contains(&e.white) {
                return Err(DeltaError::NotBipartite {
                    black: e.black.clone(),
                    white: e.white.clone(),
                });
            }
        }
        for w in &self.white {
            if w.rank < 2 {
                if strict {
                    return Err(DeltaError::LowRankWhite {
                        id: w.id.clone(),
                        rank: w.rank,
                    });
                }
                warnings.push(format!("white vertex `{}` has rank {}", w.id, w.rank));
            }
        }
        for b in &self.black {
            let zeros = self
                .edges
                .iter()
                .filter(|e| e.black == b.id && e.k == 0)
                .count();
            if zeros >= 2 {
                if strict {
                    return Err(DeltaError::ZeroTwists(b.id.clone()));
                }
                warnings.push(format!(
                    "black vertex `{}` has {zeros} edges with zero twist",
                    b.id
                ));
            }
            let v = self.valence(&b.id);
            if !strict && v <= 1 {
                warnings.push(format!("black vertex `{}` has valence {v}", b.id));
            }
        }
        Ok(warnings)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("delta graphs serialize")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for b in &self.black {
            let _ = writeln!(out, "black {} axis={}", b.id, b.axis);
        }
        for w in &self.white {
            let _ = writeln!(out, "white {} rank={}", w.id, w.rank);
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "deltaedge {} {} via={} k={}",
                e.black, e.white, e.via, e.k
            );
        }
        out
    }

    /// Graphviz document: black vertices filled, white hollow, edges
    /// labelled `via:k`.
    pub fn to_dot(&self) -> String {
        let quote = |s: &str| s.replace('\\', "\\\\").replace('"', "\\\"");
        let mut out = String::from("graph delta {\n");
        for b in &self.black {
            let _ = writeln!(
                out,
                "  \"{}\" [shape=circle, style=filled, fillcolor=black, fontcolor=white, label=\"{}\\n{}\"];",
                quote(&b.id),
                quote(&b.id),
                quote(&b.axis)
            );
        }
        for w in &self.white {
            let _ = writeln!(
                out,
                "  \"{}\" [shape=circle, label=\"{}\\nrank {}\"];",
                quote(&w.id),
                quote(&w.id),
                w.rank
            );
        }
        for e in &self.edges {
            let _ = writeln!(
                out,
                "  \"{}\" -- \"{}\" [label=\"{}:{}\"];",
                quote(&e.black),
                quote(&e.white),
                quote(&e.via),
                e.k
            );
        }
        out.push_str("}\n");
        out
    }
}

fn syntax(line: usize, message: impl Into<String>) -> DeltaError {
    DeltaError::Syntax {
        line,
        message: message.into(),
    }
}

fn parse_text(text: &str) -> Result<DeltaGraph, DeltaError> {
    let mut d = DeltaGraph::default();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        let kind = toks.next().expect("nonempty line");
        let id = toks
            .next()
            .ok_or_else(|| syntax(line_no, format!("`{kind}` needs an id")))?
            .to_string();
        match kind {
            "black" => {
                let rest = line.split_once("axis=").map(|(_, r)| r.trim().to_string());
                let axis = rest.ok_or_else(|| syntax(line_no, "expected `black ID axis=WORD`"))?;
                d.black.push(BlackVertex {
                    group: format!("⟨{axis}⟩×⟨t⟩"),
                    id,
                    axis,
                });
            }
            "white" => {
                let kv = key_values(line_no, toks)?;
                let rank = kv
                    .get("rank")
                    .ok_or_else(|| syntax(line_no, "expected `white ID rank=N`"))?
                    .parse()
                    .map_err(|_| syntax(line_no, "rank must be a nonnegative integer"))?;
                d.white.push(WhiteVertex {
                    id,
                    component: None,
                    rank,
                    generators: Vec::new(),
                });
            }
            "deltaedge" => {
                let white = toks.next().ok_or_else(|| {
                    syntax(line_no, "expected `deltaedge BLACK WHITE via=NAME k=INT`")
                })?;
                let kv = key_values(line_no, toks)?;
                let via = kv
                    .get("via")
                    .ok_or_else(|| syntax(line_no, "missing `via=`"))?
                    .to_string();
                let k = kv
                    .get("k")
                    .ok_or_else(|| syntax(line_no, "missing `k=`"))?
                    .parse()
                    .map_err(|_| syntax(line_no, "k must be an integer"))?;
                d.edges.push(DeltaEdge {
                    black: id,
                    white: white.to_string(),
                    via,
                    k,
                });
            }
            other => return Err(syntax(line_no, format!("unknown directive `{other}`"))),
        }
    }
    Ok(d)
}

fn key_values<'a>(
    line: usize,
    toks: impl Iterator<Item = &'a str>,
) -> Result<BTreeMap<&'a str, &'a str>, DeltaError> {
    toks.map(|t| {
        t.split_once('=')
            .ok_or_else(|| syntax(line, format!("expected key=value, found `{t}`")))
    })
    .collect()
}

/// Parses text or JSON and validates. With `prune` the rank and twist
/// invariants are enforced and black vertices of valence at most one are
/// removed (with a warning each); without it violations become warnings.
pub fn parse_delta(text: &str, prune: bool) -> Result<(DeltaGraph, Vec<String>), DeltaError> {
    let mut d = if text.trim_start().starts_with('{') {
        serde_json::from_str(text).map_err(|e| DeltaError::Json(e.to_string()))?
    } else {
        parse_text(text)?
    };
    let mut warnings = d.validate(prune)?;
    if prune {
        for id in d.prune_low_valence() {
            warnings.push(format!(
                "black vertex `{id}` has valence at most one and was pruned"
            ));
        }
    }
    Ok((d, warnings))
}

//! The line-oriented text format for graph maps.
//!
//! ```text
//! # comment
//! vertex x
//! edge a x x
//! map a = a
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::graph::{GraphError, MarkedGraph};
use crate::map::{GraphMap, MapError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseError {
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("edge `{0}` has no map line")]
    MissingMap(String),
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Map(#[from] MapError),
}

fn syntax(line: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line,
        message: message.into(),
    }
}

/// Strips a trailing `#` comment and surrounding whitespace.
pub(crate) fn strip_comment(line: &str) -> &str {
    line.split('#').next().unwrap_or("").trim()
}

pub fn parse_graph_map(text: &str) -> Result<GraphMap, ParseError> {
    let mut vertices: Vec<String> = Vec::new();
    let mut known_vertices: HashMap<String, usize> = HashMap::new();
    let mut edges: Vec<(String, String, String)> = Vec::new();
    let mut edge_lines: HashMap<String, usize> = HashMap::new();
    let mut maps: Vec<(usize, String, Vec<String>)> = Vec::new();
    let mut map_lines: HashMap<String, usize> = HashMap::new();

    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = strip_comment(raw);
        if line.is_empty() {
            continue;
        }
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("vertex") => {
                let name = toks
                    .next()
                    .ok_or_else(|| syntax(lineno, "`vertex` needs a name"))?;
                if toks.next().is_some() {
                    return Err(syntax(lineno, "trailing tokens after vertex name"));
                }
                if known_vertices.insert(name.to_string(), lineno).is_some() {
                    return Err(syntax(lineno, format!("duplicate vertex `{name}`")));
                }
                vertices.push(name.to_string());
            }
            Some("edge") => {
                let parts: Vec<&str> = toks.collect();
                let [name, src, dst] = parts[..] else {
                    return Err(syntax(lineno, "expected `edge NAME SRC DST`"));
                };
                for v in [src, dst] {
                    if !known_vertices.contains_key(v) {
                        return Err(syntax(
                            lineno,
                            format!("edge `{name}` uses undeclared vertex `{v}`"),
                        ));
                    }
                }
                if name.starts_with('~') {
                    return Err(syntax(
                        lineno,
                        format!("edge name `{name}` must not start with `~`"),
                    ));
                }
                if edge_lines.insert(name.to_string(), lineno).is_some() {
                    return Err(syntax(lineno, format!("duplicate edge `{name}`")));
                }
                edges.push((name.to_string(), src.to_string(), dst.to_string()));
            }
            Some("map") => {
                let name = toks
                    .next()
                    .ok_or_else(|| syntax(lineno, "`map` needs an edge name"))?;
                if toks.next() != Some("=") {
                    return Err(syntax(lineno, "expected `map NAME = TOK ...`"));
                }
                let image: Vec<String> = toks.map(str::to_string).collect();
                if image.is_empty() {
                    return Err(syntax(lineno, format!("image of `{name}` is empty")));
                }
                if map_lines.insert(name.to_string(), lineno).is_some() {
                    return Err(syntax(lineno, format!("duplicate map line for `{name}`")));
                }
                maps.push((lineno, name.to_string(), image));
            }
            Some(other) => return Err(syntax(lineno, format!("unknown directive `{other}`"))),
            None => unreachable!(),
        }
    }

    let graph = MarkedGraph::new(vertices, edges)?;
    let mut images = vec![None; graph.edge_count()];
    for (lineno, name, image) in maps {
        let e = graph
            .edge_id(&name)
            .ok_or_else(|| syntax(lineno, format!("map for undeclared edge `{name}`")))?;
        let darts = image
            .iter()
            .map(|t| {
                graph
                    .parse_dart(t)
                    .ok_or_else(|| syntax(lineno, format!("unknown edge `{t}` in image")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        images[e.index()] = Some(darts);
    }
    let images = graph
        .edges()
        .map(|e| {
            images[e.index()]
                .take()
                .ok_or_else(|| ParseError::MissingMap(graph.edge_name(e).to_string()))
        })
        .collect::<Result<Vec<_>, _>>()?;
    Ok(GraphMap::new(graph, images)?)
}

/// Serializes a map in the text format; `parse_graph_map` inverts it.
pub fn write_graph_map(f: &GraphMap) -> String {
    let g = f.graph();
    let mut out = g.to_string();
    for e in g.edges() {
        let img: Vec<String> = f.edge_image(e).iter().map(|&d| g.dart_name(d)).collect();
        let _ = writeln!(out, "map {} = {}", g.edge_name(e), img.join(" "));
    }
    out
}

//! Edge paths and free reduction.

use std::fmt;

use thiserror::Error;

use crate::graph::{Dart, MarkedGraph, VertexId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error(
        "darts `{0}` and `{1}` do not compose: the first ends where the second does not start"
    )]
    NotComposable(String, String),
    #[error("unknown edge `{0}`")]
    UnknownEdge(String),
    #[error("path starts at `{found}` but `{expected}` was required")]
    WrongStart { expected: String, found: String },
    #[error("empty path")]
    Empty,
}

/// A finite sequence of composable darts starting at `start`.
///
/// The start vertex is stored explicitly so that the empty path at a vertex
/// is a value in its own right.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct EdgePath {
    start: VertexId,
    darts: Vec<Dart>,
}

impl EdgePath {
    pub fn empty(at: VertexId) -> Self {
        EdgePath {
            start: at,
            darts: Vec::new(),
        }
    }

    pub fn from_dart(g: &MarkedGraph, d: Dart) -> Self {
        EdgePath {
            start: g.init(d),
            darts: vec![d],
        }
    }

    /// Builds a path, checking that consecutive darts compose.
    pub fn new(g: &MarkedGraph, darts: Vec<Dart>) -> Result<Self, PathError> {
        let start = *darts.first().ok_or(PathError::Empty)?;
        for pair in darts.windows(2) {
            if g.term(pair[0]) != g.init(pair[1]) {
                return Err(PathError::NotComposable(
                    g.dart_name(pair[0]),
                    g.dart_name(pair[1]),
                ));
            }
        }
        Ok(EdgePath {
            start: g.init(start),
            darts,
        })
    }

    /// Builds a path starting at `start`; `darts` may be empty.
    pub fn with_start(
        g: &MarkedGraph,
        start: VertexId,
        darts: Vec<Dart>,
    ) -> Result<Self, PathError> {
        if let Some(&first) = darts.first() {
            if g.init(first) != start {
                return Err(PathError::WrongStart {
                    expected: g.vertex_name(start).to_string(),
                    found: g.vertex_name(g.init(first)).to_string(),
                });
            }
            return Self::new(g, darts);
        }
        Ok(Self::empty(start))
    }

    pub(crate) fn from_parts_unchecked(start: VertexId, darts: Vec<Dart>) -> Self {
        EdgePath { start, darts }
    }

    /// Parses whitespace-separated dart tokens. `1` or an empty string
    /// denotes the empty path, which then needs `start`.
    pub fn parse(g: &MarkedGraph, text: &str, start: Option<VertexId>) -> Result<Self, PathError> {
        let mut darts = Vec::new();
        for tok in text.split_whitespace() {
            if tok == "1" {
                continue;
            }
            darts.push(
                g.parse_dart(tok)
                    .ok_or_else(|| PathError::UnknownEdge(tok.to_string()))?,
            );
        }
        match start {
            Some(s) => Self::with_start(g, s, darts),
            None => Self::new(g, darts),
        }
    }

    pub fn start(&self) -> VertexId {
        self.start
    }

    pub fn end(&self, g: &MarkedGraph) -> VertexId {
        self.darts.last().map_or(self.start, |&d| g.term(d))
    }

    pub fn darts(&self) -> &[Dart] {
        &self.darts
    }

    pub fn len(&self) -> usize {
        self.darts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.darts.is_empty()
    }

    pub fn is_closed(&self, g: &MarkedGraph) -> bool {
        self.end(g) == self.start
    }

    pub fn is_reduced(&self) -> bool {
        self.darts.windows(2).all(|p| p[1] != p[0].inv())
    }

    /// Reduced and, if closed, with first and last darts not cancelling.
    pub fn is_cyclically_reduced(&self) -> bool {
        self.is_reduced()
            && match (self.darts.first(), self.darts.last()) {
                (Some(&a), Some(&b)) if self.darts.len() > 1 => a != b.inv(),
                _ => true,
            }
    }

    pub fn reverse(&self, g: &MarkedGraph) -> Self {
        EdgePath {
            start: self.end(g),
            darts: self.darts.iter().rev().map(|d| d.inv()).collect(),
        }
    }

    /// Concatenation without reduction.
    pub fn concat(&self, g: &MarkedGraph, other: &EdgePath) -> Result<Self, PathError> {
        if self.end(g) != other.start {
            return Err(PathError::WrongStart {
                expected: g.vertex_name(self.end(g)).to_string(),
                found: g.vertex_name(other.start).to_string(),
            });
        }
        let mut darts = self.darts.clone();
        darts.extend_from_slice(&other.darts);
        Ok(EdgePath {
            start: self.start,
            darts,
        })
    }

    pub fn push(&mut self, d: Dart) {
        self.darts.push(d);
    }

    /// Free reduction: the unique reduced path homotopic rel endpoints.
    pub fn tighten(&self) -> Self {
        EdgePath {
            start: self.start,
            darts: reduce(&self.darts),
        }
    }

    pub fn display<'a>(&'a self, g: &'a MarkedGraph) -> PathDisplay<'a> {
        PathDisplay {
            path: self,
            graph: g,
        }
    }
}

/// Stack-based free reduction of a dart word.
pub fn reduce(darts: &[Dart]) -> Vec<Dart> {
    let mut out: Vec<Dart> = Vec::with_capacity(darts.len());
    for &d in darts {
        if out.last() == Some(&d.inv()) {
            out.pop();
        } else {
            out.push(d);
        }
    }
    out
}

/// Appends `d` to an already reduced word, cancelling if needed.
pub(crate) fn push_reduced(out: &mut Vec<Dart>, d: Dart) {
    if out.last() == Some(&d.inv()) {
        out.pop();
    } else {
        out.push(d);
    }
}

pub struct PathDisplay<'a> {
    path: &'a EdgePath,
    graph: &'a MarkedGraph,
}

impl fmt::Display for PathDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.path.darts.is_empty() {
            return write!(f, "1");
        }
        for (i, &d) in self.path.darts.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{}", self.graph.dart_name(d))?;
        }
        Ok(())
    }
}

//! Finite graphs with oriented edges ("darts").
//!
//! Every undirected edge `E` contributes two darts: `E` itself, running from
//! its declared source to its declared target, and the reverse dart `~E`.
//! Darts are packed as `2 * edge + reversed`, so the involution is a bit flip
//! and the natural integer order is the fixed total order used for canonical
//! rotations of cyclic words.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct EdgeId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Dart(u32);

impl VertexId {
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl EdgeId {
    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn forward(self) -> Dart {
        Dart::new(self, false)
    }

    pub fn backward(self) -> Dart {
        Dart::new(self, true)
    }
}

impl Dart {
    pub fn new(edge: EdgeId, reversed: bool) -> Self {
        Dart(edge.0 * 2 + reversed as u32)
    }

    pub fn from_index(index: usize) -> Self {
        Dart(index as u32)
    }

    pub fn index(self) -> usize {
        self.0 as usize
    }

    pub fn edge(self) -> EdgeId {
        EdgeId(self.0 / 2)
    }

    pub fn is_reversed(self) -> bool {
        self.0 & 1 == 1
    }

    /// The same edge traversed the other way.
    pub fn inv(self) -> Self {
        Dart(self.0 ^ 1)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("duplicate vertex `{0}`")]
    DuplicateVertex(String),
    #[error("duplicate edge `{0}`")]
    DuplicateEdge(String),
    #[error("invalid name `{0}`: names must be non-empty and must not start with `~`")]
    InvalidName(String),
    #[error("edge `{edge}` refers to unknown vertex `{vertex}`")]
    UnknownVertex { edge: String, vertex: String },
    #[error("vertex `{0}` is isolated")]
    IsolatedVertex(String),
    #[error("graph is not connected: `{0}` cannot be reached from `{1}`")]
    Disconnected(String, String),
    #[error("graph has no vertices")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
struct EdgeData {
    name: String,
    src: VertexId,
    dst: VertexId,
}

/// A connected finite graph with named vertices and edges.
#[derive(Clone, Debug)]
pub struct MarkedGraph {
    vertices: Vec<String>,
    edges: Vec<EdgeData>,
    vertex_index: HashMap<String, VertexId>,
    edge_index: HashMap<String, EdgeId>,
    outgoing: Vec<Vec<Dart>>,
}

impl PartialEq for MarkedGraph {
    fn eq(&self, other: &Self) -> bool {
        self.vertices == other.vertices && self.edges == other.edges
    }
}

impl Eq for MarkedGraph {}

fn valid_name(name: &str) -> bool {
    !name.is_empty() && !name.starts_with('~') && !name.chars().any(char::is_whitespace)
}

impl MarkedGraph {
    /// Builds a graph from vertex names and `(name, source, target)` edge
    /// triples, checking names, connectivity and the absence of isolated
    /// vertices.
    pub fn new<V, E>(vertices: V, edges: E) -> Result<Self, GraphError>
    where
        V: IntoIterator,
        V::Item: Into<String>,
        E: IntoIterator<Item = (String, String, String)>,
    {
        let vertices: Vec<String> = vertices.into_iter().map(Into::into).collect();
        if vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut vertex_index = HashMap::new();
        for (i, v) in vertices.iter().enumerate() {
            if !valid_name(v) {
                return Err(GraphError::InvalidName(v.clone()));
            }
            if vertex_index.insert(v.clone(), VertexId(i as u32)).is_some() {
                return Err(GraphError::DuplicateVertex(v.clone()));
            }
        }
        let mut edge_data = Vec::new();
        let mut edge_index = HashMap::new();
        for (name, src, dst) in edges {
            if !valid_name(&name) {
                return Err(GraphError::InvalidName(name));
            }
            let lookup = |v: &str| {
                vertex_index
                    .get(v)
                    .copied()
                    .ok_or_else(|| GraphError::UnknownVertex {
                        edge: name.clone(),
                        vertex: v.to_string(),
                    })
            };
            let (s, d) = (lookup(&src)?, lookup(&dst)?);
            let id = EdgeId(edge_data.len() as u32);
            if edge_index.insert(name.clone(), id).is_some() {
                return Err(GraphError::DuplicateEdge(name));
            }
            edge_data.push(EdgeData {
                name,
                src: s,
                dst: d,
            });
        }

        let mut outgoing = vec![Vec::new(); vertices.len()];
        for (i, e) in edge_data.iter().enumerate() {
            let id = EdgeId(i as u32);
            outgoing[e.src.index()].push(id.forward());
            outgoing[e.dst.index()].push(id.backward());
        }
        for list in &mut outgoing {
            list.sort();
        }

        let graph = MarkedGraph {
            vertices,
            edges: edge_data,
            vertex_index,
            edge_index,
            outgoing,
        };
        graph.check_shape()?;
        Ok(graph)
    }

    fn check_shape(&self) -> Result<(), GraphError> {
        for (i, out) in self.outgoing.iter().enumerate() {
            if out.is_empty() {
                return Err(GraphError::IsolatedVertex(self.vertices[i].clone()));
            }
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut stack = vec![VertexId(0)];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &d in &self.outgoing[v.index()] {
                let w = self.term(d);
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    stack.push(w);
                }
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(GraphError::Disconnected(
                self.vertices[i].clone(),
                self.vertices[0].clone(),
            ));
        }
        Ok(())
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn dart_count(&self) -> usize {
        2 * self.edges.len()
    }

    /// Rank of the fundamental group (first Betti number).
    pub fn rank(&self) -> usize {
        self.edges.len() + 1 - self.vertices.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertices.len() as u32).map(VertexId)
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeId> + '_ {
        (0..self.edges.len() as u32).map(EdgeId)
    }

    pub fn darts(&self) -> impl Iterator<Item = Dart> + '_ {
        (0..self.dart_count()).map(Dart::from_index)
    }

    /// Basepoint used for fundamental groups and mapping-torus elements.
    pub fn basepoint(&self) -> VertexId {
        VertexId(0)
    }

    pub fn init(&self, d: Dart) -> VertexId {
        let e = &self.edges[d.edge().index()];
        if d.is_reversed() {
            e.dst
        } else {
            e.src
        }
    }

    pub fn term(&self, d: Dart) -> VertexId {
        self.init(d.inv())
    }

    /// Darts whose initial vertex is `v`, in dart order.
    pub fn outgoing(&self, v: VertexId) -> &[Dart] {
        &self.outgoing[v.index()]
    }

    pub fn vertex_name(&self, v: VertexId) -> &str {
        &self.vertices[v.index()]
    }

    pub fn edge_name(&self, e: EdgeId) -> &str {
        &self.edges[e.index()].name
    }

    pub fn dart_name(&self, d: Dart) -> String {
        let name = self.edge_name(d.edge());
        if d.is_reversed() {
            format!("~{name}")
        } else {
            name.to_string()
        }
    }

    pub fn vertex_id(&self, name: &str) -> Option<VertexId> {
        self.vertex_index.get(name).copied()
    }

    pub fn edge_id(&self, name: &str) -> Option<EdgeId> {
        self.edge_index.get(name).copied()
    }

    /// Parses `A` or `~A`.
    pub fn parse_dart(&self, token: &str) -> Option<Dart> {
        match token.strip_prefix('~') {
            Some(name) => self.edge_id(name).map(EdgeId::backward),
            None => self.edge_id(token).map(EdgeId::forward),
        }
    }

    pub fn source(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].src
    }

    pub fn target(&self, e: EdgeId) -> VertexId {
        self.edges[e.index()].dst
    }

    /// Edges of a BFS spanning tree rooted at `root`, as the dart used to
    /// reach each vertex (`None` for the root).
    pub fn spanning_tree(&self, root: VertexId) -> Vec<Option<Dart>> {
        let mut parent = vec![None; self.vertices.len()];
        let mut seen = vec![false; self.vertices.len()];
        seen[root.index()] = true;
        let mut queue = std::collections::VecDeque::from([root]);
        while let Some(v) = queue.pop_front() {
            for &d in self.outgoing(v) {
                let w = self.term(d);
                if !seen[w.index()] {
                    seen[w.index()] = true;
                    parent[w.index()] = Some(d);
                    queue.push_back(w);
                }
            }
        }
        parent
    }
}

impl fmt::Display for MarkedGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for v in &self.vertices {
            writeln!(f, "vertex {v}")?;
        }
        for e in &self.edges {
            writeln!(
                f,
                "edge {} {} {}",
                e.name,
                self.vertices[e.src.index()],
                self.vertices[e.dst.index()]
            )?;
        }
        Ok(())
    }
}

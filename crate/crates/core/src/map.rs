//! Graph self-maps given by edge images, and their tightened action on paths.

use thiserror::Error;

use crate::graph::{Dart, EdgeId, MarkedGraph, VertexId};
use crate::path::{push_reduced, reduce, EdgePath, PathError};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("expected {expected} edge images, got {found}")]
    WrongImageCount { expected: usize, found: usize },
    #[error("image of edge `{0}` is empty")]
    EmptyImage(String),
    #[error("image of edge `{0}` is not reduced")]
    NotReduced(String),
    #[error("image of edge `{edge}` is not a path: {source}")]
    BadImage { edge: String, source: PathError },
    #[error("vertex `{0}` is sent to different vertices by the images of its incident edges")]
    InconsistentVertexImage(String),
    #[error("maps are defined on different graphs")]
    GraphMismatch,
}

/// A cellular self-map of a marked graph, determined by the reduced image
/// path of each edge. Vertex images are read off the edge images.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GraphMap {
    graph: MarkedGraph,
    images: Vec<Vec<Dart>>,
    vertex_image: Vec<VertexId>,
}

impl GraphMap {
    /// `images[e]` is the image of the forward dart of edge `e`.
    pub fn new(graph: MarkedGraph, images: Vec<Vec<Dart>>) -> Result<Self, MapError> {
        if images.len() != graph.edge_count() {
            return Err(MapError::WrongImageCount {
                expected: graph.edge_count(),
                found: images.len(),
            });
        }
        let mut vertex_image: Vec<Option<VertexId>> = vec![None; graph.vertex_count()];
        for e in graph.edges() {
            let img = &images[e.index()];
            let name = || graph.edge_name(e).to_string();
            if img.is_empty() {
                return Err(MapError::EmptyImage(name()));
            }
            let path = EdgePath::new(&graph, img.clone()).map_err(|source| MapError::BadImage {
                edge: name(),
                source,
            })?;
            if !path.is_reduced() {
                return Err(MapError::NotReduced(name()));
            }
            for (v, w) in [
                (graph.source(e), path.start()),
                (graph.target(e), path.end(&graph)),
            ] {
                match vertex_image[v.index()] {
                    None => vertex_image[v.index()] = Some(w),
                    Some(old) if old != w => {
                        return Err(MapError::InconsistentVertexImage(
                            graph.vertex_name(v).to_string(),
                        ))
                    }
                    Some(_) => {}
                }
            }
        }
        // Graphs have no isolated vertices, so every vertex got an image.
        let vertex_image = vertex_image
            .into_iter()
            .map(|v| v.expect("vertex without incident edge"))
            .collect();
        Ok(GraphMap {
            graph,
            images,
            vertex_image,
        })
    }

    pub fn identity(graph: MarkedGraph) -> Self {
        let images = graph.edges().map(|e| vec![e.forward()]).collect();
        GraphMap::new(graph, images).expect("identity map is valid")
    }

    pub fn graph(&self) -> &MarkedGraph {
        &self.graph
    }

    pub fn vertex_image(&self, v: VertexId) -> VertexId {
        self.vertex_image[v.index()]
    }

    pub fn fixes_vertices(&self) -> bool {
        self.graph.vertices().all(|v| self.vertex_image(v) == v)
    }

    pub fn edge_image(&self, e: EdgeId) -> &[Dart] {
        &self.images[e.index()]
    }

    /// Image of a dart as a list of darts (reversed for `~E`).
    pub fn dart_image(&self, d: Dart) -> Vec<Dart> {
        let img = &self.images[d.edge().index()];
        if d.is_reversed() {
            img.iter().rev().map(|x| x.inv()).collect()
        } else {
            img.clone()
        }
    }

    pub fn dart_image_path(&self, d: Dart) -> EdgePath {
        EdgePath::from_parts_unchecked(self.vertex_image(self.graph.init(d)), self.dart_image(d))
    }

    pub fn is_fixed_edge(&self, e: EdgeId) -> bool {
        self.images[e.index()] == [e.forward()]
    }

    /// Concatenated edge images without reduction.
    pub fn map_path_raw(&self, p: &EdgePath) -> EdgePath {
        let mut darts = Vec::new();
        for &d in p.darts() {
            darts.extend(self.dart_image(d));
        }
        EdgePath::from_parts_unchecked(self.vertex_image(p.start()), darts)
    }

    /// The tightened image `f_#(p)`.
    pub fn map_path(&self, p: &EdgePath) -> EdgePath {
        EdgePath::from_parts_unchecked(self.vertex_image(p.start()), self.map_darts(p.darts()))
    }

    /// Tightened image of a dart word.
    pub fn map_darts(&self, darts: &[Dart]) -> Vec<Dart> {
        let mut out = Vec::new();
        for &d in darts {
            let img = &self.images[d.edge().index()];
            if d.is_reversed() {
                for &x in img.iter().rev() {
                    push_reduced(&mut out, x.inv());
                }
            } else {
                for &x in img {
                    push_reduced(&mut out, x);
                }
            }
        }
        out
    }

    /// `[f^k(E)]` for a dart `E` and `k >= 0`.
    pub fn iterate_edge(&self, d: Dart, k: usize) -> EdgePath {
        let mut p = EdgePath::from_dart(&self.graph, d);
        for _ in 0..k {
            p = self.map_path(&p);
        }
        p
    }

    /// `self ∘ other`: first apply `other`, then `self`.
    pub fn compose(&self, other: &GraphMap) -> Result<GraphMap, MapError> {
        if self.graph != other.graph {
            return Err(MapError::GraphMismatch);
        }
        let images = other
            .images
            .iter()
            .map(|img| reduce(&self.map_darts(img)))
            .collect();
        GraphMap::new(self.graph.clone(), images)
    }

    /// The `m`-fold composite, `m >= 1`.
    pub fn power(&self, m: usize) -> Result<GraphMap, MapError> {
        assert!(m >= 1, "power must be at least 1");
        let mut acc = self.clone();
        for _ in 1..m {
            acc = self.compose(&acc)?;
        }
        Ok(acc)
    }

    /// The same map with every edge renamed or reversed according to a new
    /// graph; `edge_map[e]` is the dart of the new graph that old edge `e`
    /// becomes. Used to test invariance under relabelling.
    pub fn relabel(&self, new_graph: MarkedGraph, edge_map: &[Dart]) -> Result<GraphMap, MapError> {
        let translate = |d: Dart| {
            let nd = edge_map[d.edge().index()];
            if d.is_reversed() {
                nd.inv()
            } else {
                nd
            }
        };
        let mut images = vec![Vec::new(); new_graph.edge_count()];
        for e in self.graph.edges() {
            let nd = edge_map[e.index()];
            let img: Vec<Dart> = self.images[e.index()]
                .iter()
                .map(|&d| translate(d))
                .collect();
            images[nd.edge().index()] = if nd.is_reversed() {
                img.iter().rev().map(|d| d.inv()).collect()
            } else {
                img
            };
        }
        GraphMap::new(new_graph, images)
    }
}

//! Decision procedures for hierarchical hyperbolicity of free-by-cyclic
//! groups presented by normal-form graph maps.
//!
//! The pipeline reads a [`GraphMap`], classifies its strata by growth,
//! finds the Nielsen cycles carrying linear edges, assembles the
//! black/white graph of groups of the mapping torus and turns all of it
//! into a [`verdict::Verdict`]. Negative answers come with an explicit
//! [`witness::BranchingWitness`] whose claims are rechecked by
//! mapping-torus arithmetic.

pub mod classify;
pub mod cyclic;
pub mod decompose;
pub mod delta;
pub mod fold;
pub mod graph;
pub mod map;
pub mod nielsen;
pub mod oracle;
pub mod parse;
pub mod path;
pub mod torus;
pub mod verdict;
pub mod witness;

pub use cyclic::CyclicWord;
pub use graph::{Dart, EdgeId, MarkedGraph, VertexId};
pub use map::GraphMap;
pub use parse::{parse_graph_map, write_graph_map};
pub use path::EdgePath;

//! Recognition of k-map and hole-free k-map graphs by dynamic programming
//! over a nice tree decomposition, with planar bipartite witnesses as
//! certificates.
//!
//! A witness of `G = (V, E)` is a planar bipartite graph on `V` plus a set of
//! intersection vertices whose half-square on `V` is exactly `G`. The
//! recognizer keeps, for every bag of the decomposition, the set of embedding
//! sketches of compact partial witnesses; see [`dp`].

pub mod cert;
pub mod dp;
pub mod embed;
pub mod error;
pub mod graph;
pub mod oracle;
pub mod planarity;
pub mod render;
pub mod sketch;
pub mod treedecomp;
pub mod witness;

pub use dp::{min_k, recognize, run, Mode, Outcome, RunOptions};
pub use embed::{EmbeddedGraph, VertexKind};
pub use error::{Error, ParseError, Result, TdError};
pub use graph::{half_square, parse_graph, BipartiteWitnessGraph, Graph};
pub use treedecomp::{compute_td, make_nice, parse_td, NiceTreeDecomposition, TreeDecomposition};
pub use witness::{verify_witness, VerificationReport, Witness};

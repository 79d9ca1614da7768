//! Context-sensitive reachability over program-valid graphs.
//!
//! Queries are answered by reducing the extended Dyck-CFL problem to plain
//! reachability on a two-sided indexing graph, then delegating to one of
//! several conventional reachability indexes.

pub mod bench;
pub mod cfl;
pub mod error;
pub mod gen;
pub mod graph;
pub mod index;
pub mod indexing;
pub mod query;
pub mod summary;

pub use error::{Error, Result};
pub use graph::{Edge, FunctionId, Label, ProgramValidGraph, VertexId};
pub use index::{IndexConfig, ReachIndex, Scheme, SchemeCapabilities};
pub use indexing::{IndexVertex, IndexingGraphView, Side};
pub use query::{QueryScratch, QuerySession, WitnessPath};
pub use summary::{compute_summaries, SummaryEdge, SummaryEdgeSet};

use thiserror::Error;

use crate::graph::VertexId;

/// Errors produced by the library.
///
/// Variants are grouped so front ends can map them onto stable exit codes:
/// input problems, resource guards, and capability mismatches.
#[derive(Debug, Error)]
pub enum Error {
    #[error("line {line}: {reason}")]
    Parse { line: usize, reason: String },

    #[error("malformed graph: {0}")]
    Structure(String),

    #[error("vertex {0} is out of range")]
    VertexOutOfRange(VertexId),

    #[error("oracle refuses graphs with {vertices} vertices (limit {limit}); use a query session instead")]
    OracleTooLarge { vertices: usize, limit: usize },

    #[error(
        "transitive closure over {components} components needs ~{bytes} bytes (limit {limit} components); \
         choose --scheme grail or --scheme dual"
    )]
    TcTooLarge {
        components: usize,
        limit: usize,
        bytes: u64,
    },

    #[error(
        "dual labeling found {non_tree} non-tree edges (limit {limit}); the link table grows quadratically, \
         choose --scheme grail"
    )]
    DualTooManyNonTreeEdges { non_tree: usize, limit: usize },

    #[error("graph is not acyclic")]
    Cyclic,

    #[error("scheme `{0}` cannot return witness paths; build the index with --scheme grail")]
    SchemeLacksPaths(&'static str),

    #[error("invalid generator parameters: {0}")]
    InvalidParams(String),

    #[error("index file: {0}")]
    IndexFormat(String),

    #[error("index was built for a different graph (hash mismatch)")]
    IndexGraphMismatch,

    #[error("internal consistency: {0}")]
    Internal(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for refusals caused by configured size limits rather than bad input.
    pub fn is_resource_guard(&self) -> bool {
        matches!(
            self,
            Error::OracleTooLarge { .. }
                | Error::TcTooLarge { .. }
                | Error::DualTooManyNonTreeEdges { .. }
        )
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

//! Conventional reachability indexes over the condensed indexing graph.

pub mod dag;
pub mod dual;
pub mod format;
pub mod grail;
pub mod tc;

use std::fmt;
use std::str::FromStr;

pub use dag::{condense, condense_graph, CondensedDag, Dag};
pub use dual::{
    build_dual, dual_query, DualLabelingIndex, IntervalLabel, LinkGroup, DEFAULT_DUAL_LIMIT,
};
pub use format::{
    graph_hash, read_index, write_index, IndexFile, INDEX_FORMAT_VERSION, INDEX_MAGIC,
};
pub use grail::{
    build_grail, grail_query, GrailIndex, GrailScratch, TraversalOrder, DEFAULT_GRAIL_LABELS,
};
pub use tc::{build_tc, tc_query, TcIndex, DEFAULT_TC_LIMIT};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Scheme {
    Tc,
    Dual,
    Grail,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Tc, Scheme::Dual, Scheme::Grail];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Tc => "tc",
            Scheme::Dual => "dual",
            Scheme::Grail => "grail",
        }
    }

    pub fn capabilities(self) -> SchemeCapabilities {
        SchemeCapabilities {
            name: self.name(),
            // Only the pruned-search scheme walks real edges while answering.
            returns_paths: matches!(self, Scheme::Grail),
        }
    }

    pub(crate) fn id(self) -> u8 {
        match self {
            Scheme::Tc => 1,
            Scheme::Dual => 2,
            Scheme::Grail => 3,
        }
    }

    pub(crate) fn from_id(id: u8) -> Option<Scheme> {
        match id {
            1 => Some(Scheme::Tc),
            2 => Some(Scheme::Dual),
            3 => Some(Scheme::Grail),
            _ => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Scheme> {
        match s {
            "tc" => Ok(Scheme::Tc),
            "dual" => Ok(Scheme::Dual),
            "grail" => Ok(Scheme::Grail),
            other => Err(Error::InvalidParams(format!(
                "unknown scheme `{other}` (expected tc, dual or grail)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SchemeCapabilities {
    pub name: &'static str,
    pub returns_paths: bool,
}

/// Build-time knobs shared by all schemes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IndexConfig {
    pub tc_max_components: usize,
    pub dual_max_non_tree: usize,
    pub grail_labels: usize,
    pub seed: u64,
}

impl Default for IndexConfig {
    fn default() -> Self {
        IndexConfig {
            tc_max_components: DEFAULT_TC_LIMIT,
            dual_max_non_tree: DEFAULT_DUAL_LIMIT,
            grail_labels: DEFAULT_GRAIL_LABELS,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ReachIndex {
    Tc(TcIndex),
    Dual(DualLabelingIndex),
    Grail(GrailIndex),
}

impl ReachIndex {
    pub fn build(dag: &Dag, scheme: Scheme, config: &IndexConfig) -> Result<ReachIndex> {
        Ok(match scheme {
            Scheme::Tc => ReachIndex::Tc(build_tc(dag, config.tc_max_components)?),
            Scheme::Dual => ReachIndex::Dual(build_dual(dag, config.dual_max_non_tree)?),
            Scheme::Grail => ReachIndex::Grail(build_grail(dag, config.grail_labels, config.seed)?),
        })
    }

    pub fn scheme(&self) -> Scheme {
        match self {
            ReachIndex::Tc(_) => Scheme::Tc,
            ReachIndex::Dual(_) => Scheme::Dual,
            ReachIndex::Grail(_) => Scheme::Grail,
        }
    }

    pub fn capabilities(&self) -> SchemeCapabilities {
        self.scheme().capabilities()
    }

    /// Exact DAG reachability between components.
    pub fn reaches(&self, dag: &Dag, u: u32, v: u32, scratch: &mut GrailScratch) -> bool {
        match self {
            ReachIndex::Tc(idx) => tc_query(idx, u, v),
            ReachIndex::Dual(idx) => dual_query(idx, u, v),
            ReachIndex::Grail(idx) => grail_query(idx, dag, u, v, scratch),
        }
    }

    /// Cheap filter: false proves `v` unreachable from `u`.
    pub fn may_reach(&self, u: u32, v: u32) -> bool {
        match self {
            ReachIndex::Tc(idx) => tc_query(idx, u, v),
            ReachIndex::Dual(idx) => dual_query(idx, u, v),
            ReachIndex::Grail(idx) => u == v || idx.may_reach(u, v),
        }
    }

    pub fn heap_bytes(&self) -> usize {
        match self {
            ReachIndex::Tc(idx) => idx.heap_bytes(),
            ReachIndex::Dual(idx) => idx.heap_bytes(),
            ReachIndex::Grail(idx) => idx.heap_bytes(),
        }
    }
}

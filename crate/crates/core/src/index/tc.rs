//! Full transitive closure as one bit-row per DAG node.

use fixedbitset::FixedBitSet;

use super::dag::Dag;
use crate::error::{Error, Result};

pub const DEFAULT_TC_LIMIT: usize = 100_000;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TcIndex {
    rows: Vec<FixedBitSet>,
}

impl TcIndex {
    pub fn node_count(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, node: u32) -> &FixedBitSet {
        &self.rows[node as usize]
    }

    pub fn heap_bytes(&self) -> usize {
        self.rows
            .iter()
            .map(|r| std::mem::size_of_val(r.as_slice()))
            .sum()
    }

    pub(crate) fn from_rows(rows: Vec<FixedBitSet>) -> TcIndex {
        TcIndex { rows }
    }

    pub(crate) fn rows(&self) -> &[FixedBitSet] {
        &self.rows
    }
}

/// Rows are unioned children-first, so each row is final before any parent reads it.
pub fn build_tc(dag: &Dag, limit: usize) -> Result<TcIndex> {
    let n = dag.node_count();
    if n > limit {
        return Err(Error::TcTooLarge {
            components: n,
            limit,
            bytes: (n as u64) * (n as u64) / 8,
        });
    }
    let mut rows: Vec<FixedBitSet> = (0..n).map(|_| FixedBitSet::with_capacity(n)).collect();
    for &u in dag.topo_order().iter().rev() {
        let mut row = std::mem::take(&mut rows[u as usize]);
        row.insert(u as usize);
        for &c in dag.children(u) {
            row.union_with(&rows[c as usize]);
        }
        rows[u as usize] = row;
    }
    Ok(TcIndex { rows })
}

#[inline]
pub fn tc_query(idx: &TcIndex, u: u32, v: u32) -> bool {
    idx.rows[u as usize].contains(v as usize)
}

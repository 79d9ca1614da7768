//! The indexing graph: two logical copies of a program-valid graph.
//!
//! Copy `One` keeps epsilon, close and summary edges; copy `Two` keeps
//! epsilon, open and summary edges; every vertex has a bridge edge from its
//! `One` copy to its `Two` copy. `v` is context-sensitively reachable from
//! `u` iff `(v, Two)` is reachable from `(u, One)`.
//!
//! Nothing is copied physically: an index vertex is a `(vertex, side)` pair
//! and the adjacency is a pair of side-filtered CSR arrays built once.

use std::fmt;
use std::fmt::Write as _;

use crate::graph::{Label, ProgramValidGraph, VertexId};
use crate::summary::SummaryEdgeSet;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    One,
    Two,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IndexVertex {
    pub vertex: VertexId,
    pub side: Side,
}

impl IndexVertex {
    pub fn new(vertex: VertexId, side: Side) -> Self {
        IndexVertex { vertex, side }
    }

    pub fn one(v: u32) -> Self {
        IndexVertex::new(VertexId(v), Side::One)
    }

    pub fn two(v: u32) -> Self {
        IndexVertex::new(VertexId(v), Side::Two)
    }

    /// Dense id: `2 * vertex + side`.
    #[inline]
    pub fn dense(self) -> usize {
        2 * self.vertex.index() + (self.side == Side::Two) as usize
    }

    #[inline]
    pub fn from_dense(id: usize) -> Self {
        let side = if id.is_multiple_of(2) {
            Side::One
        } else {
            Side::Two
        };
        IndexVertex::new(VertexId((id / 2) as u32), side)
    }
}

impl fmt::Display for IndexVertex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let side = match self.side {
            Side::One => 1,
            Side::Two => 2,
        };
        write!(f, "{}:{}", self.vertex, side)
    }
}

/// What an index edge stands for in the original graph.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IndexEdge {
    /// `(v, One) -> (v, Two)`.
    Bridge,
    /// Position in [`ProgramValidGraph::edges`].
    Graph(usize),
    /// Position in [`SummaryEdgeSet::edges`].
    Summary(usize),
}

/// Minimal adjacency interface shared by the indexing graph and plain DAGs.
pub trait Digraph {
    fn node_count(&self) -> usize;
    fn successors(&self, node: usize) -> &[u32];
}

#[derive(Debug, Clone)]
pub struct IndexingGraphView {
    vertex_count: usize,
    succ_offsets: Vec<usize>,
    succ: Vec<u32>,
    succ_kind: Vec<IndexEdge>,
    pred_offsets: Vec<usize>,
    pred: Vec<u32>,
}

impl IndexingGraphView {
    pub fn new(g: &ProgramValidGraph, summaries: &SummaryEdgeSet) -> Self {
        let n = g.vertex_count();
        let total = 2 * n;
        let mut succ_offsets = Vec::with_capacity(total + 1);
        let mut succ = Vec::with_capacity(2 * g.edge_count() + 2 * summaries.len() + n);
        let mut succ_kind = Vec::with_capacity(succ.capacity());
        succ_offsets.push(0);

        let edges = g.edges();
        let se = summaries.edges();
        let (mut ei, mut si) = (0usize, 0usize);
        for v in 0..n as u32 {
            let e_start = ei;
            while ei < edges.len() && edges[ei].src.0 == v {
                ei += 1;
            }
            let s_start = si;
            while si < se.len() && se[si].source.0 == v {
                si += 1;
            }

            // Side One: bridge first, then eps / close / summary.
            succ.push(IndexVertex::two(v).dense() as u32);
            succ_kind.push(IndexEdge::Bridge);
            for (idx, e) in edges.iter().enumerate().take(ei).skip(e_start) {
                if !matches!(e.label, Label::Open(_)) {
                    succ.push(IndexVertex::one(e.dst.0).dense() as u32);
                    succ_kind.push(IndexEdge::Graph(idx));
                }
            }
            for (idx, s) in se.iter().enumerate().take(si).skip(s_start) {
                succ.push(IndexVertex::one(s.target.0).dense() as u32);
                succ_kind.push(IndexEdge::Summary(idx));
            }
            succ_offsets.push(succ.len());

            // Side Two: eps / open / summary.
            for (idx, e) in edges.iter().enumerate().take(ei).skip(e_start) {
                if !matches!(e.label, Label::Close(_)) {
                    succ.push(IndexVertex::two(e.dst.0).dense() as u32);
                    succ_kind.push(IndexEdge::Graph(idx));
                }
            }
            for (idx, s) in se.iter().enumerate().take(si).skip(s_start) {
                succ.push(IndexVertex::two(s.target.0).dense() as u32);
                succ_kind.push(IndexEdge::Summary(idx));
            }
            succ_offsets.push(succ.len());
        }

        let (pred_offsets, pred) = transpose(total, &succ_offsets, &succ);
        IndexingGraphView {
            vertex_count: n,
            succ_offsets,
            succ,
            succ_kind,
            pred_offsets,
            pred,
        }
    }

    /// Every index vertex, ordered by vertex then side.
    pub fn iter_vertices(&self) -> impl Iterator<Item = IndexVertex> + '_ {
        (0..2 * self.vertex_count).map(IndexVertex::from_dense)
    }

    pub fn iter_successors(&self, iv: IndexVertex) -> impl Iterator<Item = IndexVertex> + '_ {
        self.successors(iv.dense())
            .iter()
            .map(|&d| IndexVertex::from_dense(d as usize))
    }

    /// Successors together with the edge each one comes from.
    pub fn successor_edges(
        &self,
        iv: IndexVertex,
    ) -> impl Iterator<Item = (IndexVertex, IndexEdge)> + '_ {
        let id = iv.dense();
        let range = self.succ_offsets[id]..self.succ_offsets[id + 1];
        self.succ[range.clone()]
            .iter()
            .zip(&self.succ_kind[range])
            .map(|(&d, &k)| (IndexVertex::from_dense(d as usize), k))
    }

    pub fn iter_predecessors(&self, iv: IndexVertex) -> impl Iterator<Item = IndexVertex> + '_ {
        let id = iv.dense();
        self.pred[self.pred_offsets[id]..self.pred_offsets[id + 1]]
            .iter()
            .map(|&d| IndexVertex::from_dense(d as usize))
    }

    /// `(vertex count, edge count)` of the logical graph.
    pub fn stats(&self) -> (usize, usize) {
        (2 * self.vertex_count, self.succ.len())
    }

    /// Bytes held by the adjacency arrays.
    pub fn heap_bytes(&self) -> usize {
        (self.succ_offsets.len() + self.pred_offsets.len()) * std::mem::size_of::<usize>()
            + (self.succ.len() + self.pred.len()) * 4
            + self.succ_kind.len() * std::mem::size_of::<IndexEdge>()
    }
}

impl Digraph for IndexingGraphView {
    fn node_count(&self) -> usize {
        2 * self.vertex_count
    }

    #[inline]
    fn successors(&self, node: usize) -> &[u32] {
        &self.succ[self.succ_offsets[node]..self.succ_offsets[node + 1]]
    }
}

/// Closed-form edge count of the indexing graph.
pub fn expected_edge_count(g: &ProgramValidGraph, summaries: &SummaryEdgeSet) -> usize {
    let sets = crate::graph::edge_sets(g);
    2 * sets.eps.len() + sets.open.len() + sets.close.len() + 2 * summaries.len() + g.vertex_count()
}

pub(crate) fn transpose(n: usize, offsets: &[usize], targets: &[u32]) -> (Vec<usize>, Vec<u32>) {
    let mut counts = vec![0usize; n + 1];
    for &t in targets {
        counts[t as usize + 1] += 1;
    }
    for i in 0..n {
        counts[i + 1] += counts[i];
    }
    let mut fill = counts.clone();
    let mut out = vec![0u32; targets.len()];
    for src in 0..n {
        for &t in &targets[offsets[src]..offsets[src + 1]] {
            out[fill[t as usize]] = src as u32;
            fill[t as usize] += 1;
        }
    }
    (counts, out)
}

/// Graphviz dump of the logical graph with vertices named `v:1` / `v:2`.
pub fn export_dot(view: &IndexingGraphView) -> String {
    let mut out = String::from("digraph indexing {\n");
    for iv in view.iter_vertices() {
        let _ = writeln!(out, "  \"{iv}\";");
    }
    for iv in view.iter_vertices() {
        for (w, kind) in view.successor_edges(iv) {
            let style = match kind {
                IndexEdge::Bridge => " [style=dashed]",
                IndexEdge::Summary(_) => " [color=blue]",
                IndexEdge::Graph(_) => "",
            };
            let _ = writeln!(out, "  \"{iv}\" -> \"{w}\"{style};");
        }
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, FunctionId};
    use crate::summary::compute_summaries;

    const RUNNING: &str = include_str!("../tests/fixtures/running_example.pvg");

    fn running_view() -> (ProgramValidGraph, SummaryEdgeSet, IndexingGraphView) {
        let g = parse_graph(RUNNING).unwrap();
        let s = compute_summaries(&g);
        let view = IndexingGraphView::new(&g, &s);
        (g, s, view)
    }

    #[test]
    fn running_example_vertices_and_successors() {
        let (g, s, view) = running_view();
        assert_eq!(view.iter_vertices().count(), 14);
        let (b, d, e, f) = (1, 3, 4, 5);
        let succ_b1: Vec<_> = view.iter_successors(IndexVertex::one(b)).collect();
        assert_eq!(succ_b1, vec![IndexVertex::two(b), IndexVertex::one(d)]);
        let succ_e2: Vec<_> = view.iter_successors(IndexVertex::two(e)).collect();
        assert_eq!(succ_e2, vec![IndexVertex::two(f)]);
        assert_eq!(view.stats(), (14, expected_edge_count(&g, &s)));
    }

    #[test]
    fn vertex_order_is_vertex_then_side() {
        let (_, _, view) = running_view();
        let first: Vec<_> = view.iter_vertices().take(3).collect();
        assert_eq!(
            first,
            vec![
                IndexVertex::one(0),
                IndexVertex::two(0),
                IndexVertex::one(1)
            ]
        );
    }

    #[test]
    fn isolated_vertex_has_only_bridge() {
        let g = ProgramValidGraph::new(vec![FunctionId(0)], vec![], 0, 0).unwrap();
        let s = compute_summaries(&g);
        let view = IndexingGraphView::new(&g, &s);
        assert_eq!(
            view.iter_successors(IndexVertex::one(0))
                .collect::<Vec<_>>(),
            vec![IndexVertex::two(0)]
        );
        assert_eq!(view.iter_successors(IndexVertex::two(0)).count(), 0);
        assert_eq!(
            view.iter_predecessors(IndexVertex::two(0))
                .collect::<Vec<_>>(),
            vec![IndexVertex::one(0)]
        );
        assert_eq!(view.iter_predecessors(IndexVertex::one(0)).count(), 0);
    }

    #[test]
    fn empty_graph_view() {
        let g = ProgramValidGraph::empty();
        let view = IndexingGraphView::new(&g, &compute_summaries(&g));
        assert_eq!(view.iter_vertices().count(), 0);
        assert_eq!(view.stats(), (0, 0));
    }

    #[test]
    fn predecessors_transpose_successors() {
        let (_, _, view) = running_view();
        let mut fwd: Vec<(IndexVertex, IndexVertex)> = view
            .iter_vertices()
            .flat_map(|u| view.iter_successors(u).map(move |w| (u, w)))
            .collect();
        let mut bwd: Vec<(IndexVertex, IndexVertex)> = view
            .iter_vertices()
            .flat_map(|w| view.iter_predecessors(w).map(move |u| (u, w)))
            .collect();
        fwd.sort();
        bwd.sort();
        assert_eq!(fwd, bwd);
    }

    #[test]
    fn dot_names_copies() {
        let (_, _, view) = running_view();
        let dot = export_dot(&view);
        assert!(dot.contains("\"1:1\" -> \"3:1\" [color=blue];"));
        assert!(dot.contains("\"0:1\" -> \"0:2\" [style=dashed];"));
    }
}

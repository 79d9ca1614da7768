//! Query sessions: CS-reachability as plain reachability from `(u, One)`
//! to `(v, Two)`, plus witness paths mapped back onto the original graph.

use std::fmt;

use crate::cfl::{derives, NonTerminal};
use crate::error::{Error, Result};
use crate::graph::{Label, ProgramValidGraph, VertexId};
use crate::index::{
    condense, graph_hash, CondensedDag, GrailScratch, IndexConfig, IndexFile, ReachIndex, Scheme,
};
use crate::index::{SchemeCapabilities, TcIndex};
use crate::indexing::{IndexEdge, IndexVertex, IndexingGraphView, Side};
use crate::summary::{compute_summaries, InnerStep, SummaryEdgeSet};

/// A concrete path in the original graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WitnessPath {
    pub vertices: Vec<VertexId>,
    /// `labels[i]` labels the edge `vertices[i] -> vertices[i + 1]`.
    pub labels: Vec<Label>,
}

impl WitnessPath {
    pub fn single(v: VertexId) -> WitnessPath {
        WitnessPath {
            vertices: vec![v],
            labels: Vec::new(),
        }
    }

    fn push(&mut self, label: Label, to: VertexId) {
        self.labels.push(label);
        self.vertices.push(to);
    }

    pub fn source(&self) -> VertexId {
        self.vertices[0]
    }

    pub fn target(&self) -> VertexId {
        *self.vertices.last().expect("witness paths are never empty")
    }

    /// Every hop is an edge of `g` and the label string derives from `start`.
    pub fn is_valid_in(&self, g: &ProgramValidGraph, start: NonTerminal) -> bool {
        self.vertices.len() == self.labels.len() + 1
            && self
                .vertices
                .windows(2)
                .zip(&self.labels)
                .all(|(w, &l)| g.has_edge(w[0], w[1], l))
            && derives(&self.labels, start)
    }
}

impl fmt::Display for WitnessPath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, v) in self.vertices.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Graph, summaries, indexing graph, condensation and one reachability index.
/// Immutable once built; queries carry their own scratch state.
#[derive(Debug, Clone)]
pub struct QuerySession {
    graph: ProgramValidGraph,
    summaries: SummaryEdgeSet,
    view: IndexingGraphView,
    dag: CondensedDag,
    index: ReachIndex,
    capabilities: SchemeCapabilities,
    seed: u64,
}

/// Reusable per-thread scratch for [`QuerySession::cs_query_with`].
#[derive(Debug, Default, Clone)]
pub struct QueryScratch {
    grail: GrailScratch,
}

impl QueryScratch {
    /// DAG nodes expanded by the last Grail query; 0 means the labels alone decided it.
    pub fn last_expansions(&self) -> usize {
        self.grail.expansions
    }
}

impl QuerySession {
    pub fn build(
        graph: ProgramValidGraph,
        scheme: Scheme,
        config: &IndexConfig,
    ) -> Result<QuerySession> {
        let summaries = compute_summaries(&graph);
        let view = IndexingGraphView::new(&graph, &summaries);
        let dag = condense(&view);
        let index = ReachIndex::build(dag.dag(), scheme, config)?;
        Ok(QuerySession {
            graph,
            summaries,
            view,
            dag,
            index,
            capabilities: scheme.capabilities(),
            seed: config.seed,
        })
    }

    /// Rebinds a loaded index to its graph. Condensation is deterministic,
    /// so rebuilding it reproduces the component numbering the index uses.
    pub fn from_index_file(graph: ProgramValidGraph, file: IndexFile) -> Result<QuerySession> {
        if file.graph_hash != graph_hash(&graph) {
            return Err(Error::IndexGraphMismatch);
        }
        let summaries = compute_summaries(&graph);
        let view = IndexingGraphView::new(&graph, &summaries);
        let dag = condense(&view);
        if dag.component_count() != file.components as usize {
            return Err(Error::IndexFormat(format!(
                "index has {} components, graph condenses to {}",
                file.components,
                dag.component_count()
            )));
        }
        let capabilities = file.index.capabilities();
        Ok(QuerySession {
            graph,
            summaries,
            view,
            dag,
            index: file.index,
            capabilities,
            seed: file.seed,
        })
    }

    pub fn to_index_file(&self) -> IndexFile {
        IndexFile {
            seed: self.seed,
            graph_hash: graph_hash(&self.graph),
            components: self.dag.component_count() as u32,
            index: self.index.clone(),
        }
    }

    pub fn graph(&self) -> &ProgramValidGraph {
        &self.graph
    }

    pub fn summaries(&self) -> &SummaryEdgeSet {
        &self.summaries
    }

    pub fn view(&self) -> &IndexingGraphView {
        &self.view
    }

    pub fn condensed(&self) -> &CondensedDag {
        &self.dag
    }

    pub fn index(&self) -> &ReachIndex {
        &self.index
    }

    pub fn capabilities(&self) -> SchemeCapabilities {
        self.capabilities
    }

    pub fn scheme(&self) -> Scheme {
        self.index.scheme()
    }

    pub fn scratch(&self) -> QueryScratch {
        QueryScratch {
            grail: GrailScratch::new(self.dag.component_count()),
        }
    }

    pub fn cs_query(&self, u: VertexId, v: VertexId) -> Result<bool> {
        self.cs_query_with(u, v, &mut self.scratch())
    }

    #[inline]
    pub fn cs_query_with(
        &self,
        u: VertexId,
        v: VertexId,
        scratch: &mut QueryScratch,
    ) -> Result<bool> {
        self.graph.check_vertex(u)?;
        self.graph.check_vertex(v)?;
        let cu = self.dag.component_of(IndexVertex::new(u, Side::One));
        let cv = self.dag.component_of(IndexVertex::new(v, Side::Two));
        Ok(self
            .index
            .reaches(self.dag.dag(), cu, cv, &mut scratch.grail))
    }

    /// A witness for `Q(u, v)`, or `None` when unreachable.
    pub fn cs_query_path(&self, u: VertexId, v: VertexId) -> Result<Option<WitnessPath>> {
        if !self.capabilities.returns_paths {
            return Err(Error::SchemeLacksPaths(self.capabilities.name));
        }
        self.graph.check_vertex(u)?;
        self.graph.check_vertex(v)?;
        let Some(index_path) = self.index_path(u, v) else {
            return Ok(None);
        };
        let mut path = WitnessPath::single(u);
        for edge in index_path {
            match edge {
                IndexEdge::Bridge => {}
                IndexEdge::Graph(i) => {
                    let e = self.graph.edges()[i];
                    path.push(e.label, e.dst);
                }
                IndexEdge::Summary(i) => self.append_summary(i, &mut path)?,
            }
        }
        debug_assert_eq!(path.target(), v);
        Ok(Some(path))
    }

    /// Pruned DFS on the indexing graph, returning the edges of the first path found.
    fn index_path(&self, u: VertexId, v: VertexId) -> Option<Vec<IndexEdge>> {
        const UNSEEN: u32 = u32::MAX;
        let start = IndexVertex::new(u, Side::One).dense();
        let goal = IndexVertex::new(v, Side::Two).dense();
        let goal_comp = self.dag.component(goal);
        if !self.index.may_reach(self.dag.component(start), goal_comp) {
            return None;
        }
        let n = 2 * self.graph.vertex_count();
        let mut parent: Vec<(u32, IndexEdge)> = vec![(UNSEEN, IndexEdge::Bridge); n];
        parent[start] = (start as u32, IndexEdge::Bridge);
        let mut stack = vec![start];
        let mut found = start == goal;
        'search: while let Some(x) = stack.pop() {
            for (y, kind) in self.view.successor_edges(IndexVertex::from_dense(x)) {
                let y = y.dense();
                if parent[y].0 != UNSEEN || !self.index.may_reach(self.dag.component(y), goal_comp)
                {
                    continue;
                }
                parent[y] = (x as u32, kind);
                if y == goal {
                    found = true;
                    break 'search;
                }
                stack.push(y);
            }
        }
        if !found {
            return None;
        }
        let mut edges = Vec::new();
        let mut at = goal;
        while at != start {
            let (prev, kind) = parent[at];
            edges.push(kind);
            at = prev as usize;
        }
        edges.reverse();
        Some(edges)
    }

    /// The concrete path `source -open-> entry ~> exit -close-> target` behind a summary edge.
    pub fn expand_summary(&self, summary: usize) -> Result<WitnessPath> {
        let se = self
            .summaries
            .edges()
            .get(summary)
            .ok_or_else(|| Error::Internal(format!("no summary edge #{summary}")))?;
        let mut path = WitnessPath::single(se.source);
        self.append_summary(summary, &mut path)?;
        Ok(path)
    }

    fn append_summary(&self, summary: usize, path: &mut WitnessPath) -> Result<()> {
        enum Work {
            Enter(usize),
            Leave,
            Hop(Label, VertexId),
        }
        let depth_cap = 4 * self.graph.vertex_count().max(1);
        let mut depth = 0usize;
        let mut work = vec![Work::Enter(summary)];
        while let Some(item) = work.pop() {
            match item {
                Work::Enter(i) => {
                    depth += 1;
                    assert!(
                        depth <= depth_cap,
                        "summary expansion exceeded depth {depth_cap}"
                    );
                    let se = self.summaries.edges()[i];
                    let inner = self
                        .summaries
                        .inner_steps(se.entry, se.exit)
                        .ok_or_else(|| {
                            Error::Internal(format!(
                                "summary {} -> {} lacks witness links",
                                se.source, se.target
                            ))
                        })?;
                    work.push(Work::Leave);
                    work.push(Work::Hop(Label::Close(se.site), se.target));
                    for step in inner.into_iter().rev() {
                        work.push(match step {
                            InnerStep::Eps { to, .. } => Work::Hop(Label::Eps, to),
                            InnerStep::Summary(j) => Work::Enter(j),
                        });
                    }
                    work.push(Work::Hop(Label::Open(se.site), se.entry));
                }
                Work::Leave => depth -= 1,
                Work::Hop(label, to) => path.push(label, to),
            }
        }
        Ok(())
    }

    pub fn tc_index(&self) -> Option<&TcIndex> {
        match &self.index {
            ReachIndex::Tc(t) => Some(t),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, FunctionId};

    fn chain_with_nested_call() -> ProgramValidGraph {
        // main: 0 -> 1 (call f) ... 6 -> 7; f: 2 -> 3 (call g) 4 -> 5; g: 3 -> 4 eps.
        ProgramValidGraph::new(
            vec![
                FunctionId(0),
                FunctionId(0),
                FunctionId(1),
                FunctionId(2),
                FunctionId(2),
                FunctionId(1),
                FunctionId(0),
                FunctionId(0),
            ],
            vec![
                Edge::new(0, 2, Label::Open(1)),
                Edge::new(2, 3, Label::Open(2)),
                Edge::new(3, 4, Label::Eps),
                Edge::new(4, 5, Label::Close(2)),
                Edge::new(5, 7, Label::Close(1)),
                Edge::new(1, 6, Label::Eps),
            ],
            2,
            2,
        )
        .unwrap()
    }

    #[test]
    fn nested_expansion_contains_inner_call() {
        let s = QuerySession::build(
            chain_with_nested_call(),
            Scheme::Grail,
            &IndexConfig::default(),
        )
        .unwrap();
        let outer = s.summaries().find(VertexId(0), VertexId(7)).unwrap();
        let p = s.expand_summary(outer).unwrap();
        assert_eq!(p.vertices, [0, 2, 3, 4, 5, 7].map(VertexId));
        assert!(derives(&p.labels[1..p.labels.len() - 1], NonTerminal::M));
        assert!(p.is_valid_in(s.graph(), NonTerminal::M));
    }

    #[test]
    fn self_query_is_single_vertex() {
        let s = QuerySession::build(
            chain_with_nested_call(),
            Scheme::Grail,
            &IndexConfig::default(),
        )
        .unwrap();
        assert!(s.cs_query(VertexId(6), VertexId(6)).unwrap());
        let p = s.cs_query_path(VertexId(6), VertexId(6)).unwrap().unwrap();
        assert_eq!(p, WitnessPath::single(VertexId(6)));
    }

    #[test]
    fn non_path_schemes_refuse() {
        for scheme in [Scheme::Tc, Scheme::Dual] {
            let s = QuerySession::build(chain_with_nested_call(), scheme, &IndexConfig::default())
                .unwrap();
            assert!(matches!(
                s.cs_query_path(VertexId(0), VertexId(7)),
                Err(Error::SchemeLacksPaths(_))
            ));
            assert!(s.cs_query(VertexId(0), VertexId(7)).unwrap());
        }
    }

    #[test]
    fn out_of_range_vertex() {
        let s = QuerySession::build(
            chain_with_nested_call(),
            Scheme::Tc,
            &IndexConfig::default(),
        )
        .unwrap();
        assert!(matches!(
            s.cs_query(VertexId(0), VertexId(99)),
            Err(Error::VertexOutOfRange(_))
        ));
    }

    #[test]
    fn index_file_round_trip_rebinds() {
        let g = chain_with_nested_call();
        let s = QuerySession::build(g.clone(), Scheme::Dual, &IndexConfig::default()).unwrap();
        let loaded = QuerySession::from_index_file(g, s.to_index_file()).unwrap();
        for u in 0..8 {
            for v in 0..8 {
                assert_eq!(
                    loaded.cs_query(VertexId(u), VertexId(v)).unwrap(),
                    s.cs_query(VertexId(u), VertexId(v)).unwrap()
                );
            }
        }
        let other = ProgramValidGraph::empty();
        assert!(matches!(
            QuerySession::from_index_file(other, s.to_index_file()),
            Err(Error::IndexGraphMismatch)
        ));
    }
}

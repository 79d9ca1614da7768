//! Summary edges: a shortcut `(c, r)` for every call site `i` with an edge
//! `c -open i-> entry`, a same-level path `entry ~> exit`, and an edge
//! `exit -close i-> r`.
//!
//! Same-level pairs `SL(entry, y)` (y reachable from a callee entry by a
//! string of matched parentheses) are computed with a FIFO worklist. Every
//! pair keeps the step that first discovered it, so one concrete summary
//! path can be rebuilt for each summary edge later.

use std::collections::HashMap;

use crate::graph::{Label, ProgramValidGraph, VertexId};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SummaryEdge {
    pub source: VertexId,
    pub target: VertexId,
    pub site: u32,
    /// Head of the open edge leaving `source`.
    pub entry: VertexId,
    /// Tail of the close edge entering `target`.
    pub exit: VertexId,
}

/// How a same-level pair `SL(entry, y)` was first derived.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SameLevelStep {
    /// `y == entry`.
    Seed,
    /// Epsilon edge `prev -> y`.
    Eps { prev: VertexId },
    /// Summary edge `prev -> y`, indexing into [`SummaryEdgeSet::edges`].
    Summary { prev: VertexId, summary: usize },
}

/// One hop of an expanded same-level path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InnerStep {
    Eps { from: VertexId, to: VertexId },
    Summary(usize),
}

#[derive(Debug, Clone, Default)]
pub struct SummaryEdgeSet {
    edges: Vec<SummaryEdge>,
    /// Callee entry vertex -> slot in `same_level`.
    entry_slot: HashMap<u32, usize>,
    /// Per entry: reached vertex -> discovering step.
    same_level: Vec<HashMap<u32, SameLevelStep>>,
}

impl SummaryEdgeSet {
    /// Summary edges sorted by `(source, target)`, at most one per pair.
    pub fn edges(&self) -> &[SummaryEdge] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn find(&self, source: VertexId, target: VertexId) -> Option<usize> {
        self.edges
            .binary_search_by(|e| (e.source, e.target).cmp(&(source, target)))
            .ok()
    }

    pub fn same_level_step(&self, entry: VertexId, y: VertexId) -> Option<SameLevelStep> {
        let slot = *self.entry_slot.get(&entry.0)?;
        self.same_level[slot].get(&y.0).copied()
    }

    /// Number of recorded same-level pairs.
    pub fn same_level_len(&self) -> usize {
        self.same_level.iter().map(HashMap::len).sum()
    }

    /// The recorded same-level path `entry ~> exit`, in forward order.
    /// `None` when the pair was never derived.
    pub fn inner_steps(&self, entry: VertexId, exit: VertexId) -> Option<Vec<InnerStep>> {
        let slot = *self.entry_slot.get(&entry.0)?;
        let preds = &self.same_level[slot];
        let mut steps = Vec::new();
        let mut y = exit;
        // Each link was discovered strictly before its successor, so the
        // walk terminates within the number of recorded pairs.
        for _ in 0..=preds.len() {
            match *preds.get(&y.0)? {
                SameLevelStep::Seed => {
                    steps.reverse();
                    return Some(steps);
                }
                SameLevelStep::Eps { prev } => {
                    steps.push(InnerStep::Eps { from: prev, to: y });
                    y = prev;
                }
                SameLevelStep::Summary { prev, summary } => {
                    steps.push(InnerStep::Summary(summary));
                    y = prev;
                }
            }
        }
        None
    }

    /// `|E^s| <= alpha^2 * |V|`.
    pub fn within_alpha_bound(&self, g: &ProgramValidGraph) -> bool {
        let alpha = g.declared_alpha() as u64;
        (self.edges.len() as u64) <= alpha * alpha * g.vertex_count() as u64
    }
}

struct Builder<'g> {
    g: &'g ProgramValidGraph,
    /// Open edges entering each vertex: `(caller, site)`.
    open_into: Vec<Vec<(VertexId, u32)>>,
    entry_of_slot: Vec<VertexId>,
    same_level: Vec<HashMap<u32, SameLevelStep>>,
    /// Vertex -> slots whose entry reaches it at the same level.
    slots_reaching: Vec<Vec<usize>>,
    /// Emission-ordered summaries and their outgoing index.
    emitted: Vec<SummaryEdge>,
    emitted_key: HashMap<(u32, u32), usize>,
    summaries_from: Vec<Vec<(VertexId, usize)>>,
    queue: std::collections::VecDeque<(usize, VertexId)>,
}

impl Builder<'_> {
    fn add(&mut self, slot: usize, y: VertexId, step: SameLevelStep) {
        let map = &mut self.same_level[slot];
        if map.contains_key(&y.0) {
            return;
        }
        map.insert(y.0, step);
        self.slots_reaching[y.index()].push(slot);
        self.queue.push_back((slot, y));
    }

    fn emit(&mut self, edge: SummaryEdge) {
        if self
            .emitted_key
            .contains_key(&(edge.source.0, edge.target.0))
        {
            return;
        }
        let idx = self.emitted.len();
        self.emitted.push(edge);
        self.emitted_key.insert((edge.source.0, edge.target.0), idx);
        self.summaries_from[edge.source.index()].push((edge.target, idx));
        let slots = self.slots_reaching[edge.source.index()].clone();
        for slot in slots {
            self.add(
                slot,
                edge.target,
                SameLevelStep::Summary {
                    prev: edge.source,
                    summary: idx,
                },
            );
        }
    }

    fn run(&mut self) {
        while let Some((slot, y)) = self.queue.pop_front() {
            let entry = self.entry_of_slot[slot];
            let g = self.g;
            for e in g.out_edges(y) {
                match e.label {
                    Label::Eps => self.add(slot, e.dst, SameLevelStep::Eps { prev: y }),
                    Label::Close(site) => {
                        let callers: Vec<VertexId> = self.open_into[entry.index()]
                            .iter()
                            .filter(|&&(_, s)| s == site)
                            .map(|&(c, _)| c)
                            .collect();
                        for c in callers {
                            self.emit(SummaryEdge {
                                source: c,
                                target: e.dst,
                                site,
                                entry,
                                exit: y,
                            });
                        }
                    }
                    Label::Open(_) => {}
                }
            }
            let shortcuts = self.summaries_from[y.index()].clone();
            for (r, idx) in shortcuts {
                self.add(
                    slot,
                    r,
                    SameLevelStep::Summary {
                        prev: y,
                        summary: idx,
                    },
                );
            }
        }
    }
}

pub fn compute_summaries(g: &ProgramValidGraph) -> SummaryEdgeSet {
    let n = g.vertex_count();
    let mut open_into: Vec<Vec<(VertexId, u32)>> = vec![Vec::new(); n];
    for e in g.edges() {
        if let Label::Open(site) = e.label {
            open_into[e.dst.index()].push((e.src, site));
        }
    }

    let mut b = Builder {
        g,
        open_into,
        entry_of_slot: Vec::new(),
        same_level: Vec::new(),
        slots_reaching: vec![Vec::new(); n],
        emitted: Vec::new(),
        emitted_key: HashMap::new(),
        summaries_from: vec![Vec::new(); n],
        queue: Default::default(),
    };
    let mut entry_slot = HashMap::new();
    for v in g.vertices() {
        if !b.open_into[v.index()].is_empty() {
            let slot = b.entry_of_slot.len();
            entry_slot.insert(v.0, slot);
            b.entry_of_slot.push(v);
            b.same_level.push(HashMap::new());
            b.add(slot, v, SameLevelStep::Seed);
        }
    }
    b.run();

    // Sort by (source, target) and renumber the summary references.
    let mut order: Vec<usize> = (0..b.emitted.len()).collect();
    order.sort_by_key(|&i| (b.emitted[i].source, b.emitted[i].target));
    let mut new_index = vec![0usize; order.len()];
    for (new, &old) in order.iter().enumerate() {
        new_index[old] = new;
    }
    let edges = order.iter().map(|&i| b.emitted[i]).collect();
    let mut same_level = b.same_level;
    for map in &mut same_level {
        for step in map.values_mut() {
            if let SameLevelStep::Summary { summary, .. } = step {
                *summary = new_index[*summary];
            }
        }
    }

    SummaryEdgeSet {
        edges,
        entry_slot,
        same_level,
    }
}

/// `source target site` lines, one per summary edge.
pub fn write_summaries(set: &SummaryEdgeSet) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    for e in set.edges() {
        let _ = writeln!(out, "{} {} {}", e.source, e.target, e.site);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{parse_graph, Edge, FunctionId};

    const FOUR_FUNCTIONS: &str = include_str!("../tests/fixtures/four_functions.pvg");
    const RUNNING: &str = include_str!("../tests/fixtures/running_example.pvg");

    #[test]
    fn running_example_has_one_summary() {
        let g = parse_graph(RUNNING).unwrap();
        let set = compute_summaries(&g);
        assert_eq!(
            set.edges(),
            &[SummaryEdge {
                source: VertexId(1),
                target: VertexId(3),
                site: 2,
                entry: VertexId(2),
                exit: VertexId(2),
            }]
        );
        assert_eq!(set.inner_steps(VertexId(2), VertexId(2)), Some(vec![]));
    }

    #[test]
    fn four_functions_summaries_include_d_to_e() {
        let g = parse_graph(FOUR_FUNCTIONS).unwrap();
        let set = compute_summaries(&g);
        let pairs: Vec<(u32, u32)> = set
            .edges()
            .iter()
            .map(|e| (e.source.0, e.target.0))
            .collect();
        // c->i over 19, d->e over 8, f->g over 17
        assert_eq!(pairs, vec![(2, 8), (3, 4), (5, 6)]);
        assert_eq!(write_summaries(&set), "2 8 19\n3 4 8\n5 6 17\n");
    }

    #[test]
    fn no_calls_no_summaries() {
        let g = ProgramValidGraph::new(
            vec![FunctionId(0); 3],
            vec![Edge::new(0, 1, Label::Eps), Edge::new(1, 2, Label::Eps)],
            0,
            0,
        )
        .unwrap();
        assert!(compute_summaries(&g).is_empty());
    }

    /// f -> g -> h with call sites 1 (f calls g) and 2 (g calls h).
    fn nested_chain() -> ProgramValidGraph {
        // f: 0 (call), 7 (ret); g: 1 (entry), 2 (call), 5 (ret), 6 (exit); h: 3, 4
        let func = [0, 1, 1, 2, 2, 1, 1, 0].map(FunctionId).to_vec();
        let edges = vec![
            Edge::new(0, 1, Label::Open(1)),
            Edge::new(1, 2, Label::Eps),
            Edge::new(2, 3, Label::Open(2)),
            Edge::new(3, 4, Label::Eps),
            Edge::new(4, 5, Label::Close(2)),
            Edge::new(5, 6, Label::Eps),
            Edge::new(6, 7, Label::Close(1)),
        ];
        ProgramValidGraph::new(func, edges, 2, 2).unwrap()
    }

    #[test]
    fn nested_calls_reach_fixpoint() {
        let g = nested_chain();
        let set = compute_summaries(&g);
        let pairs: Vec<(u32, u32, u32)> = set
            .edges()
            .iter()
            .map(|e| (e.source.0, e.target.0, e.site))
            .collect();
        assert_eq!(pairs, vec![(0, 7, 1), (2, 5, 2)]);
        let outer = set.edges()[0];
        let steps = set.inner_steps(outer.entry, outer.exit).unwrap();
        assert_eq!(
            steps,
            vec![
                InnerStep::Eps {
                    from: VertexId(1),
                    to: VertexId(2)
                },
                InnerStep::Summary(1),
                InnerStep::Eps {
                    from: VertexId(5),
                    to: VertexId(6)
                },
            ]
        );
    }

    #[test]
    fn recursion_terminates() {
        // One function calling itself: 0 -open1-> 0 is illegal, so use two vertices.
        let func = vec![FunctionId(0); 3];
        let edges = vec![
            Edge::new(0, 1, Label::Eps),
            Edge::new(1, 0, Label::Open(1)),
            Edge::new(1, 2, Label::Eps),
            Edge::new(2, 1, Label::Close(1)),
        ];
        let g = ProgramValidGraph::new(func, edges, 2, 1).unwrap();
        let set = compute_summaries(&g);
        assert_eq!(set.len(), 1);
        assert_eq!(
            (set.edges()[0].source, set.edges()[0].target),
            (VertexId(1), VertexId(1))
        );
        let again = compute_summaries(&g);
        assert_eq!(set.edges(), again.edges());
    }
}

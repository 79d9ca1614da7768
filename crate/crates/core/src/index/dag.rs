//! DAGs and strongly-connected-component condensation.

use crate::error::{Error, Result};
use crate::indexing::{Digraph, IndexVertex, IndexingGraphView};

/// Immutable DAG in CSR form. Children are sorted and deduplicated.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dag {
    offsets: Vec<usize>,
    targets: Vec<u32>,
    topo: Vec<u32>,
    in_degree: Vec<u32>,
}

impl Dag {
    /// Builds a DAG over nodes `0..n`; fails with [`Error::Cyclic`] on a cycle.
    pub fn from_edges(n: usize, edges: &[(u32, u32)]) -> Result<Dag> {
        let mut lists: Vec<Vec<u32>> = vec![Vec::new(); n];
        for &(a, b) in edges {
            if a as usize >= n || b as usize >= n {
                return Err(Error::Structure(format!(
                    "dag edge {a} -> {b} out of range {n}"
                )));
            }
            lists[a as usize].push(b);
        }
        Self::from_lists(lists)
    }

    fn from_lists(mut lists: Vec<Vec<u32>>) -> Result<Dag> {
        let n = lists.len();
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in &mut lists {
            list.sort_unstable();
            list.dedup();
            targets.extend_from_slice(list);
            offsets.push(targets.len());
        }
        let mut in_degree = vec![0u32; n];
        for &t in &targets {
            in_degree[t as usize] += 1;
        }
        // Kahn, smallest ready node first.
        let mut remaining = in_degree.clone();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<u32>> = (0..n as u32)
            .filter(|&v| remaining[v as usize] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut topo = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(v)) = ready.pop() {
            topo.push(v);
            for &c in &targets[offsets[v as usize]..offsets[v as usize + 1]] {
                remaining[c as usize] -= 1;
                if remaining[c as usize] == 0 {
                    ready.push(std::cmp::Reverse(c));
                }
            }
        }
        if topo.len() != n {
            return Err(Error::Cyclic);
        }
        Ok(Dag {
            offsets,
            targets,
            topo,
            in_degree,
        })
    }

    pub fn node_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn edge_count(&self) -> usize {
        self.targets.len()
    }

    #[inline]
    pub fn children(&self, node: u32) -> &[u32] {
        &self.targets[self.offsets[node as usize]..self.offsets[node as usize + 1]]
    }

    /// Nodes in topological order (parents before children).
    pub fn topo_order(&self) -> &[u32] {
        &self.topo
    }

    pub fn in_degree(&self, node: u32) -> u32 {
        self.in_degree[node as usize]
    }

    /// Nodes without parents, ascending.
    pub fn roots(&self) -> Vec<u32> {
        (0..self.node_count() as u32)
            .filter(|&v| self.in_degree[v as usize] == 0)
            .collect()
    }

    pub fn edges(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.node_count() as u32)
            .flat_map(move |a| self.children(a).iter().map(move |&b| (a, b)))
    }
}

impl Digraph for Dag {
    fn node_count(&self) -> usize {
        Dag::node_count(self)
    }

    fn successors(&self, node: usize) -> &[u32] {
        self.children(node as u32)
    }
}

/// Condensation of the indexing graph (or any digraph).
///
/// Components are numbered in reverse topological order: every DAG edge
/// goes from a higher component id to a lower one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CondensedDag {
    component_of: Vec<u32>,
    dag: Dag,
}

impl CondensedDag {
    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn component_count(&self) -> usize {
        self.dag.node_count()
    }

    #[inline]
    pub fn component(&self, node: usize) -> u32 {
        self.component_of[node]
    }

    #[inline]
    pub fn component_of(&self, iv: IndexVertex) -> u32 {
        self.component_of[iv.dense()]
    }

    pub fn components(&self) -> &[u32] {
        &self.component_of
    }
}

/// Tarjan's algorithm, iterative.
pub fn condense_graph<G: Digraph + ?Sized>(g: &G) -> CondensedDag {
    const UNSEEN: u32 = u32::MAX;
    let n = g.node_count();
    let mut index = vec![UNSEEN; n];
    let mut low = vec![0u32; n];
    let mut on_stack = vec![false; n];
    let mut comp = vec![UNSEEN; n];
    let mut stack: Vec<u32> = Vec::new();
    let mut call: Vec<(u32, usize)> = Vec::new();
    let mut next_index = 0u32;
    let mut next_comp = 0u32;

    for root in 0..n {
        if index[root] != UNSEEN {
            continue;
        }
        call.push((root as u32, 0));
        index[root] = next_index;
        low[root] = next_index;
        next_index += 1;
        stack.push(root as u32);
        on_stack[root] = true;

        while let Some(&mut (v, ref mut child)) = call.last_mut() {
            let succ = g.successors(v as usize);
            if *child < succ.len() {
                let w = succ[*child] as usize;
                *child += 1;
                if index[w] == UNSEEN {
                    index[w] = next_index;
                    low[w] = next_index;
                    next_index += 1;
                    stack.push(w as u32);
                    on_stack[w] = true;
                    call.push((w as u32, 0));
                } else if on_stack[w] {
                    low[v as usize] = low[v as usize].min(index[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(parent, _)) = call.last() {
                low[parent as usize] = low[parent as usize].min(low[v as usize]);
            }
            if low[v as usize] == index[v as usize] {
                loop {
                    let w = stack.pop().expect("tarjan stack underflow");
                    on_stack[w as usize] = false;
                    comp[w as usize] = next_comp;
                    if w == v {
                        break;
                    }
                }
                next_comp += 1;
            }
        }
    }

    let mut lists: Vec<Vec<u32>> = vec![Vec::new(); next_comp as usize];
    for v in 0..n {
        let cv = comp[v];
        for &w in g.successors(v) {
            let cw = comp[w as usize];
            if cv != cw {
                lists[cv as usize].push(cw);
            }
        }
    }
    let dag = Dag::from_lists(lists).expect("condensation is acyclic");
    CondensedDag {
        component_of: comp,
        dag,
    }
}

pub fn condense(view: &IndexingGraphView) -> CondensedDag {
    condense_graph(view)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{Edge, FunctionId, Label, ProgramValidGraph};
    use crate::summary::compute_summaries;

    #[test]
    fn rejects_cycles() {
        assert!(matches!(
            Dag::from_edges(2, &[(0, 1), (1, 0)]),
            Err(Error::Cyclic)
        ));
        let d = Dag::from_edges(3, &[(2, 0), (0, 1), (2, 0)]).unwrap();
        assert_eq!(d.edge_count(), 2);
        assert_eq!(d.topo_order(), &[2, 0, 1]);
        assert_eq!(d.roots(), vec![2]);
    }

    #[test]
    fn acyclic_view_keeps_every_vertex() {
        let g = ProgramValidGraph::new(
            vec![FunctionId(0), FunctionId(0), FunctionId(1)],
            vec![Edge::new(0, 1, Label::Eps), Edge::new(1, 2, Label::Open(1))],
            1,
            1,
        )
        .unwrap();
        let view = IndexingGraphView::new(&g, &compute_summaries(&g));
        let c = condense(&view);
        assert_eq!(c.component_count(), 6);
    }

    #[test]
    fn eps_cycle_collapses_per_side() {
        let g = ProgramValidGraph::new(
            vec![FunctionId(0); 3],
            vec![
                Edge::new(0, 1, Label::Eps),
                Edge::new(1, 2, Label::Eps),
                Edge::new(2, 0, Label::Eps),
            ],
            0,
            0,
        )
        .unwrap();
        let view = IndexingGraphView::new(&g, &compute_summaries(&g));
        let c = condense(&view);
        let ones: Vec<u32> = (0..3)
            .map(|v| c.component_of(IndexVertex::one(v)))
            .collect();
        assert!(ones.iter().all(|&x| x == ones[0]));
        let twos: Vec<u32> = (0..3)
            .map(|v| c.component_of(IndexVertex::two(v)))
            .collect();
        assert!(twos.iter().all(|&x| x == twos[0]));
        assert_ne!(ones[0], twos[0]);
        assert_eq!(c.component_count(), 2);
        // Edges run from higher to lower component ids.
        for (a, b) in c.dag().edges() {
            assert!(a > b);
        }
    }
}

//! Dual labeling: spanning-forest intervals plus a link table for the
//! reachability contributed by non-tree edges.

use std::fmt;

use super::dag::Dag;
use crate::error::{Error, Result};

pub const DEFAULT_DUAL_LIMIT: usize = 20_000;

/// Post-order interval, ranks start at 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct IntervalLabel {
    pub low: u32,
    pub high: u32,
}

impl IntervalLabel {
    pub const fn new(low: u32, high: u32) -> IntervalLabel {
        IntervalLabel { low, high }
    }

    #[inline]
    pub fn contains(&self, other: &IntervalLabel) -> bool {
        self.low <= other.low && other.high <= self.high
    }
}

impl fmt::Display for IntervalLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {}]", self.low, self.high)
    }
}

/// All link-table entries sharing one source interval.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinkGroup {
    pub source: IntervalLabel,
    /// Pairwise disjoint, sorted by `low`.
    pub targets: Vec<IntervalLabel>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DualLabelingIndex {
    intervals: Vec<IntervalLabel>,
    tree_parent: Vec<u32>,
    non_tree: Vec<(u32, u32)>,
    groups: Vec<LinkGroup>,
}

pub const NO_PARENT: u32 = u32::MAX;

impl DualLabelingIndex {
    pub fn interval(&self, node: u32) -> IntervalLabel {
        self.intervals[node as usize]
    }

    pub fn intervals(&self) -> &[IntervalLabel] {
        &self.intervals
    }

    /// Spanning-forest parent, or [`NO_PARENT`] for forest roots.
    pub fn tree_parent(&self, node: u32) -> u32 {
        self.tree_parent[node as usize]
    }

    pub fn non_tree_edges(&self) -> &[(u32, u32)] {
        &self.non_tree
    }

    pub fn link_groups(&self) -> &[LinkGroup] {
        &self.groups
    }

    /// Flattened link table as (source, target) interval pairs.
    pub fn link_table(&self) -> impl Iterator<Item = (IntervalLabel, IntervalLabel)> + '_ {
        self.groups
            .iter()
            .flat_map(|g| g.targets.iter().map(move |&t| (g.source, t)))
    }

    pub fn link_table_len(&self) -> usize {
        self.groups.iter().map(|g| g.targets.len()).sum()
    }

    pub fn heap_bytes(&self) -> usize {
        self.intervals.len() * 8
            + self.tree_parent.len() * 4
            + self.non_tree.len() * 8
            + self
                .groups
                .iter()
                .map(|g| 8 + 24 + g.targets.len() * 8)
                .sum::<usize>()
    }

    pub(crate) fn from_parts(
        intervals: Vec<IntervalLabel>,
        tree_parent: Vec<u32>,
        non_tree: Vec<(u32, u32)>,
        groups: Vec<LinkGroup>,
    ) -> DualLabelingIndex {
        DualLabelingIndex {
            intervals,
            tree_parent,
            non_tree,
            groups,
        }
    }
}

/// Reduces a set of laminar intervals to its maximal members, sorted by `low`.
fn cover(mut set: Vec<IntervalLabel>) -> Vec<IntervalLabel> {
    set.sort_unstable_by(|a, b| a.low.cmp(&b.low).then(b.high.cmp(&a.high)));
    let mut out: Vec<IntervalLabel> = Vec::with_capacity(set.len());
    for iv in set {
        match out.last() {
            Some(last) if last.contains(&iv) => {}
            _ => out.push(iv),
        }
    }
    out
}

pub fn build_dual(dag: &Dag, limit: usize) -> Result<DualLabelingIndex> {
    let n = dag.node_count();
    let roots = dag.roots();
    let non_tree_count = dag.edge_count() - (n - roots.len());
    if non_tree_count > limit {
        return Err(Error::DualTooManyNonTreeEdges {
            non_tree: non_tree_count,
            limit,
        });
    }

    // First-visit DFS forest; the virtual root visits real roots in id order.
    let mut intervals = vec![IntervalLabel::new(0, 0); n];
    let mut tree_parent = vec![NO_PARENT; n];
    let mut visited = vec![false; n];
    let mut non_tree = Vec::with_capacity(non_tree_count);
    let mut counter = 0u32;
    let mut call: Vec<(u32, usize)> = Vec::new();
    for &root in &roots {
        visited[root as usize] = true;
        intervals[root as usize].low = counter + 1;
        call.push((root, 0));
        while let Some(top) = call.last_mut() {
            let (u, next) = *top;
            let children = dag.children(u);
            if next < children.len() {
                top.1 += 1;
                let c = children[next];
                if visited[c as usize] {
                    non_tree.push((u, c));
                } else {
                    visited[c as usize] = true;
                    tree_parent[c as usize] = u;
                    intervals[c as usize].low = counter + 1;
                    call.push((c, 0));
                }
            } else {
                counter += 1;
                intervals[u as usize].high = counter;
                call.pop();
            }
        }
    }
    debug_assert_eq!(non_tree.len(), non_tree_count);

    // heads[w]: maximal intervals of non-tree-edge heads whose tails w reaches.
    let mut heads_by_tail: Vec<Vec<u32>> = vec![Vec::new(); n];
    for &(t, h) in &non_tree {
        heads_by_tail[t as usize].push(h);
    }
    let mut reached: Vec<Option<Vec<IntervalLabel>>> = vec![None; n];
    let mut parents_left: Vec<u32> = (0..n as u32).map(|v| dag.in_degree(v)).collect();
    let mut groups = Vec::new();
    for &w in dag.topo_order().iter().rev() {
        let mut acc: Vec<IntervalLabel> = Vec::new();
        for &c in dag.children(w) {
            acc.extend_from_slice(reached[c as usize].as_deref().unwrap_or(&[]));
        }
        let own = &heads_by_tail[w as usize];
        if !own.is_empty() {
            let mut targets = Vec::new();
            for &h in own {
                targets.push(intervals[h as usize]);
                targets.extend_from_slice(reached[h as usize].as_deref().unwrap_or(&[]));
                acc.push(intervals[h as usize]);
            }
            groups.push(LinkGroup {
                source: intervals[w as usize],
                targets: cover(targets),
            });
        }
        for &c in dag.children(w) {
            parents_left[c as usize] -= 1;
            if parents_left[c as usize] == 0 {
                reached[c as usize] = None;
            }
        }
        if parents_left[w as usize] > 0 && !acc.is_empty() {
            reached[w as usize] = Some(cover(acc));
        }
    }
    groups.sort_unstable_by_key(|g| g.source);

    Ok(DualLabelingIndex {
        intervals,
        tree_parent,
        non_tree,
        groups,
    })
}

pub fn dual_query(idx: &DualLabelingIndex, u: u32, v: u32) -> bool {
    let iu = idx.intervals[u as usize];
    let iv = idx.intervals[v as usize];
    if iu.contains(&iv) {
        return true;
    }
    // Sources inside u's subtree have low in [iu.low, iu.high] and high <= iu.high.
    let start = idx.groups.partition_point(|g| g.source.low < iu.low);
    for g in &idx.groups[start..] {
        if g.source.low > iu.high {
            break;
        }
        if g.source.high > iu.high {
            continue;
        }
        let pos = g.targets.partition_point(|t| t.low <= iv.low);
        if pos > 0 && g.targets[pos - 1].contains(&iv) {
            return true;
        }
    }
    false
}

//! Grail: several randomized post-order interval labelings used as a
//! negative filter in front of a pruned DFS.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::dag::Dag;
use super::dual::IntervalLabel;
use crate::error::{Error, Result};

pub const DEFAULT_GRAIL_LABELS: usize = 5;

/// Visit order for one labeling: the virtual root's children, then each node's children.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraversalOrder {
    pub roots: Vec<u32>,
    pub children: Vec<Vec<u32>>,
}

impl TraversalOrder {
    pub fn shuffled(dag: &Dag, rng: &mut ChaCha8Rng) -> TraversalOrder {
        let mut roots = dag.roots();
        roots.shuffle(rng);
        let children = (0..dag.node_count() as u32)
            .map(|u| {
                let mut c = dag.children(u).to_vec();
                c.shuffle(rng);
                c
            })
            .collect();
        TraversalOrder { roots, children }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GrailIndex {
    k: usize,
    seed: u64,
    /// Row-major: `labels[node * k + j]`.
    labels: Vec<IntervalLabel>,
}

impl GrailIndex {
    pub fn k_labels(&self) -> usize {
        self.k
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn node_count(&self) -> usize {
        self.labels.len().checked_div(self.k).unwrap_or(0)
    }

    pub fn labels(&self, node: u32) -> &[IntervalLabel] {
        let base = node as usize * self.k;
        &self.labels[base..base + self.k]
    }

    pub fn heap_bytes(&self) -> usize {
        self.labels.len() * std::mem::size_of::<IntervalLabel>()
    }

    /// True when every labeling of `u` contains the one of `v`.
    #[inline]
    pub fn may_reach(&self, u: u32, v: u32) -> bool {
        let lu = self.labels(u);
        let lv = self.labels(v);
        lu.iter().zip(lv).all(|(a, b)| a.contains(b))
    }

    pub(crate) fn from_parts(k: usize, seed: u64, labels: Vec<IntervalLabel>) -> GrailIndex {
        GrailIndex { k, seed, labels }
    }

    pub(crate) fn raw_labels(&self) -> &[IntervalLabel] {
        &self.labels
    }

    /// Builds an index from explicit traversal orders (one per labeling).
    pub fn from_orders(dag: &Dag, orders: &[TraversalOrder], seed: u64) -> Result<GrailIndex> {
        let k = orders.len();
        if k == 0 {
            return Err(Error::InvalidParams(
                "grail needs at least one labeling".into(),
            ));
        }
        let n = dag.node_count();
        let mut labels = vec![IntervalLabel::new(0, 0); n * k];
        for (j, order) in orders.iter().enumerate() {
            for (node, l) in label_once(dag, order)?.into_iter().enumerate() {
                labels[node * k + j] = l;
            }
        }
        Ok(GrailIndex { k, seed, labels })
    }
}

/// One post-order labeling; low is the minimum rank over all children, not just tree children.
fn label_once(dag: &Dag, order: &TraversalOrder) -> Result<Vec<IntervalLabel>> {
    let n = dag.node_count();
    if order.children.len() != n {
        return Err(Error::InvalidParams(
            "traversal order does not match dag".into(),
        ));
    }
    let mut out = vec![IntervalLabel::new(0, 0); n];
    let mut visited = vec![false; n];
    let mut rank = 0u32;
    let mut call: Vec<(u32, usize)> = Vec::new();
    for &root in &order.roots {
        if visited[root as usize] {
            continue;
        }
        visited[root as usize] = true;
        call.push((root, 0));
        while let Some(top) = call.last_mut() {
            let (u, next) = *top;
            let children = &order.children[u as usize];
            if next < children.len() {
                top.1 += 1;
                let c = children[next];
                if !visited[c as usize] {
                    visited[c as usize] = true;
                    call.push((c, 0));
                }
            } else {
                rank += 1;
                let low = children
                    .iter()
                    .map(|&c| out[c as usize].low)
                    .fold(rank, u32::min);
                out[u as usize] = IntervalLabel::new(low, rank);
                call.pop();
            }
        }
    }
    if visited.iter().any(|&b| !b) {
        return Err(Error::InvalidParams(
            "traversal order misses some nodes".into(),
        ));
    }
    Ok(out)
}

pub fn build_grail(dag: &Dag, k_labels: usize, seed: u64) -> Result<GrailIndex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let orders: Vec<TraversalOrder> = (0..k_labels)
        .map(|_| TraversalOrder::shuffled(dag, &mut rng))
        .collect();
    GrailIndex::from_orders(dag, &orders, seed)
}

/// Per-caller traversal state, reused across queries.
#[derive(Debug, Default, Clone)]
pub struct GrailScratch {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<u32>,
    /// Nodes expanded by the most recent query.
    pub expansions: usize,
}

impl GrailScratch {
    pub fn new(n: usize) -> GrailScratch {
        GrailScratch {
            stamp: vec![0; n],
            ..Default::default()
        }
    }

    fn begin(&mut self, n: usize) {
        if self.stamp.len() != n {
            self.stamp = vec![0; n];
            self.epoch = 0;
        }
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.epoch = 1;
        }
        self.stack.clear();
        self.expansions = 0;
    }
}

pub fn grail_query(
    idx: &GrailIndex,
    dag: &Dag,
    u: u32,
    v: u32,
    scratch: &mut GrailScratch,
) -> bool {
    scratch.begin(dag.node_count());
    if u == v {
        return true;
    }
    if !idx.may_reach(u, v) {
        return false;
    }
    let epoch = scratch.epoch;
    scratch.stamp[u as usize] = epoch;
    scratch.stack.push(u);
    while let Some(x) = scratch.stack.pop() {
        scratch.expansions += 1;
        for &c in dag.children(x) {
            if c == v {
                return true;
            }
            if scratch.stamp[c as usize] != epoch && idx.may_reach(c, v) {
                scratch.stamp[c as usize] = epoch;
                scratch.stack.push(c);
            }
        }
    }
    false
}

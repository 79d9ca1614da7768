//! Ground truth for context-sensitive reachability.
//!
//! Three independent routes live here:
//!
//! * [`cfl_closure`] saturates the extended Dyck grammar over a whole graph,
//!   the classic cubic CFL-reachability worklist.
//! * [`derives`] checks a single label string with a CYK table.
//! * [`Tabulation`] answers one query at a time by the visited-set traversal
//!   that follows summary edges instead of re-entering callees.
//!
//! The grammar, binarized:
//!
//! ```text
//! S -> P N
//! P -> M P | C_i P | eps
//! N -> M N | O_i N | eps
//! M -> O_i T_i | M M | eps
//! T_i -> M C_i
//! ```
//!
//! `O_i` / `C_i` stand for the terminals open/close of site `i`. Epsilon
//! productions are handled by seeding the reflexive pairs of S, P, N and M;
//! an epsilon-labelled edge contributes an M fact.

use std::collections::{BTreeSet, HashMap, VecDeque};

use fixedbitset::FixedBitSet;

use crate::error::{Error, Result};
use crate::graph::{Label, ProgramValidGraph, VertexId};
use crate::summary::SummaryEdgeSet;

/// Public nonterminals of the grammar.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NonTerminal {
    S,
    P,
    N,
    M,
}

impl NonTerminal {
    pub const ALL: [NonTerminal; 4] = [
        NonTerminal::S,
        NonTerminal::P,
        NonTerminal::N,
        NonTerminal::M,
    ];

    fn index(self) -> usize {
        match self {
            NonTerminal::S => 0,
            NonTerminal::P => 1,
            NonTerminal::N => 2,
            NonTerminal::M => 3,
        }
    }
}

pub const DEFAULT_ORACLE_LIMIT: usize = 300;

#[derive(Debug, Clone, Copy)]
pub struct OracleConfig {
    /// Largest vertex count the closure accepts.
    pub max_vertices: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        OracleConfig {
            max_vertices: DEFAULT_ORACLE_LIMIT,
        }
    }
}

/// The S, P, N and M relations of a saturated graph.
#[derive(Debug, Clone)]
pub struct ReachRelation {
    n: usize,
    rows: [Vec<FixedBitSet>; 4],
}

impl ReachRelation {
    pub fn vertex_count(&self) -> usize {
        self.n
    }

    pub fn contains(&self, nt: NonTerminal, u: VertexId, v: VertexId) -> bool {
        self.rows[nt.index()][u.index()].contains(v.index())
    }

    /// Shorthand for the S relation, i.e. context-sensitive reachability.
    pub fn reaches(&self, u: VertexId, v: VertexId) -> bool {
        self.contains(NonTerminal::S, u, v)
    }

    pub fn successors(&self, nt: NonTerminal, u: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.rows[nt.index()][u.index()]
            .ones()
            .map(|v| VertexId(v as u32))
    }

    /// All pairs of the relation, sorted.
    pub fn pairs(&self, nt: NonTerminal) -> Vec<(VertexId, VertexId)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in self.rows[nt.index()][u].ones() {
                out.push((VertexId(u as u32), VertexId(v as u32)));
            }
        }
        out
    }

    pub fn len(&self, nt: NonTerminal) -> usize {
        self.rows[nt.index()].iter().map(|r| r.count_ones(..)).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
}

/// Binarized productions indexed by the symbol on each side.
struct Grammar {
    /// `as_left[x]` lists `(a, y)` for productions `a -> x y`.
    as_left: Vec<Vec<(usize, usize)>>,
    /// `as_right[x]` lists `(a, y)` for productions `a -> y x`.
    as_right: Vec<Vec<(usize, usize)>>,
}

const S: usize = 0;
const P: usize = 1;
const N: usize = 2;
const M: usize = 3;

impl Grammar {
    /// Symbols 0..4 are S, P, N, M; each site slot `j` adds O, C and T.
    fn new(site_slots: usize) -> Self {
        let n_sym = 4 + 3 * site_slots;
        let mut g = Grammar {
            as_left: vec![Vec::new(); n_sym],
            as_right: vec![Vec::new(); n_sym],
        };
        g.add(S, P, N);
        g.add(P, M, P);
        g.add(N, M, N);
        g.add(M, M, M);
        for j in 0..site_slots {
            let (o, c, t) = Self::site_symbols(j);
            g.add(P, c, P);
            g.add(N, o, N);
            g.add(M, o, t);
            g.add(t, M, c);
        }
        g
    }

    fn site_symbols(slot: usize) -> (usize, usize, usize) {
        (4 + 3 * slot, 5 + 3 * slot, 6 + 3 * slot)
    }

    fn add(&mut self, a: usize, x: usize, y: usize) {
        self.as_left[x].push((a, y));
        self.as_right[y].push((a, x));
    }

    fn symbol_count(&self) -> usize {
        self.as_left.len()
    }
}

/// Saturates the grammar over `g`. Cubic in the vertex count, so it refuses
/// graphs above `config.max_vertices`.
pub fn cfl_closure(g: &ProgramValidGraph, config: &OracleConfig) -> Result<ReachRelation> {
    let n = g.vertex_count();
    if n > config.max_vertices {
        return Err(Error::OracleTooLarge {
            vertices: n,
            limit: config.max_vertices,
        });
    }

    // Only sites that label some edge can produce facts.
    let sites: BTreeSet<u32> = g.edges().iter().filter_map(|e| e.label.site()).collect();
    let slot_of: HashMap<u32, usize> = sites.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let grammar = Grammar::new(sites.len());
    let n_sym = grammar.symbol_count();

    let mut fwd: Vec<Vec<FixedBitSet>> = vec![vec![FixedBitSet::with_capacity(n); n]; n_sym];
    let mut bwd: Vec<Vec<FixedBitSet>> = vec![vec![FixedBitSet::with_capacity(n); n]; n_sym];
    let mut work: VecDeque<(usize, usize, usize)> = VecDeque::new();

    type Rows = Vec<Vec<FixedBitSet>>;
    fn add(
        fwd: &mut Rows,
        bwd: &mut Rows,
        work: &mut VecDeque<(usize, usize, usize)>,
        x: usize,
        u: usize,
        v: usize,
    ) {
        if !fwd[x][u].put(v) {
            bwd[x][v].insert(u);
            work.push_back((x, u, v));
        }
    }

    for u in 0..n {
        for x in [S, P, N, M] {
            add(&mut fwd, &mut bwd, &mut work, x, u, u);
        }
    }
    for e in g.edges() {
        let x = match e.label {
            Label::Eps => M,
            Label::Open(s) => Grammar::site_symbols(slot_of[&s]).0,
            Label::Close(s) => Grammar::site_symbols(slot_of[&s]).1,
        };
        add(
            &mut fwd,
            &mut bwd,
            &mut work,
            x,
            e.src.index(),
            e.dst.index(),
        );
    }

    let mut scratch: Vec<usize> = Vec::new();
    while let Some((x, u, v)) = work.pop_front() {
        for &(a, y) in &grammar.as_left[x] {
            scratch.clear();
            scratch.extend(fwd[y][v].ones());
            for &w in &scratch {
                add(&mut fwd, &mut bwd, &mut work, a, u, w);
            }
        }
        for &(a, y) in &grammar.as_right[x] {
            scratch.clear();
            scratch.extend(bwd[y][u].ones());
            for &w in &scratch {
                add(&mut fwd, &mut bwd, &mut work, a, w, v);
            }
        }
    }

    let mut fwd = fwd.into_iter();
    let rows = [
        fwd.next().unwrap(),
        fwd.next().unwrap(),
        fwd.next().unwrap(),
        fwd.next().unwrap(),
    ];
    Ok(ReachRelation { n, rows })
}

// CYK cell: bit set over {S, P, N, M} plus whether `T_i` holds for the site
// of the span's last symbol. `T_i` can only hold when the span ends in
// `C_i`, so one flag is enough.
#[derive(Clone, Copy, Default)]
struct Cell {
    mask: u8,
    t: bool,
}

const BIT_S: u8 = 1 << S;
const BIT_P: u8 = 1 << P;
const BIT_N: u8 = 1 << N;
const BIT_M: u8 = 1 << M;

/// CYK membership: is the label string (epsilons deleted) in the language
/// of `start`? Cubic in the string length.
pub fn derives(labels: &[Label], start: NonTerminal) -> bool {
    let word: Vec<Label> = labels
        .iter()
        .copied()
        .filter(|l| *l != Label::Eps)
        .collect();
    let n = word.len();
    if n == 0 {
        return true;
    }
    let width = n + 1;
    let mut table = vec![Cell::default(); width * width];
    let at = |i: usize, j: usize| i * width + j;

    for i in 0..=n {
        table[at(i, i)].mask = BIT_S | BIT_P | BIT_N | BIT_M;
    }

    for len in 1..=n {
        for i in 0..=(n - len) {
            let j = i + len;
            let mut cell = Cell::default();
            // Splits with both halves non-empty.
            for k in (i + 1)..j {
                let l = table[at(i, k)];
                let r = table[at(k, j)];
                if l.mask & BIT_P != 0 && r.mask & BIT_N != 0 {
                    cell.mask |= BIT_S;
                }
                if l.mask & BIT_M != 0 {
                    if r.mask & BIT_P != 0 {
                        cell.mask |= BIT_P;
                    }
                    if r.mask & BIT_N != 0 {
                        cell.mask |= BIT_N;
                    }
                    if r.mask & BIT_M != 0 {
                        cell.mask |= BIT_M;
                    }
                }
                if k == i + 1 {
                    match word[i] {
                        // P -> C_i P
                        Label::Close(_) if r.mask & BIT_P != 0 => cell.mask |= BIT_P,
                        // N -> O_i N
                        Label::Open(_) if r.mask & BIT_N != 0 => cell.mask |= BIT_N,
                        _ => {}
                    }
                    // M -> O_i T_i: r.t means T holds for the site of word[j - 1].
                    if let (Label::Open(a), Label::Close(b)) = (word[i], word[j - 1]) {
                        if a == b && r.t {
                            cell.mask |= BIT_M;
                        }
                    }
                }
                // T_i -> M C_i with a non-empty M.
                if k == j - 1 && l.mask & BIT_M != 0 && matches!(word[k], Label::Close(_)) {
                    cell.t = true;
                }
            }
            if len == 1 {
                match word[i] {
                    // P -> C_i P, T_i -> M C_i, N -> O_i N with the empty side.
                    Label::Close(_) => {
                        cell.mask |= BIT_P;
                        cell.t = true;
                    }
                    Label::Open(_) => cell.mask |= BIT_N,
                    Label::Eps => unreachable!("epsilons were removed"),
                }
            }
            // Splits with an empty half collapse to unit rules.
            if cell.mask & BIT_M != 0 {
                cell.mask |= BIT_P | BIT_N;
            }
            if cell.mask & (BIT_P | BIT_N) != 0 {
                cell.mask |= BIT_S;
            }
            table[at(i, j)] = cell;
        }
    }
    table[at(0, n)].mask & (1 << start.index()) != 0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Step {
    Eps,
    Open,
    Close,
    Summary,
}

/// Visited-set query procedure over `E` and the summary edges: `Query`
/// follows every edge but switches to `Tabulate` after a call edge, and
/// `Tabulate` never follows a return edge.
///
/// The adjacency is built once; [`Tabulation::query`] reuses epoch-stamped
/// visited arrays so repeated queries do not reallocate.
#[derive(Debug, Clone)]
pub struct Tabulation {
    offsets: Vec<usize>,
    targets: Vec<(u32, Step)>,
}

#[derive(Debug, Clone, Default)]
pub struct TabulationScratch {
    epoch: u32,
    seen_query: Vec<u32>,
    seen_tabulate: Vec<u32>,
    stack: Vec<(u32, bool)>,
}

impl Tabulation {
    pub fn new(g: &ProgramValidGraph, summaries: &SummaryEdgeSet) -> Self {
        let n = g.vertex_count();
        let mut per_vertex: Vec<Vec<(u32, Step)>> = vec![Vec::new(); n];
        for e in g.edges() {
            let step = match e.label {
                Label::Eps => Step::Eps,
                Label::Open(_) => Step::Open,
                Label::Close(_) => Step::Close,
            };
            per_vertex[e.src.index()].push((e.dst.0, step));
        }
        for s in summaries.edges() {
            per_vertex[s.source.index()].push((s.target.0, Step::Summary));
        }
        let mut offsets = Vec::with_capacity(n + 1);
        let mut targets = Vec::new();
        offsets.push(0);
        for list in per_vertex {
            targets.extend(list);
            offsets.push(targets.len());
        }
        Tabulation { offsets, targets }
    }

    pub fn vertex_count(&self) -> usize {
        self.offsets.len() - 1
    }

    pub fn scratch(&self) -> TabulationScratch {
        TabulationScratch::default()
    }

    /// Returns whether `t` is context-sensitively reachable from `s`.
    pub fn query(&self, s: VertexId, t: VertexId, scratch: &mut TabulationScratch) -> bool {
        let n = self.vertex_count();
        if scratch.seen_query.len() != n {
            scratch.seen_query = vec![0; n];
            scratch.seen_tabulate = vec![0; n];
            scratch.epoch = 0;
        }
        scratch.epoch = scratch.epoch.wrapping_add(1);
        if scratch.epoch == 0 {
            scratch.seen_query.fill(0);
            scratch.seen_tabulate.fill(0);
            scratch.epoch = 1;
        }
        let epoch = scratch.epoch;
        let stack = &mut scratch.stack;
        stack.clear();
        // (vertex, in Tabulate mode)
        stack.push((s.0, false));
        while let Some((v, tabulating)) = stack.pop() {
            let seen = if tabulating {
                &mut scratch.seen_tabulate
            } else {
                &mut scratch.seen_query
            };
            if seen[v as usize] == epoch {
                continue;
            }
            seen[v as usize] = epoch;
            if v == t.0 {
                return true;
            }
            let adj = &self.targets[self.offsets[v as usize]..self.offsets[v as usize + 1]];
            // Reverse push keeps the pop order equal to the edge order.
            for &(w, step) in adj.iter().rev() {
                match (tabulating, step) {
                    (false, Step::Open) => stack.push((w, true)),
                    (false, _) => stack.push((w, false)),
                    (true, Step::Close) => {}
                    (true, _) => stack.push((w, true)),
                }
            }
        }
        false
    }
}

/// One-shot convenience wrapper around [`Tabulation`].
pub fn tabulation_query(
    g: &ProgramValidGraph,
    summaries: &SummaryEdgeSet,
    s: VertexId,
    t: VertexId,
) -> bool {
    let tab = Tabulation::new(g, summaries);
    let mut scratch = tab.scratch();
    tab.query(s, t, &mut scratch)
}

//! Seeded generator of program-valid graphs for testing and benchmarking.

use std::collections::HashSet;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::{Edge, FunctionId, Label, ProgramValidGraph};

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub functions: usize,
    pub vmin: usize,
    pub vmax: usize,
    /// Eps edges per vertex inside each function.
    pub eps_density: f64,
    /// One site id per call occurrence.
    pub call_sites: usize,
    /// Upper bound on boundary vertices per function.
    pub alpha: u32,
    pub seed: u64,
    /// Allows calls to the same or earlier functions.
    pub allow_recursion: bool,
}

impl Default for GenParams {
    fn default() -> Self {
        GenParams {
            functions: 8,
            vmin: 3,
            vmax: 8,
            eps_density: 1.2,
            call_sites: 12,
            alpha: 2,
            seed: 0,
            allow_recursion: false,
        }
    }
}

/// Probability that a call targets the same or an earlier function when recursion is allowed.
const BACK_EDGE_PROBABILITY: f64 = 0.1;

impl GenParams {
    fn check(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidParams(msg.to_string()));
        if self.vmin == 0 || self.vmin > self.vmax {
            return bad("need 1 <= vmin <= vmax");
        }
        if !self.eps_density.is_finite() || self.eps_density < 0.0 {
            return bad("eps density must be a non-negative number");
        }
        if self.call_sites > 0 {
            if self.alpha == 0 {
                return bad("alpha must be at least 1 when there are call sites");
            }
            if self.functions == 0 {
                return bad("call sites need at least one function");
            }
            if self.functions == 1 && !self.allow_recursion {
                return bad("a single function cannot make calls without recursion");
            }
            if u32::try_from(self.call_sites).is_err() {
                return bad("too many call sites");
            }
        }
        Ok(())
    }
}

pub fn generate(p: &GenParams) -> Result<ProgramValidGraph> {
    p.check()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);

    let mut func_of = Vec::new();
    let mut ranges = Vec::with_capacity(p.functions);
    for f in 0..p.functions {
        let size = rng.random_range(p.vmin..=p.vmax);
        let start = func_of.len() as u32;
        func_of.extend(std::iter::repeat_n(FunctionId(f as u32), size));
        ranges.push(start..start + size as u32);
    }

    // Boundary set per function: every open edge lands in it, every close edge leaves it.
    let boundary: Vec<Vec<u32>> = ranges
        .iter()
        .map(|r| {
            let mut vs: Vec<u32> = r.clone().collect();
            vs.shuffle(&mut rng);
            vs.truncate((p.alpha as usize).min(vs.len()));
            vs.sort_unstable();
            vs
        })
        .collect();

    let mut edges = Vec::new();
    let mut eps_seen: HashSet<(u32, u32)> = HashSet::new();
    for r in &ranges {
        let size = (r.end - r.start) as usize;
        if size < 2 {
            continue;
        }
        let target = (p.eps_density * size as f64).round() as usize;
        let max_pairs = size * (size - 1);
        let mut placed = 0;
        let mut attempts = 0;
        while placed < target.min(max_pairs) && attempts < 20 * target + 20 {
            attempts += 1;
            let a = rng.random_range(r.clone());
            let b = rng.random_range(r.clone());
            if a != b && eps_seen.insert((a, b)) {
                edges.push(Edge::new(a, b, Label::Eps));
                placed += 1;
            }
        }
    }

    // Each call occurrence gets its own call vertex, so sites never outnumber
    // vertices and |summaries| <= |V|. Sites with no free call vertex are skipped.
    let f = p.functions;
    let mut is_call = vec![false; func_of.len()];
    for site in 1..=p.call_sites as u32 {
        let (caller, callee) = pick_call(&mut rng, f, p.allow_recursion);
        let caller_range = ranges[caller].clone();
        let free: Vec<u32> = caller_range
            .clone()
            .filter(|&v| !is_call[v as usize])
            .collect();
        let Some(&call) = free.choose(&mut rng) else {
            continue;
        };
        let ret = rng.random_range(caller_range);
        let b = &boundary[callee];
        let opens = pick_subset(&mut rng, b);
        let closes = pick_subset(&mut rng, b);
        let mut any_open = false;
        for &e in &opens {
            if e != call {
                edges.push(Edge::new(call, e, Label::Open(site)));
                any_open = true;
            }
        }
        if !any_open {
            // Direct recursion where the call vertex is the callee's only entry.
            continue;
        }
        is_call[call as usize] = true;
        for &x in &closes {
            if x != ret {
                edges.push(Edge::new(x, ret, Label::Close(site)));
            }
        }
    }

    ProgramValidGraph::new(func_of, edges, p.alpha, p.call_sites as u32)
}

fn pick_call(rng: &mut ChaCha8Rng, functions: usize, recursion: bool) -> (usize, usize) {
    if functions == 1 {
        return (0, 0);
    }
    let back = recursion && rng.random_bool(BACK_EDGE_PROBABILITY);
    if back {
        let caller = rng.random_range(0..functions);
        (caller, rng.random_range(0..=caller))
    } else {
        let caller = rng.random_range(0..functions - 1);
        (caller, rng.random_range(caller + 1..functions))
    }
}

fn pick_subset(rng: &mut ChaCha8Rng, from: &[u32]) -> Vec<u32> {
    let k = rng.random_range(1..=from.len());
    let mut out: Vec<u32> = from.choose_multiple(rng, k).copied().collect();
    out.sort_unstable();
    out
}

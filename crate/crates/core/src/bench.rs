//! Batched query timing against the tabulation baseline.

use std::collections::HashSet;
use std::fmt::{self, Write as _};
use std::hint::black_box;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cfl::Tabulation;
use crate::error::{Error, Result};
use crate::graph::{ProgramValidGraph, VertexId};
use crate::index::{write_index, IndexConfig, Scheme};
use crate::query::QuerySession;
use crate::summary::compute_summaries;

pub const CSV_HEADER: &str =
    "graph,vertices,edges,summaries,scheme,build_ms,index_bytes,batch,class,n,total_ms,speedup_vs_tabulation";

pub type Pair = (VertexId, VertexId);

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct QueryPairs {
    pub reachable: Vec<Pair>,
    pub unreachable: Vec<Pair>,
}

impl QueryPairs {
    pub fn is_complete(&self, n_reach: usize, n_unreach: usize) -> bool {
        self.reachable.len() == n_reach && self.unreachable.len() == n_unreach
    }
}

/// Uniform sampling of distinct `u != v` pairs, labeled by the session.
///
/// Small graphs are enumerated in shuffled order; larger ones use rejection
/// sampling with an attempt budget. A shortfall is logged, not an error.
pub fn sample_query_pairs(
    session: &QuerySession,
    n_reach: usize,
    n_unreach: usize,
    seed: u64,
) -> QueryPairs {
    let n = session.graph().vertex_count() as u64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut scratch = session.scratch();
    let mut out = QueryPairs::default();
    let wanted = (n_reach + n_unreach) as u64;
    let total_pairs = n.saturating_mul(n.saturating_sub(1));

    let mut offer = |u: u32, v: u32, out: &mut QueryPairs| {
        let (u, v) = (VertexId(u), VertexId(v));
        let r = session
            .cs_query_with(u, v, &mut scratch)
            .expect("sampled vertices are in range");
        if r && out.reachable.len() < n_reach {
            out.reachable.push((u, v));
        } else if !r && out.unreachable.len() < n_unreach {
            out.unreachable.push((u, v));
        }
        out.is_complete(n_reach, n_unreach)
    };

    if total_pairs <= 200_000.max(8 * wanted) && total_pairs <= 50_000_000 {
        let mut all: Vec<(u32, u32)> = (0..n as u32)
            .flat_map(|u| (0..n as u32).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        all.shuffle(&mut rng);
        for (u, v) in all {
            if offer(u, v, &mut out) {
                break;
            }
        }
    } else {
        let budget = 400 * wanted + 100_000;
        let mut seen: HashSet<(u32, u32)> = HashSet::new();
        for _ in 0..budget {
            let u = rng.random_range(0..n as u32);
            let v = rng.random_range(0..n as u32);
            if u == v || !seen.insert((u, v)) {
                continue;
            }
            if offer(u, v, &mut out) {
                break;
            }
        }
    }
    if !out.is_complete(n_reach, n_unreach) {
        log::warn!(
            "query sampling fell short: {}/{} reachable, {}/{} unreachable",
            out.reachable.len(),
            n_reach,
            out.unreachable.len(),
            n_unreach
        );
    }
    out
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub schemes: Vec<Scheme>,
    pub n_reach: usize,
    pub n_unreach: usize,
    pub repeats: usize,
    pub seed: u64,
    /// Also time boolean batches split across all available threads.
    pub parallel: bool,
    /// Also time witness-path batches for schemes that return paths.
    pub paths: bool,
    pub index: IndexConfig,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            schemes: vec![Scheme::Grail],
            n_reach: 1000,
            n_unreach: 1000,
            repeats: 3,
            seed: 0,
            parallel: false,
            paths: false,
            index: IndexConfig::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BatchKind {
    Bool,
    Path,
    BoolParallel,
}

impl fmt::Display for BatchKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BatchKind::Bool => "bool",
            BatchKind::Path => "path",
            BatchKind::BoolParallel => "bool-parallel",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QueryClass {
    Reachable,
    Unreachable,
}

impl fmt::Display for QueryClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QueryClass::Reachable => "R",
            QueryClass::Unreachable => "notR",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BatchTiming {
    pub batch: BatchKind,
    pub class: QueryClass,
    pub n: usize,
    /// Median over repeats.
    pub total: Duration,
    pub speedup_vs_tabulation: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemeRun {
    pub scheme: Scheme,
    pub build: Duration,
    /// Size of the serialized index file.
    pub index_bytes: usize,
    pub batches: Vec<BatchTiming>,
    /// Share of unreachable queries refuted by labels alone (Grail only).
    pub pruned_fraction: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum SchemeOutcome {
    Ran(SchemeRun),
    Failed { scheme: Scheme, reason: String },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchReport {
    pub graph: String,
    pub vertices: usize,
    pub edges: usize,
    pub summaries: usize,
    pub summary_time: Duration,
    pub index_vertices: usize,
    pub index_edges: usize,
    pub pairs: QueryPairs,
    pub tabulation: Vec<BatchTiming>,
    pub schemes: Vec<SchemeOutcome>,
}

impl BenchReport {
    pub fn scheme_run(&self, scheme: Scheme) -> Option<&SchemeRun> {
        self.schemes.iter().find_map(|o| match o {
            SchemeOutcome::Ran(r) if r.scheme == scheme => Some(r),
            _ => None,
        })
    }

    pub fn tabulation_time(&self, class: QueryClass) -> Option<Duration> {
        self.tabulation
            .iter()
            .find(|b| b.class == class)
            .map(|b| b.total)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "{CSV_HEADER}");
        let prefix = format!(
            "{},{},{},{}",
            csv_field(&self.graph),
            self.vertices,
            self.edges,
            self.summaries
        );
        for b in &self.tabulation {
            let _ = writeln!(
                out,
                "{prefix},tabulation,{:.3},0,{},{},{},{:.3},{:.3}",
                ms(self.summary_time),
                b.batch,
                b.class,
                b.n,
                ms(b.total),
                b.speedup_vs_tabulation
            );
        }
        for outcome in &self.schemes {
            if let SchemeOutcome::Ran(run) = outcome {
                for b in &run.batches {
                    let _ = writeln!(
                        out,
                        "{prefix},{},{:.3},{},{},{},{},{:.3},{:.3}",
                        run.scheme,
                        ms(run.build),
                        run.index_bytes,
                        b.batch,
                        b.class,
                        b.n,
                        ms(b.total),
                        b.speedup_vs_tabulation
                    );
                }
            }
        }
        out
    }

    pub fn human_summary(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "graph {}: {} vertices, {} edges, {} summary edges ({:.1} ms)",
            self.graph,
            self.vertices,
            self.edges,
            self.summaries,
            ms(self.summary_time)
        );
        let _ = writeln!(
            out,
            "indexing graph: {} vertices, {} edges",
            self.index_vertices, self.index_edges
        );
        let _ = writeln!(
            out,
            "queries: {} reachable, {} unreachable",
            self.pairs.reachable.len(),
            self.pairs.unreachable.len()
        );
        for b in &self.tabulation {
            let _ = writeln!(
                out,
                "  tabulation {} {}: {:.3} ms",
                b.batch,
                b.class,
                ms(b.total)
            );
        }
        for outcome in &self.schemes {
            match outcome {
                SchemeOutcome::Failed { scheme, reason } => {
                    let _ = writeln!(out, "  {scheme}: not built ({reason})");
                }
                SchemeOutcome::Ran(run) => {
                    let _ = writeln!(
                        out,
                        "  {}: build {:.1} ms, index {} bytes",
                        run.scheme,
                        ms(run.build),
                        run.index_bytes
                    );
                    for b in &run.batches {
                        let _ = writeln!(
                            out,
                            "    {} {}: {:.3} ms ({:.1}x vs tabulation)",
                            b.batch,
                            b.class,
                            ms(b.total),
                            b.speedup_vs_tabulation
                        );
                    }
                    if let Some(p) = run.pruned_fraction {
                        let _ = writeln!(
                            out,
                            "    unreachable queries refuted by labels alone: {:.1}%",
                            100.0 * p
                        );
                    }
                }
            }
        }
        out
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn ms(d: Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn median(mut v: Vec<Duration>) -> Duration {
    v.sort_unstable();
    v[v.len() / 2]
}

fn speedup(baseline: Duration, t: Duration) -> f64 {
    baseline.as_secs_f64() / t.as_secs_f64().max(1e-9)
}

/// Times `run` over `repeats` and returns the median plus the last run's answers.
fn time_batch<F: FnMut(&mut Vec<bool>)>(repeats: usize, mut run: F) -> (Duration, Vec<bool>) {
    let mut times = Vec::with_capacity(repeats.max(1));
    let mut answers = Vec::new();
    for _ in 0..repeats.max(1) {
        answers.clear();
        let t = Instant::now();
        run(&mut answers);
        times.push(t.elapsed());
    }
    (median(times), answers)
}

fn check_answers(answers: &[bool], expected: bool, who: &str) -> Result<()> {
    match answers.iter().position(|&a| a != expected) {
        Some(i) => Err(Error::Internal(format!(
            "{who} answered query #{i} with {}",
            !expected
        ))),
        None => Ok(()),
    }
}

pub fn run_bench(
    graph_name: &str,
    graph: &ProgramValidGraph,
    config: &BenchConfig,
) -> Result<BenchReport> {
    let t = Instant::now();
    let summaries = compute_summaries(graph);
    let summary_time = t.elapsed();
    let tabulation = Tabulation::new(graph, &summaries);

    // Labels come from the first buildable scheme; the report is stats-only without one.
    let mut sessions = Vec::new();
    let mut outcomes = Vec::new();
    for &scheme in &config.schemes {
        let t = Instant::now();
        match QuerySession::build(graph.clone(), scheme, &config.index) {
            Ok(s) => sessions.push((s, t.elapsed())),
            Err(e) if e.is_resource_guard() => outcomes.push(SchemeOutcome::Failed {
                scheme,
                reason: e.to_string(),
            }),
            Err(e) => return Err(e),
        }
    }
    let pairs = match sessions.first() {
        Some((s, _)) => sample_query_pairs(s, config.n_reach, config.n_unreach, config.seed),
        None => QueryPairs::default(),
    };
    let (index_vertices, index_edges) = match sessions.first() {
        Some((s, _)) => s.view().stats(),
        None => (
            2 * graph.vertex_count(),
            crate::indexing::expected_edge_count(graph, &summaries),
        ),
    };

    let classes = [
        (QueryClass::Reachable, &pairs.reachable, true),
        (QueryClass::Unreachable, &pairs.unreachable, false),
    ];

    let mut tab_rows = Vec::new();
    if !sessions.is_empty() {
        let mut ts = tabulation.scratch();
        for (class, batch, expected) in classes {
            let (total, answers) = time_batch(config.repeats, |out| {
                for &(u, v) in batch.iter() {
                    out.push(black_box(tabulation.query(u, v, &mut ts)));
                }
            });
            check_answers(&answers, expected, "tabulation")?;
            tab_rows.push(BatchTiming {
                batch: BatchKind::Bool,
                class,
                n: batch.len(),
                total,
                speedup_vs_tabulation: 1.0,
            });
        }
    }
    let baseline = |class: QueryClass| {
        tab_rows
            .iter()
            .find(|b| b.class == class)
            .map(|b| b.total)
            .unwrap_or_default()
    };

    for (session, build) in &sessions {
        let scheme = session.scheme();
        let mut bytes = Vec::new();
        write_index(&mut bytes, &session.to_index_file())?;
        let mut batches = Vec::new();
        let mut scratch = session.scratch();
        let mut pruned_fraction = None;
        for (class, batch, expected) in classes {
            // Verify labels before timing.
            for &(u, v) in batch.iter() {
                if session.cs_query_with(u, v, &mut scratch)? != expected {
                    return Err(Error::Internal(format!(
                        "{scheme} disagrees with sampled label for {u} {v}"
                    )));
                }
            }
            let (total, answers) = time_batch(config.repeats, |out| {
                for &(u, v) in batch.iter() {
                    out.push(black_box(
                        session
                            .cs_query_with(u, v, &mut scratch)
                            .unwrap_or(!expected),
                    ));
                }
            });
            check_answers(&answers, expected, scheme.name())?;
            batches.push(BatchTiming {
                batch: BatchKind::Bool,
                class,
                n: batch.len(),
                total,
                speedup_vs_tabulation: speedup(baseline(class), total),
            });

            if scheme == Scheme::Grail && class == QueryClass::Unreachable && !batch.is_empty() {
                let mut refuted = 0usize;
                for &(u, v) in batch.iter() {
                    session.cs_query_with(u, v, &mut scratch)?;
                    refuted += usize::from(scratch.last_expansions() == 0);
                }
                pruned_fraction = Some(refuted as f64 / batch.len() as f64);
            }

            if config.paths && session.capabilities().returns_paths {
                let (total, answers) = time_batch(config.repeats, |out| {
                    for &(u, v) in batch.iter() {
                        let p = session.cs_query_path(u, v).ok().flatten();
                        out.push(black_box(p).is_some());
                    }
                });
                check_answers(&answers, expected, scheme.name())?;
                batches.push(BatchTiming {
                    batch: BatchKind::Path,
                    class,
                    n: batch.len(),
                    total,
                    speedup_vs_tabulation: speedup(baseline(class), total),
                });
            }

            if config.parallel {
                let (total, answers) = time_batch(config.repeats, |out| {
                    out.extend(parallel_answers(session, batch));
                });
                check_answers(&answers, expected, scheme.name())?;
                batches.push(BatchTiming {
                    batch: BatchKind::BoolParallel,
                    class,
                    n: batch.len(),
                    total,
                    speedup_vs_tabulation: speedup(baseline(class), total),
                });
            }
        }
        outcomes.push(SchemeOutcome::Ran(SchemeRun {
            scheme,
            build: *build,
            index_bytes: bytes.len(),
            batches,
            pruned_fraction,
        }));
    }
    outcomes.sort_by_key(|o| match o {
        SchemeOutcome::Ran(r) => r.scheme,
        SchemeOutcome::Failed { scheme, .. } => *scheme,
    });

    Ok(BenchReport {
        graph: graph_name.to_string(),
        vertices: graph.vertex_count(),
        edges: graph.edge_count(),
        summaries: summaries.len(),
        summary_time,
        index_vertices,
        index_edges,
        pairs,
        tabulation: tab_rows,
        schemes: outcomes,
    })
}

fn parallel_answers(session: &QuerySession, batch: &[Pair]) -> Vec<bool> {
    let threads = std::thread::available_parallelism().map_or(1, |n| n.get());
    let chunk = batch.len().div_ceil(threads).max(1);
    std::thread::scope(|scope| {
        let handles: Vec<_> = batch
            .chunks(chunk)
            .map(|part| {
                scope.spawn(move || {
                    let mut scratch = session.scratch();
                    part.iter()
                        .map(|&(u, v)| session.cs_query_with(u, v, &mut scratch).unwrap_or(false))
                        .collect::<Vec<bool>>()
                })
            })
            .collect();
        handles
            .into_iter()
            .flat_map(|h| h.join().expect("query thread panicked"))
            .collect()
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gen::{generate, GenParams};
    use crate::graph::{Edge, FunctionId, Label};

    #[test]
    fn empty_scheme_list_gives_stats_only() {
        let g = generate(&GenParams::default()).unwrap();
        let r = run_bench(
            "g",
            &g,
            &BenchConfig {
                schemes: vec![],
                ..BenchConfig::default()
            },
        )
        .unwrap();
        assert!(r.schemes.is_empty() && r.tabulation.is_empty());
        assert_eq!(r.to_csv().lines().count(), 1);
        assert_eq!(r.vertices, g.vertex_count());
    }

    #[test]
    fn all_reachable_graph_reports_shortfall() {
        let g = ProgramValidGraph::new(
            vec![FunctionId(0); 2],
            vec![Edge::new(0, 1, Label::Eps), Edge::new(1, 0, Label::Eps)],
            0,
            0,
        )
        .unwrap();
        let s = QuerySession::build(g, Scheme::Grail, &IndexConfig::default()).unwrap();
        let pairs = sample_query_pairs(&s, 2, 3, 1);
        assert_eq!(pairs.reachable.len(), 2);
        assert!(pairs.unreachable.is_empty());
        assert!(!pairs.is_complete(2, 3));
    }

    #[test]
    fn guard_failure_is_recorded_and_run_continues() {
        let g = generate(&GenParams::default()).unwrap();
        let config = BenchConfig {
            schemes: vec![Scheme::Tc, Scheme::Grail],
            n_reach: 5,
            n_unreach: 5,
            repeats: 1,
            index: IndexConfig {
                tc_max_components: 1,
                ..IndexConfig::default()
            },
            ..BenchConfig::default()
        };
        let r = run_bench("g", &g, &config).unwrap();
        assert!(matches!(
            r.schemes[0],
            SchemeOutcome::Failed {
                scheme: Scheme::Tc,
                ..
            }
        ));
        assert!(r.scheme_run(Scheme::Grail).is_some());
    }

    #[test]
    fn non_timing_columns_are_deterministic() {
        let g = generate(&GenParams {
            seed: 3,
            functions: 20,
            ..GenParams::default()
        })
        .unwrap();
        let config = BenchConfig {
            schemes: Scheme::ALL.to_vec(),
            n_reach: 20,
            n_unreach: 20,
            repeats: 3,
            paths: true,
            parallel: true,
            seed: 5,
            ..BenchConfig::default()
        };
        let strip = |csv: String| -> Vec<String> {
            csv.lines()
                .map(|l| {
                    let f: Vec<&str> = l.split(',').collect();
                    [f[0], f[1], f[2], f[3], f[4], f[6], f[7], f[8], f[9]].join(",")
                })
                .collect()
        };
        let a = run_bench("g", &g, &config).unwrap();
        let b = run_bench("g", &g, &config).unwrap();
        assert_eq!(a.pairs, b.pairs);
        assert_eq!(strip(a.to_csv()), strip(b.to_csv()));
        assert_eq!(a.to_csv().lines().next().unwrap(), CSV_HEADER);
    }
}

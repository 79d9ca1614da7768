use std::fs::File;
use std::io::{self, BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Args, CommandFactory, FromArgMatches, Parser, Subcommand};
use csreach::bench::{run_bench, BenchConfig};
use csreach::cfl::{cfl_closure, NonTerminal, OracleConfig, DEFAULT_ORACLE_LIMIT};
use csreach::gen::{generate, GenParams};
use csreach::graph::{parse_graph, validate, write_graph, FORMAT_VERSION};
use csreach::index::{read_index, write_index, IndexFile, INDEX_FORMAT_VERSION};
use csreach::indexing::export_dot;
use csreach::summary::write_summaries;
use csreach::{
    compute_summaries, IndexConfig, IndexingGraphView, ProgramValidGraph, QuerySession, Scheme,
    VertexId,
};

/// Context-sensitive reachability over program-valid graphs.
///
/// Graph and pair arguments accept `-` for standard input.
#[derive(Debug, Parser)]
#[command(name = "csreach")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a random program-valid graph and print it.
    Gen(GenArgs),
    /// Check the structural rules of a graph and print a report.
    Validate { graph: PathBuf },
    /// Print the summary edges of a graph as `source target site` lines.
    Summarize { graph: PathBuf },
    /// Print the indexing graph in Graphviz dot syntax.
    ExportDot { graph: PathBuf },
    /// Print every CS-reachable pair `u v` computed by grammar saturation (small graphs only).
    Oracle {
        graph: PathBuf,
        /// Refuse graphs with more vertices than this.
        #[arg(long, default_value_t = DEFAULT_ORACLE_LIMIT)]
        limit: usize,
    },
    /// Build a reachability index and write it to a file.
    Build {
        graph: PathBuf,
        #[command(flatten)]
        index: IndexArgs,
        /// Output file for the index.
        #[arg(long, short)]
        out: PathBuf,
    },
    /// Answer `u v` queries, one per line, printing `u v 0|1`.
    Query(QueryArgs),
    /// Time query batches against the tabulation baseline.
    Bench(BenchArgs),
}

#[derive(Debug, Args)]
struct GenArgs {
    #[arg(long, default_value_t = 8)]
    functions: usize,
    /// Minimum vertices per function.
    #[arg(long, default_value_t = 3)]
    vmin: usize,
    /// Maximum vertices per function.
    #[arg(long, default_value_t = 8)]
    vmax: usize,
    /// Eps edges per vertex inside a function.
    #[arg(long, default_value_t = 1.2)]
    density: f64,
    /// Number of call sites.
    #[arg(long, default_value_t = 12)]
    sites: usize,
    /// Maximum boundary vertices per function.
    #[arg(long, default_value_t = 2)]
    alpha: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Allow recursive calls.
    #[arg(long)]
    recursion: bool,
}

#[derive(Debug, Args)]
struct IndexArgs {
    /// Reachability index: tc, dual or grail.
    #[arg(long, default_value = "grail")]
    scheme: Scheme,
    /// Number of Grail labelings.
    #[arg(long, default_value_t = csreach::index::DEFAULT_GRAIL_LABELS)]
    k: usize,
    /// Seed for randomized labelings.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Largest component count accepted by tc.
    #[arg(long, default_value_t = csreach::index::DEFAULT_TC_LIMIT)]
    tc_limit: usize,
    /// Largest non-tree edge count accepted by dual.
    #[arg(long, default_value_t = csreach::index::DEFAULT_DUAL_LIMIT)]
    dual_limit: usize,
}

impl IndexArgs {
    fn config(&self) -> IndexConfig {
        IndexConfig {
            tc_max_components: self.tc_limit,
            dual_max_non_tree: self.dual_limit,
            grail_labels: self.k,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
struct QueryArgs {
    graph: PathBuf,
    /// Prebuilt index; otherwise one is built in memory.
    #[arg(long, conflicts_with = "scheme")]
    index: Option<PathBuf>,
    #[command(flatten)]
    build: IndexArgs,
    /// File of `u v` lines.
    #[arg(long)]
    pairs: PathBuf,
    /// Append a witness path to every reachable answer (grail only).
    #[arg(long)]
    paths: bool,
}

#[derive(Debug, Args)]
struct BenchArgs {
    graph: PathBuf,
    /// Comma-separated schemes to compare.
    #[arg(long, value_delimiter = ',', default_value = "grail")]
    schemes: Vec<Scheme>,
    /// Reachable queries per batch.
    #[arg(long, default_value_t = 1000)]
    reach: usize,
    /// Unreachable queries per batch.
    #[arg(long, default_value_t = 1000)]
    unreach: usize,
    #[arg(long, default_value_t = 3)]
    repeats: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = csreach::index::DEFAULT_GRAIL_LABELS)]
    k: usize,
    /// Also time boolean batches across all cores.
    #[arg(long)]
    parallel: bool,
    /// Also time witness-path batches.
    #[arg(long)]
    paths: bool,
    /// Print CSV instead of the human summary.
    #[arg(long)]
    csv: bool,
}

fn read_input(path: &Path) -> anyhow::Result<String> {
    let mut text = String::new();
    if path == Path::new("-") {
        io::stdin()
            .read_to_string(&mut text)
            .context("reading standard input")?;
    } else {
        text =
            std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    }
    Ok(text)
}

fn load_graph(path: &Path) -> anyhow::Result<ProgramValidGraph> {
    let text = read_input(path)?;
    parse_graph(&text).with_context(|| format!("parsing {}", path.display()))
}

fn parse_pairs(text: &str) -> anyhow::Result<Vec<(VertexId, VertexId)>> {
    let mut pairs = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut it = line.split_whitespace().map(str::parse::<u32>);
        match (it.next(), it.next(), it.next()) {
            (Some(Ok(u)), Some(Ok(v)), None) => pairs.push((VertexId(u), VertexId(v))),
            _ => bail!(csreach::Error::Parse {
                line: i + 1,
                reason: format!("expected `u v`, found `{line}`"),
            }),
        }
    }
    Ok(pairs)
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Gen(a) => {
            let g = generate(&GenParams {
                functions: a.functions,
                vmin: a.vmin,
                vmax: a.vmax,
                eps_density: a.density,
                call_sites: a.sites,
                alpha: a.alpha,
                seed: a.seed,
                allow_recursion: a.recursion,
            })?;
            out.write_all(write_graph(&g).as_bytes())?;
        }
        Command::Validate { graph } => {
            let g = load_graph(&graph)?;
            let report = validate(&g);
            write!(out, "{report}")?;
            out.flush()?;
            if !report.ok {
                bail!(csreach::Error::Structure(format!(
                    "{} rule violation(s) in {}",
                    report.violations.len(),
                    graph.display()
                )));
            }
        }
        Command::Summarize { graph } => {
            let g = load_graph(&graph)?;
            out.write_all(write_summaries(&compute_summaries(&g)).as_bytes())?;
        }
        Command::ExportDot { graph } => {
            let g = load_graph(&graph)?;
            let view = IndexingGraphView::new(&g, &compute_summaries(&g));
            out.write_all(export_dot(&view).as_bytes())?;
        }
        Command::Oracle { graph, limit } => {
            let g = load_graph(&graph)?;
            let rel = cfl_closure(
                &g,
                &OracleConfig {
                    max_vertices: limit,
                },
            )?;
            for (u, v) in rel.pairs(NonTerminal::S) {
                writeln!(out, "{u} {v}")?;
            }
        }
        Command::Build {
            graph,
            index,
            out: path,
        } => {
            let g = load_graph(&graph)?;
            let session = QuerySession::build(g, index.scheme, &index.config())?;
            let file =
                File::create(&path).with_context(|| format!("creating {}", path.display()))?;
            write_index(BufWriter::new(file), &session.to_index_file())?;
            let (nv, ne) = session.view().stats();
            log::info!(
                "{} index over {} components ({} index vertices, {} index edges) written to {}",
                index.scheme,
                session.condensed().component_count(),
                nv,
                ne,
                path.display()
            );
        }
        Command::Query(a) => {
            if a.graph == Path::new("-") && a.pairs == Path::new("-") {
                bail!(csreach::Error::InvalidParams(
                    "graph and pairs cannot both come from stdin".into()
                ));
            }
            let g = load_graph(&a.graph)?;
            let session = match &a.index {
                Some(path) => {
                    let file =
                        File::open(path).with_context(|| format!("opening {}", path.display()))?;
                    let loaded: IndexFile = read_index(BufReader::new(file), None)?;
                    QuerySession::from_index_file(g, loaded)?
                }
                None => QuerySession::build(g, a.build.scheme, &a.build.config())?,
            };
            if a.paths && !session.capabilities().returns_paths {
                bail!(csreach::Error::SchemeLacksPaths(
                    session.capabilities().name
                ));
            }
            let pairs = parse_pairs(&read_input(&a.pairs)?)
                .with_context(|| format!("parsing {}", a.pairs.display()))?;
            let mut scratch = session.scratch();
            for (u, v) in pairs {
                if a.paths {
                    match session.cs_query_path(u, v)? {
                        Some(p) => writeln!(out, "{u} {v} 1 {p}")?,
                        None => writeln!(out, "{u} {v} 0")?,
                    }
                } else {
                    let r = session.cs_query_with(u, v, &mut scratch)?;
                    writeln!(out, "{u} {v} {}", u8::from(r))?;
                }
            }
        }
        Command::Bench(a) => {
            let g = load_graph(&a.graph)?;
            let name = a
                .graph
                .file_stem()
                .map_or("stdin".into(), |s| s.to_string_lossy().into_owned());
            let report = run_bench(
                &name,
                &g,
                &BenchConfig {
                    schemes: a.schemes,
                    n_reach: a.reach,
                    n_unreach: a.unreach,
                    repeats: a.repeats,
                    seed: a.seed,
                    parallel: a.parallel,
                    paths: a.paths,
                    index: IndexConfig {
                        grail_labels: a.k,
                        seed: a.seed,
                        ..IndexConfig::default()
                    },
                },
            )?;
            let text = if a.csv {
                report.to_csv()
            } else {
                report.human_summary()
            };
            out.write_all(text.as_bytes())?;
        }
    }
    out.flush()?;
    Ok(())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    match err.chain().find_map(|e| e.downcast_ref::<csreach::Error>()) {
        Some(e) if e.is_resource_guard() => 3,
        _ => 2,
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let version = format!(
        "{} (graph format {FORMAT_VERSION}, index format {INDEX_FORMAT_VERSION})",
        env!("CARGO_PKG_VERSION")
    );
    let command = Cli::command().version(version);
    let cli = match command
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            if e.chain().any(|c| {
                c.downcast_ref::<io::Error>()
                    .is_some_and(|io| io.kind() == io::ErrorKind::BrokenPipe)
            }) {
                return ExitCode::SUCCESS;
            }
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}

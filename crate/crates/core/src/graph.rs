//! Program-valid graphs: edge-labelled directed multigraphs partitioned into
//! functions, with call (`open`) and return (`close`) edges tagged by call site.
//!
//! A graph is validated structurally when it is constructed and is immutable
//! afterwards. The looser program-validity rules (intra-function epsilon edges,
//! the per-function boundary bound) are checked separately by [`validate`] so a
//! caller can inspect every violation instead of stopping at the first one.

use std::collections::BTreeMap;
use std::fmt;
use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Dense 0-based vertex identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct VertexId(pub u32);

impl VertexId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl From<u32> for VertexId {
    fn from(v: u32) -> Self {
        VertexId(v)
    }
}

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct FunctionId(pub u32);

impl fmt::Display for FunctionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Edge label. Call sites are numbered `1..=k`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    Eps,
    Open(u32),
    Close(u32),
}

impl Label {
    pub fn site(self) -> Option<u32> {
        match self {
            Label::Eps => None,
            Label::Open(s) | Label::Close(s) => Some(s),
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Eps => write!(f, "eps"),
            Label::Open(s) => write!(f, "open {s}"),
            Label::Close(s) => write!(f, "close {s}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge {
    pub src: VertexId,
    pub dst: VertexId,
    pub label: Label,
}

impl Edge {
    pub fn new(src: u32, dst: u32, label: Label) -> Self {
        Edge {
            src: VertexId(src),
            dst: VertexId(dst),
            label,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProgramValidGraph {
    func_of: Vec<FunctionId>,
    /// Sorted by `(src, dst, label)`.
    edges: Vec<Edge>,
    /// `edges[out_offsets[v]..out_offsets[v + 1]]` are the out-edges of `v`.
    out_offsets: Vec<usize>,
    declared_alpha: u32,
    declared_k: u32,
}

impl ProgramValidGraph {
    /// Builds a graph, rejecting structurally malformed input: ids out of
    /// range, site ids outside `1..=k`, duplicated `(src, dst, label)` edges
    /// and non-epsilon self-loops.
    pub fn new(
        func_of: Vec<FunctionId>,
        mut edges: Vec<Edge>,
        declared_alpha: u32,
        declared_k: u32,
    ) -> Result<Self> {
        let n = func_of.len();
        if n > u32::MAX as usize {
            return Err(Error::Structure("too many vertices".into()));
        }
        for e in &edges {
            check_edge(e, n, declared_k).map_err(Error::Structure)?;
        }
        edges.sort_unstable();
        if let Some(w) = edges.windows(2).find(|w| w[0] == w[1]) {
            return Err(Error::Structure(format!(
                "duplicate edge {} {} {}",
                w[0].src, w[0].dst, w[0].label
            )));
        }
        let mut out_offsets = vec![0usize; n + 1];
        for e in &edges {
            out_offsets[e.src.index() + 1] += 1;
        }
        for v in 0..n {
            out_offsets[v + 1] += out_offsets[v];
        }
        Ok(ProgramValidGraph {
            func_of,
            edges,
            out_offsets,
            declared_alpha,
            declared_k,
        })
    }

    pub fn empty() -> Self {
        ProgramValidGraph::new(Vec::new(), Vec::new(), 0, 0).expect("empty graph is well formed")
    }

    #[inline]
    pub fn vertex_count(&self) -> usize {
        self.func_of.len()
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        (0..self.vertex_count() as u32).map(VertexId)
    }

    /// All edges in canonical order.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    #[inline]
    pub fn out_edges(&self, v: VertexId) -> &[Edge] {
        let i = v.index();
        &self.edges[self.out_offsets[i]..self.out_offsets[i + 1]]
    }

    #[inline]
    pub fn function_of(&self, v: VertexId) -> FunctionId {
        self.func_of[v.index()]
    }

    pub fn declared_alpha(&self) -> u32 {
        self.declared_alpha
    }

    pub fn declared_k(&self) -> u32 {
        self.declared_k
    }

    pub fn contains_vertex(&self, v: VertexId) -> bool {
        v.index() < self.vertex_count()
    }

    pub fn has_edge(&self, src: VertexId, dst: VertexId, label: Label) -> bool {
        self.contains_vertex(src)
            && self
                .out_edges(src)
                .binary_search(&Edge { src, dst, label })
                .is_ok()
    }

    pub fn check_vertex(&self, v: VertexId) -> Result<()> {
        if self.contains_vertex(v) {
            Ok(())
        } else {
            Err(Error::VertexOutOfRange(v))
        }
    }
}

fn check_edge(e: &Edge, n: usize, k: u32) -> std::result::Result<(), String> {
    if e.src.index() >= n || e.dst.index() >= n {
        return Err(format!(
            "edge {} {} references a vertex >= {n}",
            e.src, e.dst
        ));
    }
    if let Some(site) = e.label.site() {
        if site == 0 || site > k {
            return Err(format!("call site {site} outside 1..={k}"));
        }
        if e.src == e.dst {
            return Err(format!("self-loop on {} must be labelled eps", e.src));
        }
    }
    Ok(())
}

/// Edges split by label class.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct EdgeSets {
    pub eps: Vec<Edge>,
    pub open: Vec<Edge>,
    pub close: Vec<Edge>,
}

pub fn edge_sets(g: &ProgramValidGraph) -> EdgeSets {
    let mut sets = EdgeSets::default();
    for &e in g.edges() {
        match e.label {
            Label::Eps => sets.eps.push(e),
            Label::Open(_) => sets.open.push(e),
            Label::Close(_) => sets.close.push(e),
        }
    }
    sets
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    /// An epsilon edge joins two different functions.
    CrossFunctionEps,
    /// A function has more boundary vertices than the declared alpha.
    AlphaExceeded,
}

impl Rule {
    pub fn id(self) -> &'static str {
        match self {
            Rule::CrossFunctionEps => "eps-cross-function",
            Rule::AlphaExceeded => "alpha-exceeded",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Offender {
    Edge(Edge),
    Function(FunctionId),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Violation {
    pub rule: Rule,
    pub message: String,
    pub offender: Offender,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ValidationReport {
    pub ok: bool,
    pub violations: Vec<Violation>,
    pub measured_alpha: u32,
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "ok {}", self.ok)?;
        writeln!(f, "measured_alpha {}", self.measured_alpha)?;
        for v in &self.violations {
            writeln!(f, "violation {} {}", v.rule.id(), v.message)?;
        }
        Ok(())
    }
}

/// A vertex is a boundary vertex of its function when it has an incoming
/// open edge or an outgoing close edge.
pub fn boundary_vertices(g: &ProgramValidGraph) -> Vec<bool> {
    let mut boundary = vec![false; g.vertex_count()];
    for e in g.edges() {
        match e.label {
            Label::Open(_) => boundary[e.dst.index()] = true,
            Label::Close(_) => boundary[e.src.index()] = true,
            Label::Eps => {}
        }
    }
    boundary
}

pub fn validate(g: &ProgramValidGraph) -> ValidationReport {
    let mut violations = Vec::new();
    for &e in g.edges() {
        if e.label == Label::Eps && g.function_of(e.src) != g.function_of(e.dst) {
            violations.push(Violation {
                rule: Rule::CrossFunctionEps,
                message: format!(
                    "eps edge {} -> {} joins functions {} and {}",
                    e.src,
                    e.dst,
                    g.function_of(e.src),
                    g.function_of(e.dst)
                ),
                offender: Offender::Edge(e),
            });
        }
    }

    let boundary = boundary_vertices(g);
    let mut per_function: BTreeMap<FunctionId, u32> = BTreeMap::new();
    for v in g.vertices() {
        if boundary[v.index()] {
            *per_function.entry(g.function_of(v)).or_default() += 1;
        }
    }
    let measured_alpha = per_function.values().copied().max().unwrap_or(0);
    for (&f, &count) in &per_function {
        if count > g.declared_alpha() {
            violations.push(Violation {
                rule: Rule::AlphaExceeded,
                message: format!(
                    "function {f} has {count} boundary vertices, declared alpha is {}",
                    g.declared_alpha()
                ),
                offender: Offender::Function(f),
            });
        }
    }

    ValidationReport {
        ok: violations.is_empty(),
        violations,
        measured_alpha,
    }
}

pub const FORMAT_MAGIC: &str = "pvg";
pub const FORMAT_VERSION: u32 = 1;

/// Canonical text form: header, `func` lines by vertex, edges sorted by
/// `(src, dst, label)`.
pub fn write_graph(g: &ProgramValidGraph) -> String {
    let mut out = String::with_capacity(32 * (g.vertex_count() + g.edge_count()) + 64);
    let _ = writeln!(out, "{FORMAT_MAGIC} {FORMAT_VERSION}");
    let _ = writeln!(out, "vertices {}", g.vertex_count());
    let _ = writeln!(out, "k {}", g.declared_k());
    let _ = writeln!(out, "alpha {}", g.declared_alpha());
    for v in g.vertices() {
        let _ = writeln!(out, "func {} {}", v, g.function_of(v));
    }
    for e in g.edges() {
        let _ = writeln!(out, "edge {} {} {}", e.src, e.dst, e.label);
    }
    out
}

pub fn parse_graph(text: &str) -> Result<ProgramValidGraph> {
    let mut magic_seen = false;
    let mut vertices: Option<usize> = None;
    let mut k: Option<u32> = None;
    let mut alpha: Option<u32> = None;
    let mut func_of: Vec<Option<FunctionId>> = Vec::new();
    let mut edges = Vec::new();
    let mut seen_edges = std::collections::HashSet::new();
    let mut last_line = 0;

    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        last_line = line;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |reason: String| Error::Parse { line, reason };
        let toks: Vec<&str> = content.split_whitespace().collect();

        if !magic_seen {
            if toks.len() == 2 && toks[0] == FORMAT_MAGIC {
                let version: u32 = parse_num(toks[1]).map_err(err)?;
                if version != FORMAT_VERSION {
                    return Err(Error::Parse {
                        line,
                        reason: format!("unsupported format version {version}"),
                    });
                }
                magic_seen = true;
                continue;
            }
            return Err(err(format!(
                "expected `{FORMAT_MAGIC} {FORMAT_VERSION}` header"
            )));
        }

        match toks[0] {
            "vertices" | "k" | "alpha" => {
                if toks.len() != 2 {
                    return Err(err(format!("`{}` takes one integer", toks[0])));
                }
                let value: u64 = parse_num(toks[1]).map_err(err)?;
                let slot_taken = match toks[0] {
                    "vertices" => vertices.is_some(),
                    "k" => k.is_some(),
                    _ => alpha.is_some(),
                };
                if slot_taken {
                    return Err(err(format!("duplicate `{}` line", toks[0])));
                }
                let small =
                    u32::try_from(value).map_err(|_| err(format!("{value} is too large")))?;
                match toks[0] {
                    "vertices" => {
                        vertices = Some(small as usize);
                        func_of = vec![None; small as usize];
                    }
                    "k" => k = Some(small),
                    _ => alpha = Some(small),
                }
            }
            "func" => {
                let n = vertices.ok_or_else(|| err("`func` before `vertices`".into()))?;
                if toks.len() != 3 {
                    return Err(err("expected `func <vid> <fid>`".into()));
                }
                let v: u32 = parse_num(toks[1]).map_err(err)?;
                let f: u32 = parse_num(toks[2]).map_err(err)?;
                if v as usize >= n {
                    return Err(err(format!("vertex {v} out of range (vertices {n})")));
                }
                if func_of[v as usize].replace(FunctionId(f)).is_some() {
                    return Err(err(format!("vertex {v} assigned twice")));
                }
            }
            "edge" => {
                let n = vertices.ok_or_else(|| err("`edge` before `vertices`".into()))?;
                let k = k.ok_or_else(|| err("`edge` before `k`".into()))?;
                if toks.len() < 4 {
                    return Err(err(
                        "expected `edge <src> <dst> eps|open <site>|close <site>`".into(),
                    ));
                }
                let src: u32 = parse_num(toks[1]).map_err(err)?;
                let dst: u32 = parse_num(toks[2]).map_err(err)?;
                let label = match (toks[3], toks.len()) {
                    ("eps", 4) => Label::Eps,
                    ("open", 5) => Label::Open(parse_num(toks[4]).map_err(err)?),
                    ("close", 5) => Label::Close(parse_num(toks[4]).map_err(err)?),
                    _ => return Err(err(format!("bad edge label `{}`", toks[3..].join(" ")))),
                };
                let edge = Edge::new(src, dst, label);
                check_edge(&edge, n, k).map_err(err)?;
                if !seen_edges.insert(edge) {
                    return Err(err("duplicate edge".into()));
                }
                edges.push(edge);
            }
            other => return Err(err(format!("unknown directive `{other}`"))),
        }
    }

    let eof = last_line + 1;
    if !magic_seen {
        return Err(Error::Parse {
            line: eof,
            reason: "missing header".into(),
        });
    }
    let missing = |what: &str| Error::Parse {
        line: eof,
        reason: format!("missing `{what}` line"),
    };
    vertices.ok_or_else(|| missing("vertices"))?;
    let k = k.ok_or_else(|| missing("k"))?;
    let alpha = alpha.ok_or_else(|| missing("alpha"))?;
    let func_of = func_of
        .into_iter()
        .enumerate()
        .map(|(v, f)| {
            f.ok_or_else(|| Error::Parse {
                line: eof,
                reason: format!("vertex {v} has no `func` line"),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ProgramValidGraph::new(func_of, edges, alpha, k)
}

fn parse_num<T: std::str::FromStr>(tok: &str) -> std::result::Result<T, String> {
    tok.parse()
        .map_err(|_| format!("`{tok}` is not a valid non-negative integer"))
}

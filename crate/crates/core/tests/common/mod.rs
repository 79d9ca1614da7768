#![allow(dead_code)]

use std::collections::VecDeque;
use std::path::Path;

use csreach::graph::parse_graph;
use csreach::index::{Dag, TraversalOrder};
use csreach::ProgramValidGraph;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture(name: &str) -> ProgramValidGraph {
    let path = Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name);
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    parse_graph(&text).unwrap()
}

/// Vertex id of a letter-named fixture vertex (`a` is 0).
pub fn v(name: char) -> csreach::VertexId {
    csreach::VertexId(name as u32 - 'a' as u32)
}

// Dual-labeling example DAG, nodes A..I as 0..8.
pub const DUAL_NAMES: [char; 9] = ['A', 'B', 'C', 'D', 'E', 'F', 'G', 'H', 'I'];

pub fn dual_example_dag() -> Dag {
    let id = |c: char| c as u32 - 'A' as u32;
    let edges = [
        ('F', 'B'),
        ('F', 'E'),
        ('B', 'A'),
        ('E', 'D'),
        ('D', 'C'),
        ('D', 'A'),
        ('I', 'H'),
        ('H', 'G'),
        ('I', 'E'),
    ];
    Dag::from_edges(9, &edges.map(|(a, b)| (id(a), id(b)))).unwrap()
}

pub fn dual_node(c: char) -> u32 {
    c as u32 - 'A' as u32
}

// Grail example DAG.
pub const GRAIL_NAMES: [&str; 8] = ["h", "j", "w", "x", "y", "p", "q", "s"];

pub fn grail_node(name: &str) -> u32 {
    GRAIL_NAMES.iter().position(|n| *n == name).unwrap() as u32
}

pub fn grail_example_dag() -> Dag {
    let edges = [
        ("j", "x"),
        ("j", "y"),
        ("h", "x"),
        ("h", "p"),
        ("w", "p"),
        ("w", "q"),
        ("w", "s"),
    ];
    Dag::from_edges(8, &edges.map(|(a, b)| (grail_node(a), grail_node(b)))).unwrap()
}

/// The two recorded traversals of the example.
pub fn grail_example_orders() -> [TraversalOrder; 2] {
    let n = |s: &str| grail_node(s);
    let order = |roots: [&str; 3], kids: [(&str, Vec<&str>); 3]| {
        let mut children = vec![Vec::new(); 8];
        for (parent, list) in kids {
            children[n(parent) as usize] = list.into_iter().map(n).collect();
        }
        TraversalOrder {
            roots: roots.map(n).to_vec(),
            children,
        }
    };
    [
        order(
            ["j", "w", "h"],
            [
                ("j", vec!["x", "y"]),
                ("w", vec!["p", "q", "s"]),
                ("h", vec!["x", "p"]),
            ],
        ),
        order(
            ["h", "j", "w"],
            [
                ("h", vec!["x", "p"]),
                ("j", vec!["y", "x"]),
                ("w", vec!["p", "q", "s"]),
            ],
        ),
    ]
}

/// Random DAG with shuffled node ids so topological order differs from id order.
pub fn random_dag(seed: u64, max_nodes: usize) -> Dag {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = rng.random_range(1..=max_nodes);
    let density = rng.random_range(0.5..3.0);
    let mut perm: Vec<u32> = (0..n as u32).collect();
    perm.shuffle(&mut rng);
    let m = (density * n as f64) as usize;
    let mut edges = Vec::with_capacity(m);
    for _ in 0..m {
        let a = rng.random_range(0..n);
        let b = rng.random_range(0..n);
        if a < b {
            edges.push((perm[a], perm[b]));
        }
    }
    Dag::from_edges(n, &edges).unwrap()
}

/// Reachability by BFS, one row per source.
pub fn bfs_closure(dag: &Dag) -> Vec<Vec<bool>> {
    let n = dag.node_count();
    (0..n as u32)
        .map(|s| {
            let mut seen = vec![false; n];
            seen[s as usize] = true;
            let mut q = VecDeque::from([s]);
            while let Some(x) = q.pop_front() {
                for &c in dag.children(x) {
                    if !seen[c as usize] {
                        seen[c as usize] = true;
                        q.push_back(c);
                    }
                }
            }
            seen
        })
        .collect()
}

use std::collections::BTreeSet;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::{Command, Output, Stdio};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_csreach"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn run_with_stdin(args: &[&str], input: &str) -> Output {
    let mut child = bin()
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .unwrap();
    child
        .stdin
        .take()
        .unwrap()
        .write_all(input.as_bytes())
        .unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../core/tests/fixtures")
        .join(name)
}

fn gen_to(dir: &Path, seed: &str) -> PathBuf {
    let o = run(&[
        "gen",
        "--functions",
        "6",
        "--vmin",
        "3",
        "--vmax",
        "8",
        "--sites",
        "10",
        "--recursion",
        "--seed",
        seed,
    ]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.join(format!("g{seed}.pvg"));
    std::fs::write(&path, &o.stdout).unwrap();
    path
}

#[test]
fn gen_build_query_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    for seed in ["1", "2", "3"] {
        let graph = gen_to(dir.path(), seed);
        let g = graph.to_str().unwrap();
        let idx = dir.path().join("g.idx");
        let o = run(&[
            "build",
            g,
            "--scheme",
            "grail",
            "--seed",
            seed,
            "--out",
            idx.to_str().unwrap(),
        ]);
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );

        let text = std::fs::read_to_string(&graph).unwrap();
        let n: u32 = text
            .lines()
            .find_map(|l| l.strip_prefix("vertices "))
            .unwrap()
            .trim()
            .parse()
            .unwrap();
        let pairs: String = (0..n)
            .flat_map(|u| (0..n).map(move |v| format!("{u} {v}\n")))
            .collect();
        let o = run_with_stdin(
            &["query", g, "--index", idx.to_str().unwrap(), "--pairs", "-"],
            &pairs,
        );
        assert_eq!(
            o.status.code(),
            Some(0),
            "{}",
            String::from_utf8_lossy(&o.stderr)
        );
        let answered: BTreeSet<String> = stdout(&o)
            .lines()
            .filter_map(|l| l.strip_suffix(" 1").map(str::to_string))
            .collect();
        assert_eq!(stdout(&o).lines().count(), (n * n) as usize);

        let o = run(&["oracle", g]);
        assert_eq!(o.status.code(), Some(0));
        let oracle: BTreeSet<String> = stdout(&o).lines().map(str::to_string).collect();
        assert_eq!(answered, oracle, "seed {seed}");
    }
}

#[test]
fn witness_paths_for_running_example() {
    let g = fixture("running_example.pvg");
    let o = run_with_stdin(
        &["query", g.to_str().unwrap(), "--pairs", "-", "--paths"],
        "0 5\n6 5\n",
    );
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "0 5 1 0 1 2 3 4 5\n6 5 0\n");
}

#[test]
fn exit_codes() {
    assert_eq!(run(&["--help"]).status.code(), Some(0));
    let v = run(&["--version"]);
    assert_eq!(v.status.code(), Some(0));
    assert!(stdout(&v).contains("index format"));
    assert_eq!(run(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(
        run(&["build", "--scheme", "pathtree", "x.pvg", "--out", "y"])
            .status
            .code(),
        Some(1)
    );

    let good = fixture("running_example.pvg");
    let good = good.to_str().unwrap();
    let o = run(&["validate", good]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).starts_with("ok true"));

    assert_eq!(
        run(&["validate", "/nonexistent.pvg"]).status.code(),
        Some(2)
    );
    let bad = run_with_stdin(
        &["validate", "-"],
        "pvg 1\nvertices 2\nk 0\nalpha 0\nfunc 0 0\nfunc 1 1\nedge 0 1 eps\n",
    );
    assert_eq!(bad.status.code(), Some(2));
    assert!(stdout(&bad).contains("eps-cross-function"));
    let garbage = run_with_stdin(&["summarize", "-"], "not a graph\n");
    assert_eq!(garbage.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&garbage.stderr).contains("line 1"));

    let o = run_with_stdin(
        &["query", good, "--scheme", "tc", "--pairs", "-", "--paths"],
        "0 5\n",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("cannot return witness paths"));
    let o = run_with_stdin(&["query", good, "--pairs", "-"], "0 99\n");
    assert_eq!(o.status.code(), Some(2));

    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("i.idx");
    let big = gen_to(dir.path(), "4");
    let o = run(&[
        "build",
        big.to_str().unwrap(),
        "--scheme",
        "dual",
        "--dual-limit",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--scheme grail"));
    let o = run(&[
        "build",
        big.to_str().unwrap(),
        "--scheme",
        "tc",
        "--tc-limit",
        "1",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
    assert_eq!(
        run(&["oracle", big.to_str().unwrap(), "--limit", "1"])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn index_for_another_graph_is_refused() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen_to(dir.path(), "5");
    let b = gen_to(dir.path(), "6");
    let idx = dir.path().join("a.idx");
    assert_eq!(
        run(&["build", a.to_str().unwrap(), "--out", idx.to_str().unwrap()])
            .status
            .code(),
        Some(0)
    );
    let o = run_with_stdin(
        &[
            "query",
            b.to_str().unwrap(),
            "--index",
            idx.to_str().unwrap(),
            "--pairs",
            "-",
        ],
        "0 1\n",
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("different graph"));
}

#[test]
fn outputs_are_reproducible_across_processes() {
    let dir = tempfile::tempdir().unwrap();
    let g1 = std::fs::read(gen_to(dir.path(), "9")).unwrap();
    let g2 = run(&[
        "gen",
        "--functions",
        "6",
        "--vmin",
        "3",
        "--vmax",
        "8",
        "--sites",
        "10",
        "--recursion",
        "--seed",
        "9",
    ])
    .stdout;
    assert_eq!(g1, g2);
    let graph = dir.path().join("g9.pvg");
    let graph = graph.to_str().unwrap();
    for scheme in ["tc", "dual", "grail"] {
        let a = dir.path().join("a.idx");
        let b = dir.path().join("b.idx");
        for out in [&a, &b] {
            let o = run(&[
                "build",
                graph,
                "--scheme",
                scheme,
                "--seed",
                "3",
                "--out",
                out.to_str().unwrap(),
            ]);
            assert_eq!(o.status.code(), Some(0));
        }
        assert_eq!(
            std::fs::read(a).unwrap(),
            std::fs::read(b).unwrap(),
            "{scheme}"
        );
    }
    assert_eq!(
        run(&["summarize", graph]).stdout,
        run(&["summarize", graph]).stdout
    );
    let dot = stdout(&run(&["export-dot", graph]));
    assert!(dot.starts_with("digraph"));
}

#[test]
fn bench_csv_header() {
    let dir = tempfile::tempdir().unwrap();
    let g = gen_to(dir.path(), "7");
    let o = run(&[
        "bench",
        g.to_str().unwrap(),
        "--schemes",
        "tc,grail",
        "--reach",
        "5",
        "--unreach",
        "5",
        "--repeats",
        "1",
        "--csv",
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stderr)
    );
    let text = stdout(&o);
    assert_eq!(
        text.lines().next().unwrap(),
        "graph,vertices,edges,summaries,scheme,build_ms,index_bytes,batch,class,n,total_ms,speedup_vs_tabulation"
    );
    assert!(text.lines().any(|l| l.contains(",grail,")));
}

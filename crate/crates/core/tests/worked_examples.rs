mod common;

use common::*;
use csreach::cfl::{cfl_closure, derives, tabulation_query, NonTerminal, OracleConfig};
use csreach::index::DEFAULT_DUAL_LIMIT;
use csreach::index::{
    build_dual, build_tc, dual_query, grail_query, tc_query, GrailIndex, GrailScratch,
    IntervalLabel,
};
use csreach::{compute_summaries, IndexConfig, Label, QuerySession, Scheme, VertexId};

#[test]
fn four_functions_queries() {
    let g = fixture("four_functions.pvg");
    for scheme in Scheme::ALL {
        let s = QuerySession::build(g.clone(), scheme, &IndexConfig::default()).unwrap();
        assert!(s.cs_query(v('b'), v('i')).unwrap(), "{scheme}");
        assert!(!s.cs_query(v('f'), v('i')).unwrap(), "{scheme}");
    }
    let closure = cfl_closure(&g, &OracleConfig::default()).unwrap();
    assert!(closure.reaches(v('b'), v('i')));
    assert!(!closure.reaches(v('f'), v('i')));
}

#[test]
fn running_example_queries() {
    let g = fixture("running_example.pvg");
    let summaries = compute_summaries(&g);
    let closure = cfl_closure(&g, &OracleConfig::default()).unwrap();
    for scheme in Scheme::ALL {
        let s = QuerySession::build(g.clone(), scheme, &IndexConfig::default()).unwrap();
        assert!(s.cs_query(v('a'), v('f')).unwrap());
        assert!(s.cs_query(v('g'), v('c')).unwrap());
        for x in g.vertices() {
            let expected = x == v('c') || x == v('g');
            assert_eq!(
                s.cs_query(v('g'), x).unwrap(),
                expected,
                "{scheme} g -> {x}"
            );
            for y in g.vertices() {
                assert_eq!(s.cs_query(x, y).unwrap(), closure.reaches(x, y));
                assert_eq!(
                    tabulation_query(&g, &summaries, x, y),
                    closure.reaches(x, y)
                );
            }
        }
    }
}

#[test]
fn running_example_single_summary_and_witness() {
    let g = fixture("running_example.pvg");
    let s = QuerySession::build(g, Scheme::Grail, &IndexConfig::default()).unwrap();
    let pairs: Vec<(VertexId, VertexId)> = s
        .summaries()
        .edges()
        .iter()
        .map(|e| (e.source, e.target))
        .collect();
    assert_eq!(pairs, vec![(v('b'), v('d'))]);

    let bd = s.expand_summary(0).unwrap();
    assert_eq!(bd.vertices, vec![v('b'), v('c'), v('d')]);
    assert_eq!(bd.labels, vec![Label::Open(2), Label::Close(2)]);

    let p = s.cs_query_path(v('a'), v('f')).unwrap().unwrap();
    assert_eq!(p.vertices, ['a', 'b', 'c', 'd', 'e', 'f'].map(v).to_vec());
    assert_eq!(
        p.labels,
        vec![
            Label::Close(1),
            Label::Open(2),
            Label::Close(2),
            Label::Close(3),
            Label::Open(4)
        ]
    );
    assert!(derives(&p.labels, NonTerminal::S));
    assert!(p.is_valid_in(s.graph(), NonTerminal::S));
    assert!(s.cs_query_path(v('g'), v('f')).unwrap().is_none());
}

#[test]
fn dual_example_link_table_has_composed_entry() {
    let dag = dual_example_dag();
    let idx = build_dual(&dag, DEFAULT_DUAL_LIMIT).unwrap();
    let label = |c| idx.interval(dual_node(c));
    assert_eq!(label('A'), IntervalLabel::new(1, 1));
    assert_eq!(label('D'), IntervalLabel::new(3, 4));
    assert_eq!(label('E'), IntervalLabel::new(3, 5));
    assert_eq!(label('F'), IntervalLabel::new(1, 6));
    assert_eq!(label('I'), IntervalLabel::new(7, 9));

    let table: Vec<_> = idx.link_table().collect();
    let i79 = IntervalLabel::new(7, 9);
    assert!(table.contains(&(i79, IntervalLabel::new(3, 5))));
    assert!(table.contains(&(IntervalLabel::new(3, 4), IntervalLabel::new(1, 1))));
    assert!(table.contains(&(i79, IntervalLabel::new(1, 1))));

    assert!(dual_query(&idx, dual_node('I'), dual_node('A')));
    let tc = build_tc(&dag, 1000).unwrap();
    for a in 0..9 {
        for b in 0..9 {
            assert_eq!(
                dual_query(&idx, a, b),
                tc_query(&tc, a, b),
                "{} -> {}",
                DUAL_NAMES[a as usize],
                DUAL_NAMES[b as usize]
            );
        }
    }
}

#[test]
fn grail_example_labels_refute_without_search() {
    let dag = grail_example_dag();
    let idx = GrailIndex::from_orders(&dag, &grail_example_orders(), 0).unwrap();
    let (h, j) = (grail_node("h"), grail_node("j"));
    assert_eq!(
        idx.labels(j),
        &[IntervalLabel::new(1, 3), IntervalLabel::new(1, 5)]
    );
    assert_eq!(
        idx.labels(h),
        &[IntervalLabel::new(1, 8), IntervalLabel::new(1, 3)]
    );
    assert!(idx.labels(h)[0].contains(&idx.labels(j)[0]));
    assert!(!idx.labels(h)[1].contains(&idx.labels(j)[1]));

    let mut scratch = GrailScratch::new(dag.node_count());
    assert!(!grail_query(&idx, &dag, h, j, &mut scratch));
    assert_eq!(scratch.expansions, 0);

    let tc = build_tc(&dag, 1000).unwrap();
    for a in 0..8 {
        for b in 0..8 {
            assert_eq!(
                grail_query(&idx, &dag, a, b, &mut scratch),
                tc_query(&tc, a, b)
            );
        }
    }
}

mod common;

use std::collections::BTreeSet;

use diagkit::diagnosability::{
    diagnosability_bounds, is_t_diagnosable, max_diagnosability, oracle_is_t_diagnosable, verify_certificate,
    Verdict,
};
use diagkit::{DiagnosticGraph, NodeId};
use proptest::prelude::*;
use rand::Rng;

#[test]
fn checker_matches_both_oracles_on_all_small_digraphs() {
    for n in 1..=4usize {
        let pairs = n * (n - 1);
        for code in 0u64..1 << pairs {
            let bits: Vec<bool> = (0..pairs).map(|k| code >> k & 1 == 1).collect();
            let g = common::graph_from_bits(n, &bits);
            let edges = common::index_edges(&g);
            for t in 0..n {
                let checker = is_t_diagnosable(&g, t).unwrap().is_diagnosable();
                let oracle = oracle_is_t_diagnosable(&g, t).unwrap().diagnosable;
                let reference = common::reference_diagnosable(n, &edges, t);
                assert_eq!(checker, reference, "n={n} edges={edges:?} t={t}");
                assert_eq!(oracle, reference, "n={n} edges={edges:?} t={t}");
            }
        }
    }
}

#[test]
fn covers_of_diagnosable_parts_are_diagnosable() {
    let mut rng = common::rng(11);
    let mut checked = 0;
    while checked < 100 {
        let n = rng.random_range(4..=9);
        let g = { let p = rng.random_range(0.3..0.9); common::random_graph(&mut rng, n, p) };
        let ids: Vec<NodeId> = g.node_ids().collect();
        let parts = rng.random_range(1..=3);
        let mut cover: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); parts];
        for &id in &ids {
            cover[rng.random_range(0..parts)].insert(id);
            if rng.random_bool(0.3) {
                cover[rng.random_range(0..parts)].insert(id);
            }
        }
        let t = rng.random_range(0..=2);
        let subs: Vec<DiagnosticGraph> = cover
            .iter()
            .filter(|c| !c.is_empty())
            .map(|c| g.induced_subgraph(c).unwrap())
            .collect();
        let all_pass = subs
            .iter()
            .all(|d| t < d.node_count() && is_t_diagnosable(d, t).unwrap().is_diagnosable());
        if all_pass {
            assert!(is_t_diagnosable(&g, t).unwrap().is_diagnosable(), "cover {cover:?} of {:?}", g.edges());
        }
        checked += 1;
    }
}

#[test]
fn certificates_of_max_diagnosability_revalidate() {
    let mut rng = common::rng(5);
    for _ in 0..150 {
        let n = rng.random_range(2..=12);
        let g = { let p = rng.random_range(0.2..1.0); common::random_graph(&mut rng, n, p) };
        let m = max_diagnosability(&g).unwrap();
        assert_eq!(m.passing.t, m.t_max);
        assert!(verify_certificate(&g, &m.passing).unwrap());
        if let Some(f) = &m.failing {
            assert_eq!(f.verdict, Verdict::NotDiagnosable);
            assert_eq!(f.t, m.t_max + 1);
            assert!(verify_certificate(&g, f).unwrap());
        }
        let b = diagnosability_bounds(&g);
        assert!(b.lower <= m.t_max && m.t_max <= b.upper);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn diagnosability_is_monotone_in_t(g in common::arb_graph(1..=9)) {
        let n = g.node_count();
        let verdicts: Vec<bool> = (0..n).map(|t| is_t_diagnosable(&g, t).unwrap().is_diagnosable()).collect();
        for w in verdicts.windows(2) {
            prop_assert!(w[0] || !w[1]);
        }
    }

    #[test]
    fn checker_matches_reference_on_random_graphs(g in common::arb_graph(5..=9)) {
        let t_max = max_diagnosability(&g).unwrap().t_max;
        prop_assert_eq!(t_max, common::reference_t_max(&g));
    }

    #[test]
    fn adding_edges_never_lowers_diagnosability(
        g in common::arb_graph(2..=9),
        extra in proptest::collection::vec((0usize..9, 0usize..9), 0..12),
    ) {
        let n = g.node_count() as u32;
        let mut pairs: Vec<(u32, u32)> = g.edges().iter().map(|e| (e.tester.0, e.testee.0)).collect();
        for (i, j) in extra {
            let (i, j) = (i as u32 % n + 1, j as u32 % n + 1);
            if i != j && !pairs.contains(&(i, j)) {
                pairs.push((i, j));
            }
        }
        let bigger = DiagnosticGraph::from_pairs(n, &pairs).unwrap();
        prop_assert!(max_diagnosability(&g).unwrap().t_max <= max_diagnosability(&bigger).unwrap().t_max);
    }
}

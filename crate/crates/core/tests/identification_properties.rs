mod common;

use diagkit::identification::{all_consistent_fault_sets, candidate_fault_sets};
use diagkit::{generate_syndrome, identify, DiagnosisVerdict, DiagnosticGraph, FaultPolicy, FaultSet, Syndrome};
use proptest::prelude::*;

fn sorted_reference(g: &DiagnosticGraph, outcomes: &[bool], t: usize) -> Vec<FaultSet> {
    let edges = common::index_edges(g);
    let mut sets: Vec<FaultSet> = common::reference_candidates(g.node_count(), &edges, outcomes, t)
        .into_iter()
        .map(|m| common::mask_to_set(g, m))
        .collect();
    sets.sort();
    sets
}

fn sparse_graph() -> impl Strategy<Value = DiagnosticGraph> {
    (2usize..=8).prop_flat_map(|n| {
        (0.1f64..0.45).prop_flat_map(move |p| {
            proptest::collection::vec(proptest::bool::weighted(p), n * (n - 1))
                .prop_map(move |bits| common::graph_from_bits(n, &bits))
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Every (F, faulty-tester outcome) combination with |F| <= t.
    #[test]
    fn identification_matches_reference_enumeration(g in sparse_graph(), t in 0usize..=2) {
        let n = g.node_count();
        let edges = common::index_edges(&g);
        for f in common::masks_up_to(n, t) {
            let syndromes = common::compatible_syndromes(&edges, f);
            if syndromes.len() > 1 << 10 {
                continue;
            }
            for outcomes in syndromes {
                let s = common::syndrome(&g, &outcomes);
                let expected = sorted_reference(&g, &outcomes, t);
                prop_assert_eq!(&candidate_fault_sets(&g, &s, t).unwrap(), &expected);
                let mut brute = all_consistent_fault_sets(&g, &s, t).unwrap();
                brute.sort();
                prop_assert_eq!(&brute, &expected);
                prop_assert!(expected.contains(&common::mask_to_set(&g, f)));
                let verdict = identify(&g, &s, t).unwrap();
                match expected.len() {
                    1 => prop_assert_eq!(verdict, DiagnosisVerdict::Unique(expected[0].clone())),
                    k => match verdict {
                        DiagnosisVerdict::Ambiguous { count, .. } => prop_assert_eq!(count, k),
                        other => prop_assert!(false, "expected ambiguous, got {:?}", other),
                    },
                }
            }
        }
    }

    #[test]
    fn arbitrary_syndromes_classify_like_the_reference(
        (g, bits) in common::arb_graph(1..=8).prop_flat_map(|g| {
            let m = g.edge_count();
            (Just(g), proptest::collection::vec(any::<bool>(), m))
        }),
        t in 0usize..=3,
    ) {
        let s = common::syndrome(&g, &bits);
        let expected = sorted_reference(&g, &bits, t);
        let verdict = identify(&g, &s, t).unwrap();
        match expected.len() {
            0 => prop_assert_eq!(verdict, DiagnosisVerdict::Inconsistent),
            1 => prop_assert_eq!(verdict, DiagnosisVerdict::Unique(expected[0].clone())),
            k => {
                let ok = matches!(verdict, DiagnosisVerdict::Ambiguous { count, .. } if count == k);
                prop_assert!(ok, "expected {} candidates, got {:?}", k, verdict);
            }
        }
    }

    #[test]
    fn candidates_grow_with_the_budget(
        (g, bits) in common::arb_graph(1..=8).prop_flat_map(|g| {
            let m = g.edge_count();
            (Just(g), proptest::collection::vec(any::<bool>(), m))
        }),
        t in 0usize..=3,
    ) {
        let s = common::syndrome(&g, &bits);
        let small = candidate_fault_sets(&g, &s, t).unwrap();
        let large = candidate_fault_sets(&g, &s, t + 1).unwrap();
        for c in &small {
            prop_assert!(large.contains(c));
        }
    }

    #[test]
    fn generating_set_is_always_a_candidate(
        g in common::arb_graph(1..=10),
        mask in any::<u64>(),
        seed in any::<u64>(),
        p in 0.0f64..=1.0,
    ) {
        let n = g.node_count();
        let f = common::mask_to_set(&g, mask & ((1 << n) - 1));
        let s: Syndrome = generate_syndrome(&g, &f, FaultPolicy::bernoulli(p).unwrap(), seed).unwrap();
        prop_assert!(candidate_fault_sets(&g, &s, f.len()).unwrap().contains(&f));
    }
}

#[test]
fn unique_identification_on_small_diagnosable_graphs() {
    let mut rng = common::rng(21);
    let mut graphs = 0;
    while graphs < 60 {
        use rand::Rng;
        let n = rng.random_range(3..=7);
        let g = { let p = rng.random_range(0.3..0.7); common::random_graph(&mut rng, n, p) };
        let t = common::reference_t_max(&g);
        if t == 0 {
            continue;
        }
        graphs += 1;
        let edges = common::index_edges(&g);
        for f in common::masks_up_to(n, t) {
            let syndromes = common::compatible_syndromes(&edges, f);
            if syndromes.len() > 1 << 12 {
                continue;
            }
            let expected = DiagnosisVerdict::Unique(common::mask_to_set(&g, f));
            for outcomes in syndromes {
                assert_eq!(identify(&g, &common::syndrome(&g, &outcomes), t).unwrap(), expected);
            }
        }
    }
}

mod common;

use diagkit::scenarios::{five_cycle_graph, localization_graph};
use diagkit::simulator::generate_trial_syndrome;
use diagkit::{generate_syndrome, max_diagnosability, monte_carlo, pmc_compatible, FaultPolicy};
use proptest::prelude::*;

fn arb_policy() -> impl Strategy<Value = FaultPolicy> {
    prop_oneof![
        Just(FaultPolicy::AlwaysPass),
        Just(FaultPolicy::AlwaysFail),
        (0.0f64..=1.0).prop_map(|p| FaultPolicy::bernoulli(p).unwrap()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn generated_syndromes_are_deterministic_and_compatible(
        g in common::arb_graph(1..=10),
        mask in any::<u64>(),
        policy in arb_policy(),
        seed in any::<u64>(),
        trial in 0u64..1000,
    ) {
        let f = common::mask_to_set(&g, mask & ((1 << g.node_count()) - 1));
        let a = generate_trial_syndrome(&g, &f, policy, seed, trial).unwrap();
        let b = generate_trial_syndrome(&g, &f, policy, seed, trial).unwrap();
        prop_assert_eq!(a.to_json(), b.to_json());
        prop_assert!(pmc_compatible(&g, &a, &f).unwrap());
    }

    #[test]
    fn adversarial_syndromes_are_compatible(g in common::arb_graph(2..=6), mask in any::<u64>()) {
        let f = common::mask_to_set(&g, mask & ((1 << g.node_count()) - 1));
        let free: usize = f.iter().map(|id| g.out_neighbors(id).unwrap().len()).sum();
        prop_assume!(free <= diagkit::simulator::ADVERSARIAL_FREE_CAP);
        let s = generate_syndrome(&g, &f, FaultPolicy::Adversarial, 0).unwrap();
        prop_assert!(pmc_compatible(&g, &s, &f).unwrap());
    }

    #[test]
    fn identification_is_exact_within_diagnosability(g in common::arb_graph(3..=9), seed in any::<u64>(), policy in arb_policy()) {
        let t = max_diagnosability(&g).unwrap().t_max;
        let report = monte_carlo(&g, t, 40, policy, seed).unwrap();
        prop_assert_eq!(report.unique_rate, 1.0);
        prop_assert_eq!(report.correct_unique, report.trials);
    }
}

#[test]
fn bernoulli_draws_do_not_depend_on_edge_order() {
    let g = five_cycle_graph();
    let mut pairs: Vec<(u32, u32)> = g.edges().iter().map(|e| (e.tester.0, e.testee.0)).collect();
    pairs.reverse();
    let h = diagkit::DiagnosticGraph::from_pairs(5, &pairs).unwrap();
    let f = diagkit::FaultSet::from_ids([1, 2, 3]);
    let p = FaultPolicy::bernoulli(0.5).unwrap();
    for seed in 0..20 {
        let a = generate_syndrome(&g, &f, p, seed).unwrap();
        let b = generate_syndrome(&h, &f, p, seed).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn zero_budget_samples_only_the_empty_set() {
    let report = monte_carlo(&localization_graph(), 0, 50, FaultPolicy::AlwaysFail, 3).unwrap();
    assert_eq!(report.unique_rate, 1.0);
    assert!(report.records.iter().all(|r| r.injected.is_empty()));
}

#[test]
fn adversary_defeats_double_faults_on_the_cycle() {
    let report = monte_carlo(&five_cycle_graph(), 2, 300, FaultPolicy::Adversarial, 9).unwrap();
    assert!(report.unique_rate < 1.0);
}

#[test]
fn batches_are_reproducible_and_csv_is_stable() {
    let g = localization_graph();
    let p = FaultPolicy::bernoulli(0.3).unwrap();
    let a = monte_carlo(&g, 1, 200, p, 42).unwrap();
    let b = monte_carlo(&g, 1, 200, p, 42).unwrap();
    let (mut x, mut y) = (Vec::new(), Vec::new());
    a.write_csv(&mut x).unwrap();
    b.write_csv(&mut y).unwrap();
    assert_eq!(x, y);
    assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    assert_eq!(String::from_utf8(x).unwrap().lines().count(), 201);
}

//! Shared helpers for the integration suites: random graphs and a
//! definition-level reference model of PMC testing that does not go
//! through the library's own oracle.

#![allow(dead_code)]

use diagkit::{DiagnosticGraph, FaultSet, NodeId, Syndrome};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Edges as (tester index, testee index) into `0..n`.
pub fn index_edges(g: &DiagnosticGraph) -> Vec<(usize, usize)> {
    g.edges()
        .iter()
        .map(|e| (g.index_of(e.tester).unwrap(), g.index_of(e.testee).unwrap()))
        .collect()
}

/// Outcomes a test may report: a fault-free tester is truthful, a faulty
/// one may report anything.
fn allowed(tester_faulty: bool, testee_faulty: bool) -> &'static [bool] {
    if tester_faulty {
        &[false, true]
    } else if testee_faulty {
        &[true]
    } else {
        &[false]
    }
}

fn bit(mask: u64, i: usize) -> bool {
    mask >> i & 1 == 1
}

/// Two fault sets can produce the same syndrome iff every edge has an
/// outcome allowed under both.
pub fn can_share_syndrome(edges: &[(usize, usize)], f1: u64, f2: u64) -> bool {
    edges.iter().all(|&(i, j)| {
        let a = allowed(bit(f1, i), bit(f1, j));
        let b = allowed(bit(f2, i), bit(f2, j));
        a.iter().any(|x| b.contains(x))
    })
}

pub fn masks_up_to(n: usize, t: usize) -> Vec<u64> {
    (0u64..1 << n).filter(|m| m.count_ones() as usize <= t).collect()
}

/// Definition of t-diagnosability over raw edge lists.
pub fn reference_diagnosable(n: usize, edges: &[(usize, usize)], t: usize) -> bool {
    let sets = masks_up_to(n, t);
    for (k, &a) in sets.iter().enumerate() {
        for &b in &sets[k + 1..] {
            if can_share_syndrome(edges, a, b) {
                return false;
            }
        }
    }
    true
}

/// Largest t (below n) passing the reference definition. Diagnosability is
/// monotone in t by definition, so the upward scan stops at the first
/// failure.
pub fn reference_t_max(g: &DiagnosticGraph) -> usize {
    let n = g.node_count();
    let edges = index_edges(g);
    let mut t = 0;
    while t + 1 < n && reference_diagnosable(n, &edges, t + 1) {
        t += 1;
    }
    t
}

pub fn reference_compatible(edges: &[(usize, usize)], faults: u64, outcomes: &[bool]) -> bool {
    edges
        .iter()
        .zip(outcomes)
        .all(|(&(i, j), v)| allowed(bit(faults, i), bit(faults, j)).contains(v))
}

/// Every syndrome (in edge order) the PMC model allows for `faults`.
pub fn compatible_syndromes(edges: &[(usize, usize)], faults: u64) -> Vec<Vec<bool>> {
    let free: Vec<usize> = (0..edges.len()).filter(|&e| bit(faults, edges[e].0)).collect();
    let base: Vec<bool> = edges.iter().map(|&(_, j)| bit(faults, j)).collect();
    (0u64..1 << free.len())
        .map(|choice| {
            let mut out = base.clone();
            for (k, &e) in free.iter().enumerate() {
                out[e] = bit(choice, k);
            }
            out
        })
        .collect()
}

/// All fault sets of size at most `t` that explain `outcomes`, in mask order.
pub fn reference_candidates(n: usize, edges: &[(usize, usize)], outcomes: &[bool], t: usize) -> Vec<u64> {
    masks_up_to(n, t)
        .into_iter()
        .filter(|&m| reference_compatible(edges, m, outcomes))
        .collect()
}

pub fn mask_to_set(g: &DiagnosticGraph, mask: u64) -> FaultSet {
    (0..g.node_count()).filter(|&i| bit(mask, i)).map(|i| g.id_at(i)).collect()
}

pub fn set_to_mask(g: &DiagnosticGraph, f: &FaultSet) -> u64 {
    f.iter().map(|id| 1u64 << g.index_of(id).unwrap()).sum()
}

pub fn syndrome(g: &DiagnosticGraph, outcomes: &[bool]) -> Syndrome {
    let bits: Vec<u8> = outcomes.iter().map(|&b| b as u8).collect();
    Syndrome::from_bits(g, &bits).unwrap()
}

/// Graph on nodes 1..=n from an adjacency bit per ordered pair (i != j).
pub fn graph_from_bits(n: usize, bits: &[bool]) -> DiagnosticGraph {
    let mut pairs = Vec::new();
    let mut k = 0;
    for i in 1..=n as u32 {
        for j in 1..=n as u32 {
            if i != j {
                if bits[k] {
                    pairs.push((i, j));
                }
                k += 1;
            }
        }
    }
    DiagnosticGraph::from_pairs(n as u32, &pairs).unwrap()
}

/// Random loop-free digraph with edge probability `p`.
pub fn random_graph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> DiagnosticGraph {
    let bits: Vec<bool> = (0..n * (n - 1)).map(|_| rng.random_bool(p)).collect();
    graph_from_bits(n, &bits)
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Strategy for loop-free digraphs with `n` in `sizes`.
pub fn arb_graph(sizes: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = DiagnosticGraph> {
    sizes.prop_flat_map(|n| {
        (0.1f64..0.9).prop_flat_map(move |p| {
            proptest::collection::vec(proptest::bool::weighted(p), n * (n - 1))
                .prop_map(move |bits| graph_from_bits(n, &bits))
        })
    })
}

pub fn ids(g: &DiagnosticGraph) -> Vec<NodeId> {
    g.node_ids().collect()
}

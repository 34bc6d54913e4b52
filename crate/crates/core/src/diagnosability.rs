//! Deciding t-diagnosability and computing the diagnosability number t(D).
//!
//! The checker follows the Hakimi–Amin characterization: a graph on `n`
//! nodes is t-diagnosable iff
//!
//! 1. `n >= 2t + 1`,
//! 2. every node has in-degree at least `t`,
//! 3. for each `0 <= p < t`, every `X` with `|X| = n - 2t + p` tests more
//!    than `p` nodes outside itself.
//!
//! Condition 3 is checked by enumerating `X` for ascending `p` in
//! lexicographic order, so the first witness returned is the smallest
//! `(p, X)`. The oracle below decides the same question straight from the
//! definition (no two small fault sets share a syndrome) and never touches
//! the characterization.

use serde::{Deserialize, Serialize};

use crate::combinatorics::{for_each_combination, masks_up_to};
use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, NodeId};
use crate::syndrome::{FaultSet, Syndrome};

pub const DEFAULT_EXACT_CAP: usize = 24;
pub const DEFAULT_ORACLE_CAP: usize = 14;
/// Subsets enumerated by `diagnosability_bounds` before giving up.
pub const DEFAULT_BOUNDS_BUDGET: u64 = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Diagnosable,
    NotDiagnosable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum FailedCondition {
    #[serde(rename = "cond_i")]
    CondI,
    #[serde(rename = "cond_ii")]
    CondII,
    #[serde(rename = "cond_iii")]
    CondIII,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Witness {
    /// Too few nodes: `n < required = 2t + 1`.
    NodeCount { n: usize, required: usize },
    /// A node tested by fewer than `t` others.
    InDegree { node: NodeId, in_degree: usize },
    /// `|Γ(X)| <= p` with `|X| = n - 2t + p`.
    Subset {
        p: usize,
        #[serde(rename = "X")]
        x: Vec<NodeId>,
        gamma: Vec<NodeId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosabilityCertificate {
    pub t: usize,
    pub verdict: Verdict,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed: Option<FailedCondition>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub witness: Option<Witness>,
}

impl DiagnosabilityCertificate {
    fn diagnosable(t: usize) -> Self {
        DiagnosabilityCertificate {
            t,
            verdict: Verdict::Diagnosable,
            failed: None,
            witness: None,
        }
    }

    fn failed(t: usize, cond: FailedCondition, witness: Witness) -> Self {
        DiagnosabilityCertificate {
            t,
            verdict: Verdict::NotDiagnosable,
            failed: Some(cond),
            witness: Some(witness),
        }
    }

    pub fn is_diagnosable(&self) -> bool {
        self.verdict == Verdict::Diagnosable
    }
}

enum Check {
    Done(DiagnosabilityCertificate),
    OutOfBudget,
}

fn check(graph: &DiagnosticGraph, t: usize, budget: &mut Option<u64>) -> Result<Check> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if t >= n {
        return Err(Error::TooLargeT { t, n });
    }
    if t == 0 {
        return Ok(Check::Done(DiagnosabilityCertificate::diagnosable(0)));
    }
    if n < 2 * t + 1 {
        return Ok(Check::Done(DiagnosabilityCertificate::failed(
            t,
            FailedCondition::CondI,
            Witness::NodeCount {
                n,
                required: 2 * t + 1,
            },
        )));
    }
    if let Some(k) = (0..n).find(|&k| graph.in_adj(k).len() < t) {
        return Ok(Check::Done(DiagnosabilityCertificate::failed(
            t,
            FailedCondition::CondII,
            Witness::InDegree {
                node: graph.id_at(k),
                in_degree: graph.in_adj(k).len(),
            },
        )));
    }

    let mut in_x = vec![false; n];
    for p in 0..t {
        let size = n - 2 * t + p;
        let mut found: Option<Vec<usize>> = None;
        let mut exhausted = false;
        for_each_combination(n, size, |x| {
            if let Some(b) = budget {
                if *b == 0 {
                    exhausted = true;
                    return false;
                }
                *b -= 1;
            }
            in_x.iter_mut().for_each(|m| *m = false);
            for &i in x {
                in_x[i] = true;
            }
            let mut gamma = 0;
            for y in (0..n).filter(|&y| !in_x[y]) {
                if graph.in_adj(y).iter().any(|&(i, _)| in_x[i]) {
                    gamma += 1;
                    if gamma > p {
                        return true;
                    }
                }
            }
            found = Some(x.to_vec());
            false
        });
        if exhausted {
            return Ok(Check::OutOfBudget);
        }
        if let Some(x) = found {
            let ids: Vec<NodeId> = x.iter().map(|&i| graph.id_at(i)).collect();
            let gamma = graph
                .testable_set(&ids)
                .expect("ids come from the graph")
                .into_iter()
                .collect();
            return Ok(Check::Done(DiagnosabilityCertificate::failed(
                t,
                FailedCondition::CondIII,
                Witness::Subset { p, x: ids, gamma },
            )));
        }
    }
    Ok(Check::Done(DiagnosabilityCertificate::diagnosable(t)))
}

/// Decides whether `graph` is t-diagnosable, returning the first violated
/// condition and its witness otherwise. `t = 0` is always diagnosable.
pub fn is_t_diagnosable(graph: &DiagnosticGraph, t: usize) -> Result<DiagnosabilityCertificate> {
    match check(graph, t, &mut None)? {
        Check::Done(cert) => Ok(cert),
        Check::OutOfBudget => unreachable!("unbounded check"),
    }
}

/// `min(δ_in, ⌊(n-1)/2⌋)`, the ceiling for t(D).
pub fn diagnosability_ceiling(graph: &DiagnosticGraph) -> Result<usize> {
    let (delta, _) = graph.min_in_degree()?;
    Ok(delta.min((graph.node_count() - 1) / 2))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MaxDiagnosability {
    pub t_max: usize,
    /// Certificate at `t_max`.
    pub passing: DiagnosabilityCertificate,
    /// Certificate at `t_max + 1`, when that value is below `n`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failing: Option<DiagnosabilityCertificate>,
}

/// t(D) by downward search from the ceiling, for graphs with at most
/// `node_cap` nodes.
pub fn max_diagnosability_capped(graph: &DiagnosticGraph, node_cap: usize) -> Result<MaxDiagnosability> {
    let n = graph.node_count();
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if n > node_cap {
        return Err(Error::ExactCap { n, cap: node_cap });
    }
    let ceiling = diagnosability_ceiling(graph)?;
    let mut failing = None;
    let mut t = ceiling;
    let passing = loop {
        let cert = is_t_diagnosable(graph, t)?;
        if cert.is_diagnosable() {
            break cert;
        }
        failing = Some(cert);
        t -= 1;
    };
    if failing.is_none() && t + 1 < n {
        failing = Some(is_t_diagnosable(graph, t + 1)?);
    }
    Ok(MaxDiagnosability {
        t_max: t,
        passing,
        failing,
    })
}

pub fn max_diagnosability(graph: &DiagnosticGraph) -> Result<MaxDiagnosability> {
    max_diagnosability_capped(graph, DEFAULT_EXACT_CAP)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiagnosabilityBounds {
    pub lower: usize,
    pub upper: usize,
    /// `lower` is known to equal t(D).
    pub exact: bool,
}

/// Cheap bracket on t(D) for graphs too large for the exact search.
///
/// `upper` is the ceiling; `lower` is the largest t verified within
/// `budget` enumerated subsets, checking t = 1, 2, ... in turn.
pub fn diagnosability_bounds_with_budget(graph: &DiagnosticGraph, budget: u64) -> DiagnosabilityBounds {
    let Ok(upper) = diagnosability_ceiling(graph) else {
        return DiagnosabilityBounds {
            lower: 0,
            upper: 0,
            exact: true,
        };
    };
    let mut lower = 0;
    let mut exact = upper == 0;
    let mut remaining = Some(budget);
    for t in 1..=upper {
        match check(graph, t, &mut remaining) {
            Ok(Check::Done(cert)) if cert.is_diagnosable() => lower = t,
            Ok(Check::Done(_)) => {
                exact = true;
                break;
            }
            _ => break,
        }
    }
    DiagnosabilityBounds {
        lower,
        upper,
        exact: exact || lower == upper,
    }
}

pub fn diagnosability_bounds(graph: &DiagnosticGraph) -> DiagnosabilityBounds {
    diagnosability_bounds_with_budget(graph, DEFAULT_BOUNDS_BUDGET)
}

/// Two fault sets that no syndrome can tell apart.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    pub first: FaultSet,
    pub second: FaultSet,
    #[serde(skip)]
    pub syndrome: Syndrome,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct OracleOutcome {
    pub diagnosable: bool,
    pub counterexample: Option<Counterexample>,
}

fn in_masks(graph: &DiagnosticGraph) -> Vec<u64> {
    (0..graph.node_count())
        .map(|j| graph.in_adj(j).iter().fold(0u64, |m, &(i, _)| m | 1 << i))
        .collect()
}

fn indistinguishable(in_mask: &[u64], full: u64, a: u64, b: u64) -> bool {
    let free = full & !(a | b);
    let mut diff = a ^ b;
    while diff != 0 {
        let j = diff.trailing_zeros() as usize;
        if in_mask[j] & free != 0 {
            return false;
        }
        diff &= diff - 1;
    }
    true
}

// An outcome is forced by whichever set has the tester fault-free; it is
// free (reported as 0) only when the tester is faulty in both.
fn shared_outcome(tester_a: bool, tester_b: bool, testee_a: bool, testee_b: bool) -> bool {
    match (tester_a, tester_b) {
        (false, _) => testee_a,
        (true, false) => testee_b,
        (true, true) => false,
    }
}

fn materialize(graph: &DiagnosticGraph, a: u64, b: u64) -> Syndrome {
    let values: Vec<bool> = graph
        .edges()
        .iter()
        .map(|e| {
            let i = graph.index_of(e.tester).unwrap();
            let j = graph.index_of(e.testee).unwrap();
            shared_outcome(a >> i & 1 == 1, b >> i & 1 == 1, a >> j & 1 == 1, b >> j & 1 == 1)
        })
        .collect();
    Syndrome::from_aligned(graph, &values)
}

/// A syndrome compatible with both fault sets, if one exists. Outcomes of
/// testers faulty in both sets are set to 0.
pub fn shared_syndrome(graph: &DiagnosticGraph, first: &FaultSet, second: &FaultSet) -> Result<Option<Syndrome>> {
    let a = first.indicator(graph)?;
    let b = second.indicator(graph)?;
    let mut values = Vec::with_capacity(graph.edge_count());
    for e in graph.edges() {
        let i = graph.index_of(e.tester).unwrap();
        let j = graph.index_of(e.testee).unwrap();
        if !a[i] && !b[i] && a[j] != b[j] {
            return Ok(None);
        }
        values.push(shared_outcome(a[i], b[i], a[j], b[j]));
    }
    Ok(Some(Syndrome::from_aligned(graph, &values)))
}

/// Definition-level check: t-diagnosable iff no two distinct fault sets of
/// size at most `t` admit a common syndrome. Limited to `n <= cap`.
pub fn oracle_is_t_diagnosable_capped(graph: &DiagnosticGraph, t: usize, cap: usize) -> Result<OracleOutcome> {
    let n = graph.node_count();
    if n > cap.min(64) {
        return Err(Error::OracleCap { n, cap });
    }
    if n == 0 {
        return Err(Error::EmptyGraph);
    }
    if t >= n {
        return Err(Error::TooLargeT { t, n });
    }
    let in_mask = in_masks(graph);
    let full = if n == 64 { u64::MAX } else { (1u64 << n) - 1 };
    let sets = masks_up_to(n, t);
    for (k, &a) in sets.iter().enumerate() {
        for &b in &sets[k + 1..] {
            if indistinguishable(&in_mask, full, a, b) {
                return Ok(OracleOutcome {
                    diagnosable: false,
                    counterexample: Some(Counterexample {
                        first: FaultSet::from_mask(graph, a),
                        second: FaultSet::from_mask(graph, b),
                        syndrome: materialize(graph, a, b),
                    }),
                });
            }
        }
    }
    Ok(OracleOutcome {
        diagnosable: true,
        counterexample: None,
    })
}

pub fn oracle_is_t_diagnosable(graph: &DiagnosticGraph, t: usize) -> Result<OracleOutcome> {
    oracle_is_t_diagnosable_capped(graph, t, DEFAULT_ORACLE_CAP)
}

/// Re-checks a certificate against `graph` without trusting how it was made.
///
/// Negative certificates are checked through their witness. Positive ones
/// are re-decided by the oracle when the graph is small enough, otherwise by
/// re-running the characterization.
pub fn verify_certificate(graph: &DiagnosticGraph, cert: &DiagnosabilityCertificate) -> Result<bool> {
    let n = graph.node_count();
    let t = cert.t;
    match cert.verdict {
        Verdict::Diagnosable => {
            if t >= n {
                return Ok(false);
            }
            if n <= DEFAULT_ORACLE_CAP {
                Ok(oracle_is_t_diagnosable(graph, t)?.diagnosable)
            } else {
                Ok(is_t_diagnosable(graph, t)?.is_diagnosable())
            }
        }
        Verdict::NotDiagnosable => Ok(match (&cert.failed, &cert.witness) {
            (Some(FailedCondition::CondI), Some(Witness::NodeCount { n: wn, required })) => {
                *wn == n && *required == 2 * t + 1 && n < *required
            }
            (Some(FailedCondition::CondII), Some(Witness::InDegree { node, in_degree })) => {
                graph.in_degree(*node) == Some(*in_degree) && *in_degree < t
            }
            (Some(FailedCondition::CondIII), Some(Witness::Subset { p, x, gamma })) => {
                let distinct: std::collections::BTreeSet<_> = x.iter().collect();
                let actual = match graph.testable_set(x) {
                    Ok(g) => g,
                    Err(_) => return Ok(false),
                };
                *p < t
                    && distinct.len() == x.len()
                    && 2 * t <= n + p
                    && x.len() == n + p - 2 * t
                    && actual.iter().copied().eq(gamma.iter().copied())
                    && gamma.len() <= *p
            }
            _ => false,
        }),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_cycle() -> DiagnosticGraph {
        DiagnosticGraph::from_pairs(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]).unwrap()
    }

    #[test]
    fn five_cycle_certificates() {
        let g = five_cycle();
        assert!(is_t_diagnosable(&g, 1).unwrap().is_diagnosable());
        let c = is_t_diagnosable(&g, 2).unwrap();
        assert_eq!(c.failed, Some(FailedCondition::CondII));
        assert!(matches!(c.witness, Some(Witness::InDegree { in_degree: 1, .. })));
        assert!(verify_certificate(&g, &c).unwrap());
        assert!(matches!(is_t_diagnosable(&g, 5), Err(Error::TooLargeT { .. })));
        assert!(is_t_diagnosable(&g, 0).unwrap().is_diagnosable());
    }

    #[test]
    fn five_cycle_max_and_bounds() {
        let g = five_cycle();
        let m = max_diagnosability(&g).unwrap();
        assert_eq!(m.t_max, 1);
        assert_eq!(m.failing.as_ref().unwrap().t, 2);
        let b = diagnosability_bounds(&g);
        assert_eq!((b.lower, b.upper), (1, 1));
    }

    #[test]
    fn edgeless_bounds() {
        let g = DiagnosticGraph::from_pairs(3, &[]).unwrap();
        let b = diagnosability_bounds(&g);
        assert_eq!((b.lower, b.upper), (0, 0));
        assert_eq!(max_diagnosability(&g).unwrap().t_max, 0);
    }

    #[test]
    fn oracle_five_cycle() {
        let g = five_cycle();
        assert!(oracle_is_t_diagnosable(&g, 1).unwrap().diagnosable);
        let out = oracle_is_t_diagnosable(&g, 2).unwrap();
        assert!(!out.diagnosable);
        let ce = out.counterexample.unwrap();
        assert_ne!(ce.first, ce.second);
        assert!(crate::syndrome::pmc_compatible(&g, &ce.syndrome, &ce.first).unwrap());
        assert!(crate::syndrome::pmc_compatible(&g, &ce.syndrome, &ce.second).unwrap());
    }

    #[test]
    fn shared_syndrome_for_double_faults() {
        let g = five_cycle();
        let s = shared_syndrome(&g, &FaultSet::from_ids([1, 3]), &FaultSet::from_ids([1, 2]))
            .unwrap()
            .unwrap();
        assert_eq!(s.to_bits(&g).unwrap(), vec![0, 1, 0, 0, 1]);
        let other = Syndrome::from_bits(&g, &[0, 1, 0, 0, 1]).unwrap();
        for f in [FaultSet::from_ids([1, 3]), FaultSet::from_ids([1, 2])] {
            assert!(crate::syndrome::pmc_compatible(&g, &s, &f).unwrap());
            assert!(crate::syndrome::pmc_compatible(&g, &other, &f).unwrap());
        }
        assert!(shared_syndrome(&g, &FaultSet::from_ids([1]), &FaultSet::from_ids([2]))
            .unwrap()
            .is_none());
    }

    #[test]
    fn oracle_cap_enforced() {
        let g = DiagnosticGraph::from_pairs(15, &[]).unwrap();
        assert!(matches!(oracle_is_t_diagnosable(&g, 1), Err(Error::OracleCap { .. })));
    }

    #[test]
    fn exact_cap_enforced() {
        let g = DiagnosticGraph::from_pairs(6, &[]).unwrap();
        assert!(matches!(max_diagnosability_capped(&g, 5), Err(Error::ExactCap { .. })));
    }

    #[test]
    fn certificate_json_shape() {
        let cert = DiagnosabilityCertificate::failed(
            2,
            FailedCondition::CondIII,
            Witness::Subset {
                p: 1,
                x: [1, 2, 3, 4, 5, 8, 9, 10].map(NodeId).to_vec(),
                gamma: vec![NodeId(11)],
            },
        );
        let json = serde_json::to_string(&cert).unwrap();
        assert_eq!(
            json,
            r#"{"t":2,"verdict":"not_diagnosable","failed":"cond_iii","witness":{"p":1,"X":[1,2,3,4,5,8,9,10],"gamma":[11]}}"#
        );
        let back: DiagnosabilityCertificate = serde_json::from_str(&json).unwrap();
        assert_eq!(back, cert);
    }

    #[test]
    fn tampered_witness_is_rejected() {
        let g = five_cycle();
        let bogus = DiagnosabilityCertificate::failed(
            1,
            FailedCondition::CondIII,
            Witness::Subset {
                p: 0,
                x: [1, 2, 3].map(NodeId).to_vec(),
                gamma: vec![],
            },
        );
        assert!(!verify_certificate(&g, &bogus).unwrap());
    }
}

//! Fault identification from a syndrome.
//!
//! `identify` runs a branch-and-bound search over node states. Every failing
//! test `(i, j)` needs `i` or `j` faulty, so the search branches on the
//! tester of an uncovered failing test (faulty, or fault-free which forces
//! the testee faulty), then on any remaining undecided node. Fault-free
//! testers force the state of everything they test; that propagation does
//! most of the pruning. Branches stop once more than `t` nodes are faulty.
//!
//! `all_consistent_fault_sets` is the brute-force counterpart used as an
//! oracle.

use std::collections::BTreeMap;

use serde::{Serialize, Serializer};

use crate::combinatorics::for_each_combination;
use crate::diagnosability::DEFAULT_ORACLE_CAP;
use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, NodeId};
use crate::syndrome::{pmc_compatible_aligned, FaultSet, Syndrome};

pub const DEFAULT_CANDIDATE_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DiagnosisVerdict {
    Unique(FaultSet),
    /// `candidates` holds at most the configured limit; `count` is the total.
    Ambiguous {
        count: usize,
        candidates: Vec<FaultSet>,
    },
    Inconsistent,
}

impl DiagnosisVerdict {
    pub fn is_unique(&self) -> bool {
        matches!(self, DiagnosisVerdict::Unique(_))
    }

    pub fn kind(&self) -> &'static str {
        match self {
            DiagnosisVerdict::Unique(_) => "unique",
            DiagnosisVerdict::Ambiguous { .. } => "ambiguous",
            DiagnosisVerdict::Inconsistent => "inconsistent",
        }
    }
}

impl Serialize for DiagnosisVerdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(None)?;
        map.serialize_entry("kind", self.kind())?;
        match self {
            DiagnosisVerdict::Unique(f) => map.serialize_entry("fault_set", f)?,
            DiagnosisVerdict::Ambiguous { count, candidates } => {
                map.serialize_entry("count", count)?;
                map.serialize_entry("candidates", candidates)?;
            }
            DiagnosisVerdict::Inconsistent => {}
        }
        map.end()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum NodeStatus {
    KnownFaulty,
    KnownFaultFree,
    Unknown,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct NodeStatusReport {
    pub statuses: BTreeMap<NodeId, NodeStatus>,
    /// No fault set of size at most `t` explains the syndrome.
    pub inconsistent: bool,
}

impl NodeStatusReport {
    pub fn status(&self, id: NodeId) -> Option<NodeStatus> {
        self.statuses.get(&id).copied()
    }

    /// Derives statuses from a complete candidate list.
    pub fn from_candidates<I>(nodes: I, candidates: &[FaultSet]) -> Self
    where
        I: IntoIterator<Item = NodeId>,
    {
        let statuses = nodes
            .into_iter()
            .map(|id| {
                let hits = candidates.iter().filter(|c| c.contains(id)).count();
                let status = if candidates.is_empty() {
                    NodeStatus::Unknown
                } else if hits == candidates.len() {
                    NodeStatus::KnownFaulty
                } else if hits == 0 {
                    NodeStatus::KnownFaultFree
                } else {
                    NodeStatus::Unknown
                };
                (id, status)
            })
            .collect();
        NodeStatusReport {
            statuses,
            inconsistent: candidates.is_empty(),
        }
    }
}

/// Every fault set of size at most `t` that is PMC-compatible with the
/// syndrome, by exhaustive enumeration. Ordered by size, then
/// lexicographically.
pub fn all_consistent_fault_sets(graph: &DiagnosticGraph, syndrome: &Syndrome, t: usize) -> Result<Vec<FaultSet>> {
    all_consistent_fault_sets_capped(graph, syndrome, t, DEFAULT_ORACLE_CAP)
}

pub fn all_consistent_fault_sets_capped(
    graph: &DiagnosticGraph,
    syndrome: &Syndrome,
    t: usize,
    cap: usize,
) -> Result<Vec<FaultSet>> {
    let n = graph.node_count();
    if n > cap {
        return Err(Error::OracleCap { n, cap });
    }
    let values = syndrome.aligned(graph)?;
    let mut out = Vec::new();
    let mut flags = vec![false; n];
    for k in 0..=t.min(n) {
        for_each_combination(n, k, |c| {
            flags.iter_mut().for_each(|f| *f = false);
            for &i in c {
                flags[i] = true;
            }
            if pmc_compatible_aligned(graph, &values, &flags) {
                out.push(FaultSet::from_indicator(graph, &flags));
            }
            true
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum State {
    Open,
    Faulty,
    Free,
}

struct Search<'a> {
    graph: &'a DiagnosticGraph,
    values: &'a [bool],
    t: usize,
    found: Vec<Vec<bool>>,
}

#[derive(Clone)]
struct Assignment {
    state: Vec<State>,
    faulty: usize,
}

impl Search<'_> {
    /// Assigns `v` and propagates forced states. Returns `false` on conflict
    /// or when the fault budget is exceeded.
    fn assign(&self, a: &mut Assignment, v: usize, s: State) -> bool {
        let mut queue = vec![(v, s)];
        while let Some((v, s)) = queue.pop() {
            match a.state[v] {
                State::Open => {}
                cur if cur == s => continue,
                _ => return false,
            }
            a.state[v] = s;
            match s {
                State::Faulty => {
                    a.faulty += 1;
                    if a.faulty > self.t {
                        return false;
                    }
                    // a fault-free tester of v must have reported 1
                    for &(i, k) in self.graph.in_adj(v) {
                        if !self.values[k] {
                            queue.push((i, State::Faulty));
                        }
                    }
                }
                State::Free => {
                    for &(j, k) in self.graph.out_adj(v) {
                        let forced = if self.values[k] { State::Faulty } else { State::Free };
                        queue.push((j, forced));
                    }
                    // a fault-free testee reported as failing implicates the tester
                    for &(i, k) in self.graph.in_adj(v) {
                        if self.values[k] {
                            queue.push((i, State::Faulty));
                        }
                    }
                }
                State::Open => unreachable!(),
            }
        }
        true
    }

    fn uncovered_failure(&self, a: &Assignment) -> Option<usize> {
        self.graph.edges().iter().enumerate().find_map(|(k, e)| {
            if !self.values[k] {
                return None;
            }
            let i = self.graph.index_of(e.tester).unwrap();
            let j = self.graph.index_of(e.testee).unwrap();
            (a.state[i] == State::Open && a.state[j] == State::Open).then_some(i)
        })
    }

    fn explore(&mut self, a: Assignment) {
        let pivot = match self.uncovered_failure(&a) {
            Some(i) => i,
            None => match a.state.iter().position(|&s| s == State::Open) {
                Some(v) => v,
                None => {
                    debug_assert!(pmc_compatible_aligned(
                        self.graph,
                        self.values,
                        &a.state.iter().map(|&s| s == State::Faulty).collect::<Vec<_>>()
                    ));
                    self.found
                        .push(a.state.iter().map(|&s| s == State::Faulty).collect());
                    return;
                }
            },
        };
        if a.faulty < self.t {
            let mut faulty = a.clone();
            if self.assign(&mut faulty, pivot, State::Faulty) {
                self.explore(faulty);
            }
        }
        let mut free = a;
        if self.assign(&mut free, pivot, State::Free) {
            self.explore(free);
        }
    }
}

/// All candidates via branch and bound, in canonical order.
pub fn candidate_fault_sets(graph: &DiagnosticGraph, syndrome: &Syndrome, t: usize) -> Result<Vec<FaultSet>> {
    let values = syndrome.aligned(graph)?;
    let mut search = Search {
        graph,
        values: &values,
        t,
        found: Vec::new(),
    };
    search.explore(Assignment {
        state: vec![State::Open; graph.node_count()],
        faulty: 0,
    });
    let mut out: Vec<FaultSet> = search
        .found
        .iter()
        .map(|flags| FaultSet::from_indicator(graph, flags))
        .collect();
    out.sort();
    Ok(out)
}

fn verdict_from(mut candidates: Vec<FaultSet>, limit: usize) -> DiagnosisVerdict {
    match candidates.len() {
        0 => DiagnosisVerdict::Inconsistent,
        1 => DiagnosisVerdict::Unique(candidates.pop().unwrap()),
        count => {
            candidates.truncate(limit);
            DiagnosisVerdict::Ambiguous { count, candidates }
        }
    }
}

/// Whether a unique verdict can be guaranteed at all for this `t`
/// (`n >= 2t + 1`). Identification beyond it is allowed for audits.
pub fn within_diagnosability_range(graph: &DiagnosticGraph, t: usize) -> bool {
    graph.node_count() > 2 * t
}

pub fn identify(graph: &DiagnosticGraph, syndrome: &Syndrome, t: usize) -> Result<DiagnosisVerdict> {
    identify_with_limit(graph, syndrome, t, DEFAULT_CANDIDATE_LIMIT)
}

pub fn identify_with_limit(
    graph: &DiagnosticGraph,
    syndrome: &Syndrome,
    t: usize,
    limit: usize,
) -> Result<DiagnosisVerdict> {
    if !within_diagnosability_range(graph, t) {
        log::warn!(
            "t = {t} exceeds (n-1)/2 for n = {}; a unique verdict is not guaranteed to be the true fault set",
            graph.node_count()
        );
    }
    Ok(verdict_from(candidate_fault_sets(graph, syndrome, t)?, limit))
}

pub fn node_status(graph: &DiagnosticGraph, syndrome: &Syndrome, t: usize) -> Result<NodeStatusReport> {
    let candidates = candidate_fault_sets(graph, syndrome, t)?;
    Ok(NodeStatusReport::from_candidates(graph.node_ids(), &candidates))
}

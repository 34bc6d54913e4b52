//! Syndromes, fault sets and the two consistency predicates.
//!
//! `is_consistent_fault_set` checks the three textbook conditions (budget,
//! every failing test touches a fault, fault-free pairs pass). `pmc_compatible`
//! is the strict model used everywhere else: a fault-free tester reports 1
//! exactly when its testee is faulty, and faulty testers are unconstrained.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, NodeId};

/// A hypothesised or inferred set of faulty nodes.
///
/// Ordered by cardinality first, then lexicographically on sorted members.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct FaultSet(BTreeSet<NodeId>);

impl FaultSet {
    pub fn new() -> Self {
        FaultSet(BTreeSet::new())
    }

    pub fn from_ids<I: IntoIterator<Item = u32>>(ids: I) -> Self {
        FaultSet(ids.into_iter().map(NodeId).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.0.contains(&id)
    }

    pub fn insert(&mut self, id: NodeId) -> bool {
        self.0.insert(id)
    }

    pub fn iter(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.0.iter().copied()
    }

    pub fn members(&self) -> &BTreeSet<NodeId> {
        &self.0
    }

    /// Membership flags over the graph's dense node index.
    pub(crate) fn indicator(&self, graph: &DiagnosticGraph) -> Result<Vec<bool>> {
        let mut flags = vec![false; graph.node_count()];
        for id in self.iter() {
            flags[graph.index_checked(id)?] = true;
        }
        Ok(flags)
    }

    pub(crate) fn from_indicator(graph: &DiagnosticGraph, flags: &[bool]) -> FaultSet {
        FaultSet(
            flags
                .iter()
                .enumerate()
                .filter(|(_, &f)| f)
                .map(|(k, _)| graph.id_at(k))
                .collect(),
        )
    }

    pub(crate) fn from_mask(graph: &DiagnosticGraph, mask: u64) -> FaultSet {
        FaultSet(
            (0..graph.node_count())
                .filter(|&k| mask >> k & 1 == 1)
                .map(|k| graph.id_at(k))
                .collect(),
        )
    }
}

impl FromIterator<NodeId> for FaultSet {
    fn from_iter<T: IntoIterator<Item = NodeId>>(iter: T) -> Self {
        FaultSet(iter.into_iter().collect())
    }
}

impl Ord for FaultSet {
    fn cmp(&self, other: &Self) -> Ordering {
        self.len()
            .cmp(&other.len())
            .then_with(|| self.0.iter().cmp(other.0.iter()))
    }
}

impl PartialOrd for FaultSet {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for FaultSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, id) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{id}")?;
        }
        f.write_str("}")
    }
}

/// Test outcomes keyed by `(tester, testee)`; `true` means fail.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Syndrome {
    outcomes: BTreeMap<(NodeId, NodeId), bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct OutcomeRecord {
    tester: NodeId,
    testee: NodeId,
    value: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SyndromeDocument {
    outcomes: Vec<OutcomeRecord>,
}

impl Syndrome {
    /// Outcomes listed positionally in the graph's edge order.
    pub fn from_bits(graph: &DiagnosticGraph, bits: &[u8]) -> Result<Self> {
        if bits.len() != graph.edge_count() {
            let e = graph.edges()[bits.len().min(graph.edge_count().saturating_sub(1))];
            return Err(if bits.len() < graph.edge_count() {
                Error::MissingOutcome(e.tester, e.testee)
            } else {
                Error::BadNumber(format!("{} outcomes for {} edges", bits.len(), graph.edge_count()))
            });
        }
        let mut outcomes = BTreeMap::new();
        for (e, &b) in graph.edges().iter().zip(bits) {
            if b > 1 {
                return Err(Error::BadOutcome {
                    tester: e.tester,
                    testee: e.testee,
                    value: b as u64,
                });
            }
            outcomes.insert((e.tester, e.testee), b == 1);
        }
        Ok(Syndrome { outcomes })
    }

    pub(crate) fn from_aligned(graph: &DiagnosticGraph, values: &[bool]) -> Self {
        Syndrome {
            outcomes: graph
                .edges()
                .iter()
                .zip(values)
                .map(|(e, &v)| ((e.tester, e.testee), v))
                .collect(),
        }
    }

    pub fn all_pass(graph: &DiagnosticGraph) -> Self {
        Self::from_aligned(graph, &vec![false; graph.edge_count()])
    }

    /// Builds a syndrome from explicit `(tester, testee, outcome)` triples,
    /// rejecting duplicates.
    pub fn from_triples<I>(triples: I) -> Result<Self>
    where
        I: IntoIterator<Item = (NodeId, NodeId, bool)>,
    {
        let mut outcomes = BTreeMap::new();
        for (a, b, v) in triples {
            if outcomes.insert((a, b), v).is_some() {
                return Err(Error::DuplicateOutcome(a, b));
            }
        }
        Ok(Syndrome { outcomes })
    }

    pub fn get(&self, tester: NodeId, testee: NodeId) -> Option<bool> {
        self.outcomes.get(&(tester, testee)).copied()
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, NodeId, bool)> + '_ {
        self.outcomes.iter().map(|(&(a, b), &v)| (a, b, v))
    }

    /// Outcomes in graph edge order; fails unless the syndrome covers exactly
    /// the graph's edges.
    pub fn aligned(&self, graph: &DiagnosticGraph) -> Result<Vec<bool>> {
        let mut values = Vec::with_capacity(graph.edge_count());
        for e in graph.edges() {
            match self.get(e.tester, e.testee) {
                Some(v) => values.push(v),
                None => return Err(Error::MissingOutcome(e.tester, e.testee)),
            }
        }
        if self.outcomes.len() != graph.edge_count() {
            let (&(a, b), _) = self
                .outcomes
                .iter()
                .find(|(&(a, b), _)| graph.edge_between(a, b).is_none())
                .expect("extra outcome exists when counts differ");
            return Err(Error::ExtraOutcome(a, b));
        }
        Ok(values)
    }

    /// Outcomes as 0/1 in graph edge order.
    pub fn to_bits(&self, graph: &DiagnosticGraph) -> Result<Vec<u8>> {
        Ok(self.aligned(graph)?.into_iter().map(u8::from).collect())
    }

    /// Keeps only outcomes for edges of `graph` (which must all be present).
    pub fn restrict_to(&self, graph: &DiagnosticGraph) -> Result<Syndrome> {
        let values = graph
            .edges()
            .iter()
            .map(|e| {
                self.get(e.tester, e.testee)
                    .ok_or(Error::MissingOutcome(e.tester, e.testee))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_aligned(graph, &values))
    }

    pub fn to_json(&self) -> String {
        let doc = SyndromeDocument {
            outcomes: self
                .iter()
                .map(|(tester, testee, v)| OutcomeRecord {
                    tester,
                    testee,
                    value: v as u64,
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("syndrome serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: SyndromeDocument = serde_json::from_str(text)?;
        let mut triples = Vec::with_capacity(doc.outcomes.len());
        for r in doc.outcomes {
            if r.value > 1 {
                return Err(Error::BadOutcome {
                    tester: r.tester,
                    testee: r.testee,
                    value: r.value,
                });
            }
            triples.push((r.tester, r.testee, r.value == 1));
        }
        Self::from_triples(triples)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ConsistencyCondition {
    /// |F| <= t
    Budget,
    /// a failing test has no endpoint in F
    FailingTestTouchesFault,
    /// a test between two nodes outside F fails
    FaultFreePairPasses,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub consistent: bool,
    pub violated: Option<ConsistencyCondition>,
    pub witness_edge: Option<(NodeId, NodeId)>,
}

/// The three-condition consistent-fault-set test, with the first violation.
pub fn is_consistent_fault_set(
    graph: &DiagnosticGraph,
    syndrome: &Syndrome,
    faults: &FaultSet,
    t: usize,
) -> Result<ConsistencyReport> {
    let values = syndrome.aligned(graph)?;
    let in_f = faults.indicator(graph)?;
    if faults.len() > t {
        return Ok(ConsistencyReport {
            consistent: false,
            violated: Some(ConsistencyCondition::Budget),
            witness_edge: None,
        });
    }
    let touches = |e: &crate::graph::Edge| {
        in_f[graph.index_of(e.tester).unwrap()] || in_f[graph.index_of(e.testee).unwrap()]
    };
    for (e, &v) in graph.edges().iter().zip(&values) {
        if v && !touches(e) {
            return Ok(ConsistencyReport {
                consistent: false,
                violated: Some(ConsistencyCondition::FailingTestTouchesFault),
                witness_edge: Some((e.tester, e.testee)),
            });
        }
    }
    // Contrapositive of the previous loop; kept so each condition is checked
    // as stated.
    for (e, &v) in graph.edges().iter().zip(&values) {
        if !touches(e) && v {
            return Ok(ConsistencyReport {
                consistent: false,
                violated: Some(ConsistencyCondition::FaultFreePairPasses),
                witness_edge: Some((e.tester, e.testee)),
            });
        }
    }
    Ok(ConsistencyReport {
        consistent: true,
        violated: None,
        witness_edge: None,
    })
}

/// Strict PMC compatibility of `faults` with `syndrome`.
pub fn pmc_compatible(graph: &DiagnosticGraph, syndrome: &Syndrome, faults: &FaultSet) -> Result<bool> {
    let values = syndrome.aligned(graph)?;
    let in_f = faults.indicator(graph)?;
    Ok(pmc_compatible_aligned(graph, &values, &in_f))
}

pub(crate) fn pmc_compatible_aligned(graph: &DiagnosticGraph, values: &[bool], in_f: &[bool]) -> bool {
    (0..graph.node_count()).filter(|&i| !in_f[i]).all(|i| {
        graph
            .out_adj(i)
            .iter()
            .all(|&(j, k)| values[k] == in_f[j])
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn five_cycle() -> DiagnosticGraph {
        DiagnosticGraph::from_pairs(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]).unwrap()
    }

    #[test]
    fn consistent_fault_set_examples() {
        let g = five_cycle();
        let s = Syndrome::from_bits(&g, &[0, 0, 0, 0, 1]).unwrap();
        let r = is_consistent_fault_set(&g, &s, &FaultSet::from_ids([1]), 1).unwrap();
        assert!(r.consistent);

        let r = is_consistent_fault_set(&g, &s, &FaultSet::new(), 1).unwrap();
        assert!(!r.consistent);
        assert_eq!(r.violated, Some(ConsistencyCondition::FailingTestTouchesFault));
        assert_eq!(r.witness_edge, Some((NodeId(5), NodeId(1))));

        let s = Syndrome::from_bits(&g, &[0, 1, 0, 0, 1]).unwrap();
        assert!(is_consistent_fault_set(&g, &s, &FaultSet::from_ids([1, 3]), 2)
            .unwrap()
            .consistent);
        let r = is_consistent_fault_set(&g, &s, &FaultSet::from_ids([1, 3]), 1).unwrap();
        assert_eq!(r.violated, Some(ConsistencyCondition::Budget));
    }

    #[test]
    fn pmc_examples() {
        let g = five_cycle();
        let s = Syndrome::from_bits(&g, &[0, 0, 0, 0, 1]).unwrap();
        assert!(pmc_compatible(&g, &s, &FaultSet::from_ids([1])).unwrap());
        assert!(!pmc_compatible(&g, &s, &FaultSet::from_ids([2])).unwrap());
        let s = Syndrome::from_bits(&g, &[0, 1, 0, 0, 1]).unwrap();
        assert!(pmc_compatible(&g, &s, &FaultSet::from_ids([1, 2])).unwrap());
    }

    #[test]
    fn non_total_syndrome_is_rejected() {
        let g = five_cycle();
        let partial = Syndrome::from_triples([(NodeId(1), NodeId(2), false)]).unwrap();
        assert!(matches!(
            pmc_compatible(&g, &partial, &FaultSet::new()),
            Err(Error::MissingOutcome(..))
        ));
        let mut triples: Vec<_> = Syndrome::all_pass(&g).iter().collect();
        triples.push((NodeId(2), NodeId(1), false));
        let extra = Syndrome::from_triples(triples).unwrap();
        assert!(matches!(extra.aligned(&g), Err(Error::ExtraOutcome(..))));
    }

    #[test]
    fn json_rejects_duplicates_and_bad_values() {
        let dup = r#"{"outcomes":[{"tester":1,"testee":2,"value":0},{"tester":1,"testee":2,"value":1}]}"#;
        assert!(matches!(Syndrome::from_json(dup), Err(Error::DuplicateOutcome(..))));
        let bad = r#"{"outcomes":[{"tester":1,"testee":2,"value":2}]}"#;
        assert!(matches!(Syndrome::from_json(bad), Err(Error::BadOutcome { .. })));
    }

    #[test]
    fn fault_set_order() {
        let mut v = vec![
            FaultSet::from_ids([1, 3]),
            FaultSet::from_ids([2]),
            FaultSet::from_ids([1, 2]),
            FaultSet::new(),
        ];
        v.sort();
        assert_eq!(
            v,
            vec![
                FaultSet::new(),
                FaultSet::from_ids([2]),
                FaultSet::from_ids([1, 2]),
                FaultSet::from_ids([1, 3])
            ]
        );
    }
}

//! Diagnostic graphs: modules as nodes, test assignments as directed edges.
//!
//! An edge `(i, j)` means module `i` tests module `j`. Nodes are kept sorted
//! by id and addressed internally through a dense index `0..n`, which is what
//! the enumeration code in the rest of the crate works with.

use std::collections::{BTreeSet, HashMap, HashSet};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::rational::Rational;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// Which consistency function motivates a test. Informational only.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub enum EdgeKind {
    InputAdmissibility,
    OutputAdmissibility,
    InputConsistency,
    OutputConsistency,
    InputOutputConsistency,
    Temporal,
    #[default]
    Unspecified,
}

impl EdgeKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::InputAdmissibility => "input_admissibility",
            EdgeKind::OutputAdmissibility => "output_admissibility",
            EdgeKind::InputConsistency => "input_consistency",
            EdgeKind::OutputConsistency => "output_consistency",
            EdgeKind::InputOutputConsistency => "input_output_consistency",
            EdgeKind::Temporal => "temporal",
            EdgeKind::Unspecified => "unspecified",
        }
    }

    /// Unknown names map to `Unspecified` (and log a warning).
    pub fn parse_lenient(s: &str) -> EdgeKind {
        match s {
            "input_admissibility" => EdgeKind::InputAdmissibility,
            "output_admissibility" => EdgeKind::OutputAdmissibility,
            "input_consistency" => EdgeKind::InputConsistency,
            "output_consistency" => EdgeKind::OutputConsistency,
            "input_output_consistency" => EdgeKind::InputOutputConsistency,
            "temporal" => EdgeKind::Temporal,
            "unspecified" => EdgeKind::Unspecified,
            other => {
                log::warn!("unknown edge kind `{other}`, treating as unspecified");
                EdgeKind::Unspecified
            }
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl Serialize for EdgeKind {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for EdgeKind {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        Ok(EdgeKind::parse_lenient(&s))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Node {
    pub id: NodeId,
    #[serde(default)]
    pub label: String,
    #[serde(rename = "hz", default, skip_serializing_if = "Option::is_none")]
    pub frequency_hz: Option<Rational>,
}

impl Node {
    pub fn new(id: u32, label: impl Into<String>) -> Self {
        Node {
            id: NodeId(id),
            label: label.into(),
            frequency_hz: None,
        }
    }

    pub fn with_hz(mut self, hz: Rational) -> Self {
        self.frequency_hz = Some(hz);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Edge {
    pub tester: NodeId,
    pub testee: NodeId,
    #[serde(default)]
    pub kind: EdgeKind,
}

impl Edge {
    pub fn new(tester: u32, testee: u32) -> Self {
        Edge {
            tester: NodeId(tester),
            testee: NodeId(testee),
            kind: EdgeKind::Unspecified,
        }
    }

    pub fn with_kind(mut self, kind: EdgeKind) -> Self {
        self.kind = kind;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    SelfLoop { node: NodeId },
    DuplicateEdge { tester: NodeId, testee: NodeId },
    DanglingEndpoint { tester: NodeId, testee: NodeId, missing: NodeId },
    DuplicateNodeId { id: NodeId },
    NonPositiveFrequency { id: NodeId },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::SelfLoop { node } => write!(f, "self-loop at node {node}"),
            Violation::DuplicateEdge { tester, testee } => {
                write!(f, "duplicate edge ({tester},{testee})")
            }
            Violation::DanglingEndpoint {
                tester,
                testee,
                missing,
            } => write!(
                f,
                "dangling endpoint: edge ({tester},{testee}) references undeclared node {missing}"
            ),
            Violation::DuplicateNodeId { id } => write!(f, "duplicate node id {id}"),
            Violation::NonPositiveFrequency { id } => {
                write!(f, "node {id} has a non-positive frequency")
            }
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_valid(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return f.write_str("no violations");
        }
        for (k, v) in self.violations.iter().enumerate() {
            if k > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// Checks raw node and edge lists for structural problems.
pub fn validate(nodes: &[Node], edges: &[Edge]) -> ValidationReport {
    let mut violations = Vec::new();
    let mut ids = HashSet::new();
    for node in nodes {
        if !ids.insert(node.id) {
            violations.push(Violation::DuplicateNodeId { id: node.id });
        }
        if let Some(hz) = node.frequency_hz {
            if !hz.is_positive() {
                violations.push(Violation::NonPositiveFrequency { id: node.id });
            }
        }
    }
    let mut seen = HashSet::new();
    for e in edges {
        if e.tester == e.testee {
            violations.push(Violation::SelfLoop { node: e.tester });
        }
        for end in [e.tester, e.testee] {
            if !ids.contains(&end) {
                violations.push(Violation::DanglingEndpoint {
                    tester: e.tester,
                    testee: e.testee,
                    missing: end,
                });
                if e.tester == e.testee {
                    break;
                }
            }
        }
        if !seen.insert((e.tester, e.testee)) {
            violations.push(Violation::DuplicateEdge {
                tester: e.tester,
                testee: e.testee,
            });
        }
    }
    ValidationReport { violations }
}

/// A validated diagnostic graph.
#[derive(Debug, Clone)]
pub struct DiagnosticGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    index: HashMap<NodeId, usize>,
    // (neighbour index, edge index)
    out_adj: Vec<Vec<(usize, usize)>>,
    in_adj: Vec<Vec<(usize, usize)>>,
    edge_lookup: HashMap<(usize, usize), usize>,
}

impl PartialEq for DiagnosticGraph {
    fn eq(&self, other: &Self) -> bool {
        self.nodes == other.nodes && self.edges == other.edges
    }
}

impl Eq for DiagnosticGraph {}

impl DiagnosticGraph {
    /// Builds a graph, rejecting anything `validate` would report.
    ///
    /// Nodes are re-ordered by id; edge order is preserved and defines the
    /// positional order of syndromes.
    pub fn new(mut nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self> {
        let report = validate(&nodes, &edges);
        if !report.is_valid() {
            return Err(Error::InvalidGraph(report));
        }
        nodes.sort_by_key(|n| n.id);
        let index: HashMap<NodeId, usize> =
            nodes.iter().enumerate().map(|(k, n)| (n.id, k)).collect();
        let mut out_adj = vec![Vec::new(); nodes.len()];
        let mut in_adj = vec![Vec::new(); nodes.len()];
        let mut edge_lookup = HashMap::with_capacity(edges.len());
        for (k, e) in edges.iter().enumerate() {
            let i = index[&e.tester];
            let j = index[&e.testee];
            out_adj[i].push((j, k));
            in_adj[j].push((i, k));
            edge_lookup.insert((i, j), k);
        }
        Ok(DiagnosticGraph {
            nodes,
            edges,
            index,
            out_adj,
            in_adj,
            edge_lookup,
        })
    }

    /// Unlabelled graph on ids `1..=n` from `(tester, testee)` pairs.
    pub fn from_pairs(n: u32, pairs: &[(u32, u32)]) -> Result<Self> {
        let nodes = (1..=n).map(|i| Node::new(i, format!("n{i}"))).collect();
        let edges = pairs.iter().map(|&(a, b)| Edge::new(a, b)).collect();
        Self::new(nodes, edges)
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    pub fn node(&self, id: NodeId) -> Option<&Node> {
        self.index.get(&id).map(|&k| &self.nodes[k])
    }

    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    pub fn index_of(&self, id: NodeId) -> Option<usize> {
        self.index.get(&id).copied()
    }

    pub(crate) fn index_checked(&self, id: NodeId) -> Result<usize> {
        self.index_of(id).ok_or(Error::UnknownNode(id))
    }

    pub fn id_at(&self, idx: usize) -> NodeId {
        self.nodes[idx].id
    }

    pub fn edge_between(&self, tester: NodeId, testee: NodeId) -> Option<usize> {
        let i = self.index_of(tester)?;
        let j = self.index_of(testee)?;
        self.edge_lookup.get(&(i, j)).copied()
    }

    pub(crate) fn out_adj(&self, idx: usize) -> &[(usize, usize)] {
        &self.out_adj[idx]
    }

    pub(crate) fn in_adj(&self, idx: usize) -> &[(usize, usize)] {
        &self.in_adj[idx]
    }

    pub fn in_degree(&self, id: NodeId) -> Option<usize> {
        self.index_of(id).map(|k| self.in_adj[k].len())
    }

    pub fn out_neighbors(&self, id: NodeId) -> Option<BTreeSet<NodeId>> {
        let k = self.index_of(id)?;
        Some(self.out_adj[k].iter().map(|&(j, _)| self.id_at(j)).collect())
    }

    /// Minimum in-degree and every node attaining it.
    pub fn min_in_degree(&self) -> Result<(usize, BTreeSet<NodeId>)> {
        let value = self
            .in_adj
            .iter()
            .map(Vec::len)
            .min()
            .ok_or(Error::EmptyGraph)?;
        let attaining = (0..self.node_count())
            .filter(|&k| self.in_adj[k].len() == value)
            .map(|k| self.id_at(k))
            .collect();
        Ok((value, attaining))
    }

    /// Out-neighbours of `set`, excluding members of `set`.
    pub fn testable_set<'a, I>(&self, set: I) -> Result<BTreeSet<NodeId>>
    where
        I: IntoIterator<Item = &'a NodeId>,
    {
        let mut member = vec![false; self.node_count()];
        for &id in set {
            member[self.index_checked(id)?] = true;
        }
        let mut out = BTreeSet::new();
        for (i, _) in member.iter().enumerate().filter(|(_, &m)| m) {
            for &(j, _) in &self.out_adj[i] {
                if !member[j] {
                    out.insert(self.id_at(j));
                }
            }
        }
        Ok(out)
    }

    /// The largest subgraph with vertex set `keep` (ids not in the graph are
    /// an error).
    pub fn induced_subgraph(&self, keep: &BTreeSet<NodeId>) -> Result<DiagnosticGraph> {
        for &id in keep {
            self.index_checked(id)?;
        }
        let nodes = self
            .nodes
            .iter()
            .filter(|n| keep.contains(&n.id))
            .cloned()
            .collect();
        let edges = self
            .edges
            .iter()
            .filter(|e| keep.contains(&e.tester) && keep.contains(&e.testee))
            .copied()
            .collect();
        DiagnosticGraph::new(nodes, edges)
    }
}

//! Temporal diagnostic graphs.
//!
//! A base graph sampled at `hz` over a closed interval `[a, b]` yields one
//! pane (a copy of the base graph) per sample time `k / hz` in the interval.
//! Panes are linked by cross-time test edges according to a
//! [`TemporalTemplate`]. The default template (offset 1, forward only, same
//! base node) gives the minimal construction: `m + 1` panes carry
//! `m * |U|` temporal edges and `(m + 1) * |E|` pane edges.
//!
//! Expanded vertices get ids `(k - k0) * |U| + index(u)` where `k0` is the
//! first pane of the expansion; restriction keeps those ids so a syndrome on
//! the full graph restricts by edge lookup.

use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;

use serde::{Deserialize, Serialize, Serializer};

use crate::combinatorics::for_each_combination;
use crate::diagnosability::{diagnosability_bounds, max_diagnosability_capped, DEFAULT_EXACT_CAP};
use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, Edge, EdgeKind, Node, NodeId};
use crate::identification::{candidate_fault_sets, NodeStatus, NodeStatusReport};
use crate::io::GraphDocument;
use crate::rational::Rational;
use crate::syndrome::{pmc_compatible_aligned, FaultSet, Syndrome};

/// Closed time interval in seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Interval {
    pub a: Rational,
    pub b: Rational,
}

impl Interval {
    pub fn new(a: Rational, b: Rational) -> Result<Self> {
        if a > b {
            return Err(Error::BadInterval {
                a: a.to_f64(),
                b: b.to_f64(),
            });
        }
        Ok(Interval { a, b })
    }

    pub fn from_f64(a: f64, b: f64) -> Result<Self> {
        Self::new(Rational::from_f64(a)?, Rational::from_f64(b)?)
    }

    pub fn contains_time(&self, t: Rational) -> bool {
        self.a <= t && t <= self.b
    }

    pub fn contains(&self, other: &Interval) -> bool {
        self.a <= other.a && other.b <= self.b
    }

    /// First and last pane index `k` with `k / hz` inside the interval.
    pub fn pane_range(&self, hz: Rational) -> Option<(i64, i64)> {
        let first = (self.a * hz).ceil_int();
        let last = (self.b * hz).floor_int();
        (first <= last).then_some((first, last))
    }
}

impl std::fmt::Display for Interval {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "[{}, {}]", self.a, self.b)
    }
}

impl Serialize for Interval {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        [self.a, self.b].serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Interval {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let [a, b] = <[Rational; 2]>::deserialize(deserializer)?;
        Interval::new(a, b).map_err(serde::de::Error::custom)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemporalTemplate {
    /// Pane distances that carry cross-time tests.
    pub offsets: BTreeSet<u32>,
    #[serde(default)]
    pub bidirectional: bool,
    /// Cross-time tests only between copies of the same base node.
    #[serde(rename = "identity_only", default = "default_true")]
    pub base_identity_only: bool,
}

fn default_true() -> bool {
    true
}

impl Default for TemporalTemplate {
    fn default() -> Self {
        TemporalTemplate {
            offsets: BTreeSet::from([1]),
            bidirectional: false,
            base_identity_only: true,
        }
    }
}

impl TemporalTemplate {
    pub fn new<I: IntoIterator<Item = u32>>(offsets: I, bidirectional: bool, base_identity_only: bool) -> Result<Self> {
        let t = TemporalTemplate {
            offsets: offsets.into_iter().collect(),
            bidirectional,
            base_identity_only,
        };
        t.check()?;
        Ok(t)
    }

    fn check(&self) -> Result<()> {
        if self.offsets.is_empty() {
            return Err(Error::BadTemplate("offsets must be nonempty".into()));
        }
        if self.offsets.contains(&0) {
            return Err(Error::BadTemplate("offsets must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct TemporalVertex {
    pub pane: i64,
    pub base: NodeId,
    pub time: Rational,
}

impl TemporalVertex {
    pub fn name(&self) -> String {
        format!("{}:{}", self.pane, self.base)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TemporalGraph {
    base: DiagnosticGraph,
    interval: Interval,
    hz: Rational,
    template: TemporalTemplate,
    graph: DiagnosticGraph,
    vertices: BTreeMap<NodeId, TemporalVertex>,
}

/// Replicates `base` once per sample time in `interval` and adds the
/// template's cross-time edges.
pub fn expand(
    base: &DiagnosticGraph,
    hz: Rational,
    interval: Interval,
    template: &TemporalTemplate,
) -> Result<TemporalGraph> {
    if !hz.is_positive() {
        return Err(Error::NonPositiveFrequency);
    }
    template.check()?;
    let (first, last) = interval.pane_range(hz).ok_or(Error::EmptyExpansion {
        a: interval.a.to_f64(),
        b: interval.b.to_f64(),
        hz: hz.to_f64(),
    })?;
    let width = base.node_count() as i64;
    let vid = |k: i64, u: usize| NodeId(((k - first) * width + u as i64) as u32);

    let mut vertices = BTreeMap::new();
    let mut nodes = Vec::new();
    for k in first..=last {
        for (u, node) in base.nodes().iter().enumerate() {
            let v = TemporalVertex {
                pane: k,
                base: node.id,
                time: Rational::integer(k) / hz,
            };
            let mut copy = Node::new(vid(k, u).0, v.name());
            copy.frequency_hz = node.frequency_hz;
            nodes.push(copy);
            vertices.insert(vid(k, u), v);
        }
    }

    let mut edges = Vec::new();
    for k in first..=last {
        for e in base.edges() {
            let i = base.index_of(e.tester).unwrap();
            let j = base.index_of(e.testee).unwrap();
            edges.push(Edge {
                tester: vid(k, i),
                testee: vid(k, j),
                kind: e.kind,
            });
        }
    }
    let temporal = |a: NodeId, b: NodeId| Edge {
        tester: a,
        testee: b,
        kind: EdgeKind::Temporal,
    };
    for k1 in first..=last {
        for &d in &template.offsets {
            let k2 = k1 + d as i64;
            if k2 > last {
                continue;
            }
            for u in 0..base.node_count() {
                edges.push(temporal(vid(k1, u), vid(k2, u)));
                if template.bidirectional {
                    edges.push(temporal(vid(k2, u), vid(k1, u)));
                }
            }
            if !template.base_identity_only {
                for e in base.edges() {
                    let i = base.index_of(e.tester).unwrap();
                    let j = base.index_of(e.testee).unwrap();
                    edges.push(temporal(vid(k1, i), vid(k2, j)));
                    if template.bidirectional {
                        edges.push(temporal(vid(k2, i), vid(k1, j)));
                    }
                }
            }
        }
    }
    Ok(TemporalGraph {
        base: base.clone(),
        interval,
        hz,
        template: template.clone(),
        graph: DiagnosticGraph::new(nodes, edges)?,
        vertices,
    })
}

impl TemporalGraph {
    pub fn base(&self) -> &DiagnosticGraph {
        &self.base
    }

    pub fn interval(&self) -> Interval {
        self.interval
    }

    pub fn hz(&self) -> Rational {
        self.hz
    }

    pub fn template(&self) -> &TemporalTemplate {
        &self.template
    }

    /// The expanded graph, usable with every static analysis.
    pub fn graph(&self) -> &DiagnosticGraph {
        &self.graph
    }

    pub fn vertex(&self, id: NodeId) -> Option<&TemporalVertex> {
        self.vertices.get(&id)
    }

    pub fn vertices(&self) -> impl Iterator<Item = (NodeId, &TemporalVertex)> {
        self.vertices.iter().map(|(&id, v)| (id, v))
    }

    pub fn panes(&self) -> Vec<i64> {
        let set: BTreeSet<i64> = self.vertices.values().map(|v| v.pane).collect();
        set.into_iter().collect()
    }

    pub fn pane_count(&self) -> usize {
        self.panes().len()
    }

    /// Vertex ids standing for `base` in this graph, by pane.
    pub fn copies_of(&self, base: NodeId) -> Vec<NodeId> {
        self.vertices
            .iter()
            .filter(|(_, v)| v.base == base)
            .map(|(&id, _)| id)
            .collect()
    }

    /// Every copy of every member of `base_faults`.
    pub fn lift(&self, base_faults: &FaultSet) -> FaultSet {
        self.vertices
            .iter()
            .filter(|(_, v)| base_faults.contains(v.base))
            .map(|(&id, _)| id)
            .collect()
    }

    /// Keeps vertices anchored inside `sub` and the edges among them.
    pub fn restrict(&self, sub: Interval) -> Result<TemporalGraph> {
        if !self.interval.contains(&sub) {
            return Err(Error::NotContained {
                a: sub.a.to_f64(),
                b: sub.b.to_f64(),
                outer_a: self.interval.a.to_f64(),
                outer_b: self.interval.b.to_f64(),
            });
        }
        let keep: BTreeSet<NodeId> = self
            .vertices
            .iter()
            .filter(|(_, v)| sub.contains_time(v.time))
            .map(|(&id, _)| id)
            .collect();
        Ok(TemporalGraph {
            base: self.base.clone(),
            interval: sub,
            hz: self.hz,
            template: self.template.clone(),
            graph: self.graph.induced_subgraph(&keep)?,
            vertices: self
                .vertices
                .iter()
                .filter(|(id, _)| keep.contains(id))
                .map(|(&id, &v)| (id, v))
                .collect(),
        })
    }

    pub fn to_dot(&self, syndrome: Option<&Syndrome>) -> String {
        let name = |id: NodeId| {
            self.vertex(id)
                .map(TemporalVertex::name)
                .unwrap_or_else(|| id.to_string())
        };
        crate::io::to_dot(&self.graph, syndrome, Some(&name))
    }

    pub fn to_document(&self) -> TemporalDocument {
        TemporalDocument {
            base: BaseRef::Inline(GraphDocument::from(&self.base)),
            interval: self.interval,
            hz: self.hz,
            template: self.template.clone(),
            expanded: Some(GraphDocument::from(&self.graph)),
        }
    }
}

/// Where a temporal document gets its base graph from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BaseRef {
    /// Path to a graph JSON file, relative to the document.
    Path(String),
    Inline(GraphDocument),
}

/// On-disk form of a temporal graph. `expanded` is written for consumers
/// and ignored on load: the graph is always rebuilt from base and template.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TemporalDocument {
    pub base: BaseRef,
    pub interval: Interval,
    pub hz: Rational,
    #[serde(default)]
    pub template: TemporalTemplate,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub expanded: Option<GraphDocument>,
}

impl TemporalDocument {
    pub fn load(self, relative_to: Option<&Path>) -> Result<TemporalGraph> {
        let base = match self.base {
            BaseRef::Inline(doc) => doc.into_graph()?,
            BaseRef::Path(p) => {
                let path = match relative_to {
                    Some(dir) => dir.join(p),
                    None => p.into(),
                };
                crate::io::graph_from_json(&std::fs::read_to_string(path)?)?
            }
        };
        expand(&base, self.hz, self.interval, &self.template)
    }
}

/// Induced subgraph on the nodes publishing at `f_min` Hz or faster.
pub fn frequency_subgraph(base: &DiagnosticGraph, f_min: Rational) -> Result<DiagnosticGraph> {
    let mut keep = BTreeSet::new();
    for n in base.nodes() {
        match n.frequency_hz {
            None => return Err(Error::MissingFrequency(n.id)),
            Some(hz) if hz >= f_min => {
                keep.insert(n.id);
            }
            Some(_) => {}
        }
    }
    if keep.is_empty() {
        log::warn!("no node publishes at {f_min} Hz or faster; frequency subgraph is empty");
    }
    base.induced_subgraph(&keep)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(untagged)]
pub enum ProfileValue {
    Exact { t: usize },
    /// Graph too large for the exact search.
    Bounds { lower: usize, upper: usize },
}

impl ProfileValue {
    pub fn exact(&self) -> Option<usize> {
        match *self {
            ProfileValue::Exact { t } => Some(t),
            ProfileValue::Bounds { .. } => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ProfileEntry {
    pub interval: Interval,
    pub panes: usize,
    pub nodes: usize,
    #[serde(flatten)]
    pub value: ProfileValue,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiagnosabilityProfile {
    pub entries: Vec<ProfileEntry>,
}

fn check_chain_descending(chain: &[Interval]) -> Result<()> {
    for w in chain.windows(2) {
        if !w[0].contains(&w[1]) {
            return Err(Error::NotNested(format!("{} does not contain {}", w[0], w[1])));
        }
    }
    Ok(())
}

fn diagnosability_value(graph: &DiagnosticGraph, cap: usize) -> Result<ProfileValue> {
    if graph.is_empty() {
        return Ok(ProfileValue::Exact { t: 0 });
    }
    match max_diagnosability_capped(graph, cap) {
        Ok(m) => Ok(ProfileValue::Exact { t: m.t_max }),
        Err(Error::ExactCap { .. }) => {
            let b = diagnosability_bounds(graph);
            Ok(if b.exact {
                ProfileValue::Exact { t: b.lower }
            } else {
                ProfileValue::Bounds {
                    lower: b.lower,
                    upper: b.upper,
                }
            })
        }
        Err(e) => Err(e),
    }
}

/// Diagnosability of the expansion over each interval of a chain ordered
/// from largest to smallest.
pub fn diagnosability_profile(
    base: &DiagnosticGraph,
    hz: Rational,
    template: &TemporalTemplate,
    chain: &[Interval],
) -> Result<DiagnosabilityProfile> {
    diagnosability_profile_capped(base, hz, template, chain, DEFAULT_EXACT_CAP)
}

pub fn diagnosability_profile_capped(
    base: &DiagnosticGraph,
    hz: Rational,
    template: &TemporalTemplate,
    chain: &[Interval],
    cap: usize,
) -> Result<DiagnosabilityProfile> {
    check_chain_descending(chain)?;
    let mut entries: Vec<ProfileEntry> = Vec::with_capacity(chain.len());
    for &interval in chain {
        let g = expand(base, hz, interval, template)?;
        let value = diagnosability_value(g.graph(), cap)?;
        if let (Some(prev), Some(t)) = (entries.last(), value.exact()) {
            if let Some(prev_t) = prev.value.exact() {
                if t > prev_t {
                    return Err(Error::ProfileNotMonotone(format!(
                        "t = {t} on {interval} exceeds t = {prev_t} on {}",
                        prev.interval
                    )));
                }
            }
        }
        entries.push(ProfileEntry {
            interval,
            panes: g.pane_count(),
            nodes: g.graph().node_count(),
            value,
        });
    }
    Ok(DiagnosabilityProfile { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum AuditMode {
    /// A base node is faulty in every pane of the window or in none.
    #[default]
    TimeConstant,
    /// Vertices are diagnosed independently; a base node is reported faulty
    /// if any of its copies is.
    Intermittent,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct WindowAudit {
    pub interval: Interval,
    pub panes: usize,
    /// Fault budget used for this window (vertex faults).
    pub t: usize,
    pub t_exact: bool,
    pub candidates: usize,
    pub inconsistent: bool,
    pub statuses: BTreeMap<NodeId, NodeStatus>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub vertex_statuses: Option<BTreeMap<String, NodeStatus>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct AuditReport {
    pub mode: AuditMode,
    pub windows: Vec<WindowAudit>,
}

impl AuditReport {
    /// Status of `base` in each window, smallest window first.
    pub fn history(&self, base: NodeId) -> Vec<NodeStatus> {
        self.windows
            .iter()
            .map(|w| w.statuses.get(&base).copied().unwrap_or(NodeStatus::Unknown))
            .collect()
    }
}

/// Re-runs diagnosis on growing windows of a temporal graph.
///
/// Each window uses the diagnosability number of its restriction as the
/// fault budget. `windows` must be nested, smallest first.
pub fn audit(g: &TemporalGraph, syndrome: &Syndrome, windows: &[Interval], mode: AuditMode) -> Result<AuditReport> {
    syndrome.aligned(g.graph())?;
    for w in windows.windows(2) {
        if !w[1].contains(&w[0]) {
            return Err(Error::NotNested(format!("{} is not contained in {}", w[0], w[1])));
        }
    }
    let mut out = Vec::with_capacity(windows.len());
    for &window in windows {
        let r = g.restrict(window)?;
        let sub = syndrome.restrict_to(r.graph())?;
        let (t, t_exact) = match diagnosability_value(r.graph(), DEFAULT_EXACT_CAP)? {
            ProfileValue::Exact { t } => (t, true),
            ProfileValue::Bounds { lower, .. } => (lower, false),
        };
        let panes = r.pane_count();
        let audit = match mode {
            AuditMode::TimeConstant => {
                let candidates = time_constant_candidates(&r, &sub, t)?;
                let report = NodeStatusReport::from_candidates(g.base().node_ids(), &candidates);
                WindowAudit {
                    interval: window,
                    panes,
                    t,
                    t_exact,
                    candidates: candidates.len(),
                    inconsistent: report.inconsistent,
                    statuses: report.statuses,
                    vertex_statuses: None,
                }
            }
            AuditMode::Intermittent => {
                let candidates = candidate_fault_sets(r.graph(), &sub, t)?;
                let report = NodeStatusReport::from_candidates(r.graph().node_ids(), &candidates);
                let statuses = g
                    .base()
                    .node_ids()
                    .map(|b| {
                        let copies: Vec<NodeStatus> = r
                            .copies_of(b)
                            .into_iter()
                            .map(|v| report.status(v).unwrap_or(NodeStatus::Unknown))
                            .collect();
                        let s = if copies.contains(&NodeStatus::KnownFaulty) {
                            NodeStatus::KnownFaulty
                        } else if !copies.is_empty() && copies.iter().all(|&s| s == NodeStatus::KnownFaultFree) {
                            NodeStatus::KnownFaultFree
                        } else {
                            NodeStatus::Unknown
                        };
                        (b, s)
                    })
                    .collect();
                let vertex_statuses = report
                    .statuses
                    .iter()
                    .map(|(id, &s)| (r.vertex(*id).map(TemporalVertex::name).unwrap_or_default(), s))
                    .collect();
                WindowAudit {
                    interval: window,
                    panes,
                    t,
                    t_exact,
                    candidates: candidates.len(),
                    inconsistent: report.inconsistent,
                    statuses,
                    vertex_statuses: Some(vertex_statuses),
                }
            }
        };
        out.push(audit);
    }
    Ok(AuditReport { mode, windows: out })
}

/// Base-node fault sets whose lift (every copy faulty) has at most `t`
/// vertices and is compatible with the syndrome.
fn time_constant_candidates(r: &TemporalGraph, syndrome: &Syndrome, t: usize) -> Result<Vec<FaultSet>> {
    let panes = r.pane_count();
    let base = r.base();
    if panes == 0 {
        return Ok(Vec::new());
    }
    let values = syndrome.aligned(r.graph())?;
    let max_size = (t / panes).min(base.node_count());
    let mut out = Vec::new();
    for k in 0..=max_size {
        for_each_combination(base.node_count(), k, |c| {
            let b: FaultSet = c.iter().map(|&i| base.id_at(i)).collect();
            let flags = r.lift(&b).indicator(r.graph()).expect("lifted ids belong to the graph");
            if pmc_compatible_aligned(r.graph(), &values, &flags) {
                out.push(b);
            }
            true
        });
    }
    Ok(out)
}

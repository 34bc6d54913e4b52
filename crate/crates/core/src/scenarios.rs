//! Bundled example graphs, re-verified on every load.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::diagnosability::{is_t_diagnosable, max_diagnosability, FailedCondition, Witness};
use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, Edge, EdgeKind, Node, NodeId};
use crate::rational::Rational;
use crate::temporal::frequency_subgraph;

pub const SCENARIO_NAMES: [&str; 3] = ["five_cycle", "localization", "pane_100hz"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Provenance {
    /// Stated explicitly for the original system.
    Stated,
    /// Chosen here so that every stated property holds.
    Reconstructed,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DocumentedProperty {
    pub property: String,
    pub expected: String,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, Serialize)]
pub struct Scenario {
    pub name: String,
    #[serde(skip)]
    pub graph: DiagnosticGraph,
    pub documented_properties: Vec<DocumentedProperty>,
}

fn prop(property: &str, expected: &str, provenance: Provenance) -> DocumentedProperty {
    DocumentedProperty {
        property: property.into(),
        expected: expected.into(),
        provenance,
    }
}

/// Directed cycle 1→2→3→4→5→1.
pub fn five_cycle_graph() -> DiagnosticGraph {
    DiagnosticGraph::from_pairs(5, &[(1, 2), (2, 3), (3, 4), (4, 5), (5, 1)]).expect("static graph")
}

const LOCALIZATION_NODES: [(u32, &str, i64); 11] = [
    (1, "GPS reader", 1),
    (2, "Map reader", 1),
    (3, "LIDAR reader", 5),
    (4, "IMU reader", 100),
    (5, "Camera reader", 20),
    (6, "GPS data processing", 1),
    (7, "HD map localization", 5),
    (8, "LIDAR registration", 5),
    (9, "IMU integration", 100),
    (10, "Visual odometry", 20),
    (11, "Pose-graph optimization", 100),
];

const LOCALIZATION_EDGES: [(u32, u32, EdgeKind); 24] = {
    use EdgeKind::*;
    [
        (6, 1, InputAdmissibility),
        (2, 1, OutputConsistency),
        (7, 2, InputAdmissibility),
        (1, 2, OutputConsistency),
        (7, 3, InputAdmissibility),
        (8, 3, InputAdmissibility),
        (9, 4, InputAdmissibility),
        (11, 4, InputOutputConsistency),
        (10, 5, InputAdmissibility),
        (11, 5, InputOutputConsistency),
        (7, 6, OutputConsistency),
        (11, 6, InputOutputConsistency),
        (11, 7, InputOutputConsistency),
        (6, 7, OutputConsistency),
        (11, 8, InputOutputConsistency),
        (10, 8, OutputConsistency),
        (11, 9, InputOutputConsistency),
        (4, 9, OutputAdmissibility),
        (8, 9, OutputConsistency),
        (11, 10, InputOutputConsistency),
        (9, 10, OutputConsistency),
        (9, 11, OutputAdmissibility),
        (10, 11, OutputAdmissibility),
        (8, 10, OutputConsistency),
    ]
};

/// The 11-module localization pipeline with publishing rates.
pub fn localization_graph() -> DiagnosticGraph {
    let nodes = LOCALIZATION_NODES
        .iter()
        .map(|&(id, label, hz)| Node::new(id, label).with_hz(Rational::integer(hz)))
        .collect();
    let edges = LOCALIZATION_EDGES
        .iter()
        .map(|&(a, b, kind)| Edge::new(a, b).with_kind(kind))
        .collect();
    DiagnosticGraph::new(nodes, edges).expect("static graph")
}

/// The 100 Hz tier of the localization pipeline.
pub fn pane_100hz_graph() -> DiagnosticGraph {
    frequency_subgraph(&localization_graph(), Rational::integer(100)).expect("all nodes carry rates")
}

fn ids(v: &BTreeSet<NodeId>) -> String {
    let parts: Vec<String> = v.iter().map(|i| i.to_string()).collect();
    format!("{{{}}}", parts.join(","))
}

/// Computes the current value of a documented property.
fn evaluate(graph: &DiagnosticGraph, property: &str) -> Result<String> {
    Ok(match property {
        "nodes" => graph.node_count().to_string(),
        "edges" => graph.edge_count().to_string(),
        "node_ids" => ids(&graph.node_ids().collect()),
        "min_in_degree" => graph.min_in_degree()?.0.to_string(),
        "min_in_degree_at_6" => graph.min_in_degree()?.1.contains(&NodeId(6)).to_string(),
        "t_max" => max_diagnosability(graph)?.t_max.to_string(),
        "gamma_1_2_3_4_5_8_9_10" => {
            let x: Vec<NodeId> = [1, 2, 3, 4, 5, 8, 9, 10].map(NodeId).to_vec();
            ids(&graph.testable_set(&x)?)
        }
        "t2_certificate" => {
            let c = is_t_diagnosable(graph, 2)?;
            match (c.failed, c.witness) {
                (Some(FailedCondition::CondIII), Some(Witness::Subset { p, x, gamma })) => format!(
                    "cond_iii p={p} X={} gamma={}",
                    ids(&x.into_iter().collect()),
                    ids(&gamma.into_iter().collect())
                ),
                (f, _) => format!("{f:?}"),
            }
        }
        "edges_10_5_8_3_2_1" => [(10, 5), (8, 3), (2, 1)]
            .iter()
            .all(|&(a, b)| graph.edge_between(NodeId(a), NodeId(b)).is_some())
            .to_string(),
        other => return Err(Error::ScenarioCheck {
            name: String::new(),
            detail: format!("unknown property `{other}`"),
        }),
    })
}

fn verified(name: &str, graph: DiagnosticGraph, documented_properties: Vec<DocumentedProperty>) -> Result<Scenario> {
    for p in &documented_properties {
        let actual = evaluate(&graph, &p.property).map_err(|e| Error::ScenarioCheck {
            name: name.into(),
            detail: e.to_string(),
        })?;
        if actual != p.expected {
            return Err(Error::ScenarioCheck {
                name: name.into(),
                detail: format!("{}: expected {}, found {}", p.property, p.expected, actual),
            });
        }
    }
    Ok(Scenario {
        name: name.into(),
        graph,
        documented_properties,
    })
}

/// Loads a bundled scenario by name and re-checks its documented properties.
pub fn scenario(name: &str) -> Result<Scenario> {
    use Provenance::*;
    match name {
        "five_cycle" => verified(
            name,
            five_cycle_graph(),
            vec![
                prop("nodes", "5", Stated),
                prop("edges", "5", Stated),
                prop("min_in_degree", "1", Stated),
                prop("t_max", "1", Stated),
            ],
        ),
        "localization" => verified(
            name,
            localization_graph(),
            vec![
                prop("nodes", "11", Stated),
                prop("edges", "24", Reconstructed),
                prop("edges_10_5_8_3_2_1", "true", Stated),
                prop("min_in_degree", "2", Stated),
                prop("min_in_degree_at_6", "true", Stated),
                prop("gamma_1_2_3_4_5_8_9_10", "{11}", Stated),
                prop("t_max", "1", Stated),
                prop("t2_certificate", "cond_iii p=1 X={1,2,3,4,5,8,9,10} gamma={11}", Stated),
            ],
        ),
        "pane_100hz" => verified(
            name,
            pane_100hz_graph(),
            vec![
                prop("node_ids", "{4,9,11}", Stated),
                prop("edges", "5", Reconstructed),
                prop("t_max", "1", Stated),
            ],
        ),
        other => Err(Error::UnknownScenario(other.into())),
    }
}

//! JSON graph documents and DOT export.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{validate, DiagnosticGraph, Edge, Node, NodeId, ValidationReport};
use crate::syndrome::Syndrome;

/// The on-disk graph shape, before validation.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct GraphDocument {
    pub nodes: Vec<Node>,
    pub edges: Vec<Edge>,
}

impl GraphDocument {
    pub fn parse(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn validate(&self) -> ValidationReport {
        validate(&self.nodes, &self.edges)
    }

    pub fn into_graph(self) -> Result<DiagnosticGraph> {
        DiagnosticGraph::new(self.nodes, self.edges)
    }
}

impl From<&DiagnosticGraph> for GraphDocument {
    fn from(g: &DiagnosticGraph) -> Self {
        GraphDocument {
            nodes: g.nodes().to_vec(),
            edges: g.edges().to_vec(),
        }
    }
}

pub fn graph_from_json(text: &str) -> Result<DiagnosticGraph> {
    GraphDocument::parse(text)?.into_graph()
}

pub fn graph_to_json(graph: &DiagnosticGraph) -> String {
    serde_json::to_string_pretty(&GraphDocument::from(graph)).expect("graph serializes")
}

/// Renders `graph` as Graphviz DOT.
///
/// Nodes are named by `name` (defaults to `id:label`), edges are labelled
/// with their kind, and failing outcomes of an optional syndrome are drawn
/// bold red.
pub fn to_dot(
    graph: &DiagnosticGraph,
    syndrome: Option<&Syndrome>,
    name: Option<&dyn Fn(NodeId) -> String>,
) -> String {
    let default_name = |id: NodeId| {
        let label = graph.node(id).map(|n| n.label.as_str()).unwrap_or("");
        if label.is_empty() {
            id.to_string()
        } else {
            format!("{id}:{label}")
        }
    };
    let name_of = |id: NodeId| match name {
        Some(f) => f(id),
        None => default_name(id),
    };
    let mut out = String::from("digraph diagnostic {\n");
    for n in graph.nodes() {
        let _ = writeln!(out, "  \"{}\";", escape(&name_of(n.id)));
    }
    for e in graph.edges() {
        let style = match syndrome.and_then(|s| s.get(e.tester, e.testee)) {
            Some(true) => ", color=red, penwidth=2.0",
            Some(false) => ", style=solid",
            None => "",
        };
        let _ = writeln!(
            out,
            "  \"{}\" -> \"{}\" [label=\"{}\"{}];",
            escape(&name_of(e.tester)),
            escape(&name_of(e.testee)),
            e.kind,
            style
        );
    }
    out.push_str("}\n");
    out
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::EdgeKind;
    use crate::rational::Rational;

    #[test]
    fn parses_documented_shape() {
        let text = r#"{"nodes":[{"id":1,"label":"GPS reader","hz":1.0},{"id":6,"label":"GPS proc"}],
                       "edges":[{"tester":6,"testee":1,"kind":"input_admissibility"}]}"#;
        let g = graph_from_json(text).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.node(NodeId(1)).unwrap().frequency_hz, Some(Rational::integer(1)));
        assert_eq!(g.edges()[0].kind, EdgeKind::InputAdmissibility);
    }

    #[test]
    fn invalid_document_reports_violations() {
        let text = r#"{"nodes":[{"id":1}],"edges":[{"tester":1,"testee":1}]}"#;
        let doc = GraphDocument::parse(text).unwrap();
        assert!(!doc.validate().is_valid());
        assert!(doc.into_graph().is_err());
    }

    #[test]
    fn dot_marks_failures() {
        let g = DiagnosticGraph::from_pairs(2, &[(1, 2), (2, 1)]).unwrap();
        let s = Syndrome::from_bits(&g, &[1, 0]).unwrap();
        let dot = to_dot(&g, Some(&s), None);
        assert!(dot.contains("\"1:n1\" -> \"2:n2\" [label=\"unspecified\", color=red"));
        assert!(dot.contains("\"2:n2\" -> \"1:n1\" [label=\"unspecified\", style=solid"));
    }
}

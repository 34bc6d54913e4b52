use thiserror::Error;

use crate::graph::{NodeId, ValidationReport};

/// Errors raised by graph construction, syndrome handling and analysis.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid graph: {0}")]
    InvalidGraph(ValidationReport),

    #[error("empty graph")]
    EmptyGraph,

    #[error("unknown node id {0}")]
    UnknownNode(NodeId),

    #[error("syndrome is missing outcome for edge ({0},{1})")]
    MissingOutcome(NodeId, NodeId),

    #[error("syndrome has outcome for ({0},{1}) which is not an edge of the graph")]
    ExtraOutcome(NodeId, NodeId),

    #[error("syndrome lists edge ({0},{1}) more than once")]
    DuplicateOutcome(NodeId, NodeId),

    #[error("outcome for ({tester},{testee}) must be 0 or 1, got {value}")]
    BadOutcome {
        tester: NodeId,
        testee: NodeId,
        value: u64,
    },

    #[error("t must satisfy t < n (t = {t}, n = {n})")]
    TooLargeT { t: usize, n: usize },

    #[error("oracle restricted to small graphs (n = {n}, cap = {cap})")]
    OracleCap { n: usize, cap: usize },

    #[error("exact diagnosability restricted to n <= {cap} (n = {n})")]
    ExactCap { n: usize, cap: usize },

    #[error("node {0} has no publishing frequency")]
    MissingFrequency(NodeId),

    #[error("frequency must be positive")]
    NonPositiveFrequency,

    #[error("invalid interval [{a}, {b}]")]
    BadInterval { a: f64, b: f64 },

    #[error("empty expansion: no sample time in [{a}, {b}] at {hz} Hz")]
    EmptyExpansion { a: f64, b: f64, hz: f64 },

    #[error("interval [{a}, {b}] is not contained in [{outer_a}, {outer_b}]")]
    NotContained {
        a: f64,
        b: f64,
        outer_a: f64,
        outer_b: f64,
    },

    #[error("intervals are not nested: {0}")]
    NotNested(String),

    #[error("invalid template: {0}")]
    BadTemplate(String),

    #[error("diagnosability profile is not monotone: {0}")]
    ProfileNotMonotone(String),

    #[error("probability {0} outside [0, 1]")]
    BadProbability(f64),

    #[error("adversarial policy limited to {cap} free outcomes (got {free})")]
    AdversarialCap { free: usize, cap: usize },

    #[error("unknown scenario `{0}`")]
    UnknownScenario(String),

    #[error("scenario `{name}` failed re-verification: {detail}")]
    ScenarioCheck { name: String, detail: String },

    #[error("bad number `{0}`")]
    BadNumber(String),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

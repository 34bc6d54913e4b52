//! Fault diagnosability analysis for PMC-style diagnostic graphs.
//!
//! Modules test one another along the edges of a directed graph; a
//! fault-free tester reports the true state of its testee, a faulty one
//! reports anything. This crate decides how many simultaneous faults such a
//! graph can always identify, decodes observed test outcomes (syndromes)
//! into fault sets, and repeats both analyses over time-expanded graphs built
//! from multi-rate pipelines.

pub mod cli;
mod combinatorics;
pub mod diagnosability;
pub mod error;
pub mod graph;
pub mod identification;
pub mod io;
pub mod rational;
pub mod scenarios;
pub mod simulator;
pub mod syndrome;
pub mod temporal;

pub use diagnosability::{
    diagnosability_bounds, is_t_diagnosable, max_diagnosability, oracle_is_t_diagnosable,
    DiagnosabilityCertificate, FailedCondition, Verdict, Witness,
};
pub use error::{Error, Result};
pub use graph::{DiagnosticGraph, Edge, EdgeKind, Node, NodeId};
pub use identification::{all_consistent_fault_sets, identify, node_status, DiagnosisVerdict, NodeStatus};
pub use rational::Rational;
pub use simulator::{generate_syndrome, monte_carlo, FaultPolicy};
pub use syndrome::{is_consistent_fault_set, pmc_compatible, FaultSet, Syndrome};
pub use temporal::{expand, frequency_subgraph, Interval, TemporalGraph, TemporalTemplate};

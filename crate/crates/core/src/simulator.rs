//! Syndrome generation under injected faults, and a Monte-Carlo harness.
//!
//! Fault-free testers always report the truth. What a faulty tester reports
//! is chosen by the [`FaultPolicy`]. Random draws are counter-based: the
//! outcome of test `(i, j)` in trial `k` is read from a ChaCha stream keyed
//! by `(seed, k)` at a position derived from `(i, j)`, so results do not
//! depend on iteration order or thread schedule.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::diagnosability::DEFAULT_ORACLE_CAP;
use crate::error::{Error, Result};
use crate::graph::{DiagnosticGraph, NodeId};
use crate::identification::{candidate_fault_sets, identify, DiagnosisVerdict};
use crate::syndrome::{FaultSet, Syndrome};

/// Largest number of faulty-tester outcomes the adversary enumerates.
pub const ADVERSARIAL_FREE_CAP: usize = 16;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FaultPolicy {
    AlwaysPass,
    AlwaysFail,
    Bernoulli(f64),
    /// Chooses the faulty-tester outcomes that leave the most candidate
    /// fault sets (of size at most |F|).
    Adversarial,
}

impl FaultPolicy {
    pub fn bernoulli(p: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadProbability(p));
        }
        Ok(FaultPolicy::Bernoulli(p))
    }
}

impl fmt::Display for FaultPolicy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FaultPolicy::AlwaysPass => f.write_str("always_pass"),
            FaultPolicy::AlwaysFail => f.write_str("always_fail"),
            FaultPolicy::Bernoulli(p) => write!(f, "bernoulli:{p}"),
            FaultPolicy::Adversarial => f.write_str("adversarial"),
        }
    }
}

impl FromStr for FaultPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "always_pass" => Ok(FaultPolicy::AlwaysPass),
            "always_fail" => Ok(FaultPolicy::AlwaysFail),
            "adversarial" => Ok(FaultPolicy::Adversarial),
            _ => {
                let p = s
                    .strip_prefix("bernoulli:")
                    .and_then(|p| p.parse::<f64>().ok())
                    .ok_or_else(|| Error::BadNumber(s.to_string()))?;
                FaultPolicy::bernoulli(p)
            }
        }
    }
}

impl Serialize for FaultPolicy {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

fn bernoulli_draw(seed: u64, trial: u64, tester: NodeId, testee: NodeId, p: f64) -> bool {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial.wrapping_mul(2).wrapping_add(1));
    rng.set_word_pos(((tester.0 as u128) << 32 | testee.0 as u128) << 1);
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    u < p
}

pub fn generate_syndrome(graph: &DiagnosticGraph, faults: &FaultSet, policy: FaultPolicy, seed: u64) -> Result<Syndrome> {
    generate_trial_syndrome(graph, faults, policy, seed, 0)
}

/// As [`generate_syndrome`], for trial `trial` of a batch.
pub fn generate_trial_syndrome(
    graph: &DiagnosticGraph,
    faults: &FaultSet,
    policy: FaultPolicy,
    seed: u64,
    trial: u64,
) -> Result<Syndrome> {
    let in_f = faults.indicator(graph)?;
    let mut values = Vec::with_capacity(graph.edge_count());
    let mut free = Vec::new();
    for (k, e) in graph.edges().iter().enumerate() {
        let i = graph.index_of(e.tester).unwrap();
        let j = graph.index_of(e.testee).unwrap();
        values.push(if in_f[i] {
            free.push(k);
            match policy {
                FaultPolicy::AlwaysPass | FaultPolicy::Adversarial => false,
                FaultPolicy::AlwaysFail => true,
                FaultPolicy::Bernoulli(p) => bernoulli_draw(seed, trial, e.tester, e.testee, p),
            }
        } else {
            in_f[j]
        });
    }
    if policy == FaultPolicy::Adversarial && !free.is_empty() {
        if graph.node_count() > DEFAULT_ORACLE_CAP {
            return Err(Error::OracleCap {
                n: graph.node_count(),
                cap: DEFAULT_ORACLE_CAP,
            });
        }
        if free.len() > ADVERSARIAL_FREE_CAP {
            return Err(Error::AdversarialCap {
                free: free.len(),
                cap: ADVERSARIAL_FREE_CAP,
            });
        }
        let mut best = (0usize, 0u64);
        for mask in 0..1u64 << free.len() {
            for (b, &k) in free.iter().enumerate() {
                values[k] = mask >> b & 1 == 1;
            }
            let s = Syndrome::from_aligned(graph, &values);
            let count = candidate_fault_sets(graph, &s, faults.len())?.len();
            if count > best.0 {
                best = (count, mask);
            }
        }
        for (b, &k) in free.iter().enumerate() {
            values[k] = best.1 >> b & 1 == 1;
        }
    }
    Ok(Syndrome::from_aligned(graph, &values))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct NodeConfusion {
    pub true_positive: u64,
    pub false_positive: u64,
    pub false_negative: u64,
    pub true_negative: u64,
    /// Trials without a unique verdict.
    pub undetermined: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub injected: FaultSet,
    pub verdict: String,
    pub identified: Option<FaultSet>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloReport {
    pub trials: u64,
    pub t: usize,
    pub seed: u64,
    pub policy: FaultPolicy,
    pub unique: u64,
    pub ambiguous: u64,
    pub inconsistent: u64,
    /// Unique verdicts equal to the injected set.
    pub correct_unique: u64,
    pub unique_rate: f64,
    pub ambiguous_rate: f64,
    pub inconsistent_rate: f64,
    pub per_node: BTreeMap<NodeId, NodeConfusion>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

impl MonteCarloReport {
    pub fn write_csv<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let join = |f: &FaultSet| f.iter().map(|i| i.to_string()).collect::<Vec<_>>().join(";");
        w.write_record(["trial", "injected", "verdict", "identified"])
            .map_err(std::io::Error::other)?;
        for r in &self.records {
            w.write_record([
                r.trial.to_string(),
                join(&r.injected),
                r.verdict.clone(),
                r.identified.as_ref().map(join).unwrap_or_default(),
            ])
            .map_err(std::io::Error::other)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Samples `|F|` uniformly in `[0, t]`, then `F` uniformly among sets of
/// that size, generates a syndrome and identifies it, `trials` times.
pub fn monte_carlo(graph: &DiagnosticGraph, t: usize, trials: u64, policy: FaultPolicy, seed: u64) -> Result<MonteCarloReport> {
    let n = graph.node_count();
    let mut per_node: BTreeMap<NodeId, NodeConfusion> =
        graph.node_ids().map(|id| (id, NodeConfusion::default())).collect();
    let mut records = Vec::with_capacity(trials as usize);
    let (mut unique, mut ambiguous, mut inconsistent, mut correct) = (0, 0, 0, 0);
    for trial in 0..trials {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(trial.wrapping_mul(2));
        let size = rng.random_range(0..=t.min(n));
        let injected: FaultSet = rand::seq::index::sample(&mut rng, n, size)
            .into_iter()
            .map(|k| graph.id_at(k))
            .collect();
        let syndrome = generate_trial_syndrome(graph, &injected, policy, seed, trial)?;
        let verdict = identify(graph, &syndrome, t)?;
        let identified = match &verdict {
            DiagnosisVerdict::Unique(f) => {
                unique += 1;
                if *f == injected {
                    correct += 1;
                }
                Some(f.clone())
            }
            DiagnosisVerdict::Ambiguous { .. } => {
                ambiguous += 1;
                None
            }
            DiagnosisVerdict::Inconsistent => {
                inconsistent += 1;
                None
            }
        };
        for (&id, c) in per_node.iter_mut() {
            let truth = injected.contains(id);
            match &identified {
                None => c.undetermined += 1,
                Some(f) => match (truth, f.contains(id)) {
                    (true, true) => c.true_positive += 1,
                    (false, true) => c.false_positive += 1,
                    (true, false) => c.false_negative += 1,
                    (false, false) => c.true_negative += 1,
                },
            }
        }
        records.push(TrialRecord {
            trial,
            injected,
            verdict: verdict.kind().to_string(),
            identified,
        });
    }
    let rate = |k: u64| if trials == 0 { 0.0 } else { k as f64 / trials as f64 };
    Ok(MonteCarloReport {
        trials,
        t,
        seed,
        policy,
        unique,
        ambiguous,
        inconsistent,
        correct_unique: correct,
        unique_rate: rate(unique),
        ambiguous_rate: rate(ambiguous),
        inconsistent_rate: rate(inconsistent),
        per_node,
        records,
    })
}

//! The `diagkit` command-line front end.
//!
//! Exit codes: 0 for success (diagnosable, unique), 1 for a negative
//! analytic result (not diagnosable, ambiguous, inconsistent), 2 for usage
//! or input errors. With `--json` every command prints one JSON document on
//! stdout, errors included.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::diagnosability::{
    diagnosability_bounds, diagnosability_ceiling, is_t_diagnosable, max_diagnosability_capped,
    DEFAULT_EXACT_CAP,
};
use crate::error::{Error, Result};
use crate::graph::DiagnosticGraph;
use crate::identification::{identify_with_limit, node_status, within_diagnosability_range, DEFAULT_CANDIDATE_LIMIT};
use crate::io::{graph_to_json, to_dot, GraphDocument};
use crate::rational::Rational;
use crate::scenarios::{scenario, SCENARIO_NAMES};
use crate::simulator::{generate_syndrome, monte_carlo, FaultPolicy};
use crate::syndrome::{FaultSet, Syndrome};
use crate::temporal::{
    audit, diagnosability_profile_capped, expand, AuditMode, Interval, TemporalDocument, TemporalGraph,
    TemporalTemplate,
};

pub const EXACT_CAP_ENV: &str = "DIAGKIT_EXACT_CAP";

#[derive(Debug, Parser)]
#[command(name = "diagkit", version, about = "Diagnosability analysis and fault identification for diagnostic graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Compute t(D) with certificates, or check a single t.
    Analyze {
        graph: String,
        #[arg(long = "t")]
        t: Option<usize>,
        #[arg(long)]
        exact_cap: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Identify faulty modules from a syndrome.
    Identify {
        graph: String,
        syndrome: PathBuf,
        /// Fault budget; defaults to t(D).
        #[arg(long = "t")]
        t: Option<usize>,
        #[arg(long, default_value_t = DEFAULT_CANDIDATE_LIMIT)]
        limit: usize,
        #[arg(long)]
        json: bool,
    },
    /// Generate a syndrome for injected faults, or run a Monte-Carlo batch.
    Simulate(SimulateArgs),
    /// Expand a graph over a time interval.
    Expand {
        graph: String,
        #[command(flatten)]
        temporal: TemporalArgs,
        #[arg(long, num_args = 2, value_names = ["A", "B"], allow_negative_numbers = true)]
        interval: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write DOT instead of JSON.
        #[arg(long)]
        dot: bool,
        #[arg(long)]
        json: bool,
    },
    /// Diagnosability over a chain of nested intervals, largest first.
    Profile {
        graph: String,
        #[command(flatten)]
        temporal: TemporalArgs,
        /// Comma-separated `a:b` intervals, e.g. `0:0.02,0:0.01,0:0`.
        #[arg(long)]
        chain: String,
        #[arg(long)]
        exact_cap: Option<usize>,
        #[arg(long)]
        json: bool,
    },
    /// Re-diagnose a temporal graph over growing windows.
    Audit {
        temporal: PathBuf,
        syndrome: PathBuf,
        /// Comma-separated `a:b` windows, smallest first.
        #[arg(long)]
        windows: String,
        /// Diagnose pane copies independently instead of assuming
        /// time-constant faults.
        #[arg(long)]
        intermittent: bool,
        #[arg(long)]
        json: bool,
    },
    /// Render a graph (and optionally a syndrome) as Graphviz DOT.
    ExportDot {
        graph: String,
        #[arg(long)]
        syndrome: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// List bundled scenarios, optionally writing them as graph JSON.
    Scenarios {
        #[arg(long)]
        write: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Debug, Args)]
struct TemporalArgs {
    #[arg(long)]
    hz: String,
    #[arg(long, default_value = "1")]
    offsets: String,
    #[arg(long)]
    bidirectional: bool,
    /// Also add cross-time tests along base edges.
    #[arg(long)]
    cross_node: bool,
}

#[derive(Debug, Args)]
struct SimulateArgs {
    graph: String,
    /// Comma-separated faulty node ids (may be empty).
    #[arg(long, conflicts_with = "random")]
    faults: Option<String>,
    /// Inject this many faults chosen from the seed.
    #[arg(long)]
    random: Option<usize>,
    #[arg(long, default_value = "always_pass")]
    policy: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Identify the generated syndrome.
    #[arg(long)]
    identify: bool,
    #[arg(long = "t")]
    t: Option<usize>,
    /// Run a Monte-Carlo batch of this many trials instead.
    #[arg(long)]
    trials: Option<u64>,
    /// Per-trial CSV for Monte-Carlo runs.
    #[arg(long)]
    csv: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

enum Loaded {
    Static(DiagnosticGraph),
    Temporal(Box<TemporalGraph>),
}

impl Loaded {
    fn graph(&self) -> &DiagnosticGraph {
        match self {
            Loaded::Static(g) => g,
            Loaded::Temporal(t) => t.graph(),
        }
    }
}

/// Reads a graph or temporal document; bare scenario names load the
/// bundled graph.
fn load(arg: &str) -> Result<Loaded> {
    let path = Path::new(arg);
    if !path.exists() {
        let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or(arg);
        if SCENARIO_NAMES.contains(&stem) {
            return Ok(Loaded::Static(scenario(stem)?.graph));
        }
    }
    let text = read_text(path)?;
    let value: Value = serde_json::from_str(&text)?;
    if value.get("interval").is_some() {
        let doc: TemporalDocument = serde_json::from_value(value)?;
        return Ok(Loaded::Temporal(Box::new(doc.load(path.parent())?)));
    }
    let doc: GraphDocument = serde_json::from_value(value)?;
    Ok(Loaded::Static(doc.into_graph()?))
}

fn read_text(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Io(std::io::Error::new(e.kind(), format!("{}: {e}", path.display()))))
}

fn read_syndrome(path: &Path) -> Result<Syndrome> {
    Syndrome::from_json(&read_text(path)?)
}

fn exact_cap(flag: Option<usize>) -> usize {
    flag.or_else(|| std::env::var(EXACT_CAP_ENV).ok()?.parse().ok())
        .unwrap_or(DEFAULT_EXACT_CAP)
}

fn parse_intervals(list: &str) -> Result<Vec<Interval>> {
    list.split(',')
        .map(|part| {
            let (a, b) = part
                .split_once(':')
                .ok_or_else(|| Error::BadNumber(part.to_string()))?;
            Interval::new(a.parse()?, b.parse()?)
        })
        .collect()
}

fn parse_ids(list: &str) -> Result<Vec<u32>> {
    list.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| Error::BadNumber(s.to_string())))
        .collect()
}

fn template(args: &TemporalArgs) -> Result<TemporalTemplate> {
    TemporalTemplate::new(parse_ids(&args.offsets)?, args.bidirectional, !args.cross_node)
}

/// Default fault budget: t(D) when exact search is allowed, else the lower
/// bound.
fn default_t(graph: &DiagnosticGraph, cap: usize) -> Result<usize> {
    if graph.is_empty() {
        return Ok(0);
    }
    match max_diagnosability_capped(graph, cap) {
        Ok(m) => Ok(m.t_max),
        Err(Error::ExactCap { .. }) => Ok(diagnosability_bounds(graph).lower),
        Err(e) => Err(e),
    }
}

struct Output {
    code: i32,
    json: Value,
    text: String,
}

impl Output {
    fn new(code: i32, json: Value, text: String) -> Self {
        Output { code, json, text }
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    std::fs::write(path, contents)?;
    Ok(())
}

fn ids_text(f: &FaultSet) -> String {
    f.to_string()
}

fn analyze(graph_arg: &str, t: Option<usize>, cap_flag: Option<usize>) -> Result<Output> {
    let loaded = load(graph_arg)?;
    let g = loaded.graph();
    let (delta, attaining) = g.min_in_degree()?;
    let summary = json!({
        "nodes": g.node_count(),
        "edges": g.edge_count(),
        "min_in_degree": {"value": delta, "nodes": attaining},
        "ceiling": diagnosability_ceiling(g)?,
    });
    let mut text = format!(
        "nodes: {}  edges: {}  min in-degree: {} (at {:?})\n",
        g.node_count(),
        g.edge_count(),
        delta,
        attaining.iter().map(|i| i.0).collect::<Vec<_>>()
    );
    if let Some(t) = t {
        let cert = is_t_diagnosable(g, t)?;
        let code = if cert.is_diagnosable() { 0 } else { 1 };
        text += &format!("t = {t}: {}\n", serde_json::to_string(&cert)?);
        let mut j = summary;
        j["certificate"] = serde_json::to_value(&cert)?;
        return Ok(Output::new(code, j, text));
    }
    let cap = exact_cap(cap_flag);
    let mut j = summary;
    match max_diagnosability_capped(g, cap) {
        Ok(m) => {
            text += &format!("t_max = {}\n", m.t_max);
            if let Some(f) = &m.failing {
                text += &format!("certificate at t = {}: {}\n", f.t, serde_json::to_string(f)?);
            }
            j["exact"] = json!(true);
            j["t_max"] = json!(m.t_max);
            j["passing"] = serde_json::to_value(&m.passing)?;
            j["failing"] = serde_json::to_value(&m.failing)?;
        }
        Err(Error::ExactCap { .. }) => {
            let b = diagnosability_bounds(g);
            text += &format!(
                "n exceeds exact cap {cap}: {} <= t(D) <= {}\n",
                b.lower, b.upper
            );
            j["exact"] = json!(b.exact);
            j["lower"] = json!(b.lower);
            j["upper"] = json!(b.upper);
        }
        Err(e) => return Err(e),
    }
    Ok(Output::new(0, j, text))
}

fn identify_cmd(graph_arg: &str, syndrome: &Path, t: Option<usize>, limit: usize) -> Result<Output> {
    let loaded = load(graph_arg)?;
    let g = loaded.graph();
    let s = read_syndrome(syndrome)?;
    s.aligned(g)?;
    let t = match t {
        Some(t) => t,
        None => default_t(g, exact_cap(None))?,
    };
    identification_output(g, &s, t, limit)
}

fn identification_output(g: &DiagnosticGraph, s: &Syndrome, t: usize, limit: usize) -> Result<Output> {
    let verdict = identify_with_limit(g, s, t, limit)?;
    let status = node_status(g, s, t)?;
    let within = within_diagnosability_range(g, t);
    let mut text = format!("t = {t}\nverdict: {}", verdict.kind());
    match &verdict {
        crate::DiagnosisVerdict::Unique(f) => text += &format!(" {}", ids_text(f)),
        crate::DiagnosisVerdict::Ambiguous { count, candidates } => {
            text += &format!(" ({count} candidates)");
            for c in candidates {
                text += &format!(" {}", ids_text(c));
            }
        }
        crate::DiagnosisVerdict::Inconsistent => {}
    }
    text += "\n";
    if !within {
        text += "note: t exceeds (n-1)/2, uniqueness is not guaranteed\n";
    }
    for (id, st) in &status.statuses {
        text += &format!("  {id}: {}\n", serde_json::to_value(st)?.as_str().unwrap_or(""));
    }
    let code = if verdict.is_unique() { 0 } else { 1 };
    let j = json!({
        "t": t,
        "within_guarantee": within,
        "verdict": verdict,
        "node_status": status.statuses,
        "inconsistent": status.inconsistent,
    });
    Ok(Output::new(code, j, text))
}

fn simulate_cmd(a: &SimulateArgs) -> Result<Output> {
    let loaded = load(&a.graph)?;
    let g = loaded.graph();
    let policy: FaultPolicy = a.policy.parse()?;
    if let Some(trials) = a.trials {
        let t = match a.t {
            Some(t) => t,
            None => default_t(g, exact_cap(None))?,
        };
        let report = monte_carlo(g, t, trials, policy, a.seed)?;
        if let Some(path) = &a.csv {
            report.write_csv(std::fs::File::create(path)?)?;
        }
        let text = format!(
            "trials: {}  t: {}  unique: {:.4}  ambiguous: {:.4}  inconsistent: {:.4}  correct unique: {}\n",
            report.trials,
            t,
            report.unique_rate,
            report.ambiguous_rate,
            report.inconsistent_rate,
            report.correct_unique
        );
        return Ok(Output::new(0, serde_json::to_value(&report)?, text));
    }
    let faults = match (&a.faults, a.random) {
        (Some(spec), _) => {
            let f = FaultSet::from_ids(parse_ids(spec)?);
            for id in f.iter() {
                if !g.contains(id) {
                    return Err(Error::UnknownNode(id));
                }
            }
            f
        }
        (None, Some(k)) => {
            if k > g.node_count() {
                return Err(Error::BadNumber(format!("cannot inject {k} faults into {} nodes", g.node_count())));
            }
            let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
            rand::seq::index::sample(&mut rng, g.node_count(), k)
                .into_iter()
                .map(|i| g.id_at(i))
                .collect()
        }
        (None, None) => FaultSet::new(),
    };
    let s = generate_syndrome(g, &faults, policy, a.seed)?;
    let syndrome_json = s.to_json();
    if let Some(path) = &a.out {
        write_file(path, &(syndrome_json.clone() + "\n"))?;
    }
    let mut j = json!({
        "faults": faults,
        "policy": policy,
        "seed": a.seed,
        "syndrome": serde_json::from_str::<Value>(&syndrome_json)?,
    });
    let mut text = match &a.out {
        Some(path) => format!("faults {} -> {}\n", ids_text(&faults), path.display()),
        None => syndrome_json + "\n",
    };
    let mut code = 0;
    if a.identify {
        let t = match a.t {
            Some(t) => t,
            None => default_t(g, exact_cap(None))?,
        };
        let out = identification_output(g, &s, t, DEFAULT_CANDIDATE_LIMIT)?;
        code = out.code;
        j["identification"] = out.json;
        text += &out.text;
    }
    Ok(Output::new(code, j, text))
}

fn base_graph(arg: &str) -> Result<DiagnosticGraph> {
    match load(arg)? {
        Loaded::Static(g) => Ok(g),
        Loaded::Temporal(t) => Ok(t.graph().clone()),
    }
}

fn expand_cmd(
    graph_arg: &str,
    targs: &TemporalArgs,
    interval: &[String],
    out: Option<&Path>,
    dot: bool,
) -> Result<Output> {
    let base = base_graph(graph_arg)?;
    let hz: Rational = targs.hz.parse()?;
    let interval = Interval::new(interval[0].parse()?, interval[1].parse()?)?;
    let tg = expand(&base, hz, interval, &template(targs)?)?;
    let doc = serde_json::to_value(tg.to_document())?;
    let rendered = if dot {
        tg.to_dot(None)
    } else {
        serde_json::to_string_pretty(&doc)? + "\n"
    };
    let summary = json!({
        "panes": tg.pane_count(),
        "vertices": tg.graph().node_count(),
        "edges": tg.graph().edge_count(),
    });
    let text = match out {
        Some(p) => {
            write_file(p, &rendered)?;
            format!(
                "panes: {}  vertices: {}  edges: {} -> {}\n",
                tg.pane_count(),
                tg.graph().node_count(),
                tg.graph().edge_count(),
                p.display()
            )
        }
        None => rendered,
    };
    let j = if out.is_some() { summary } else { doc };
    Ok(Output::new(0, j, text))
}

fn profile_cmd(graph_arg: &str, targs: &TemporalArgs, chain: &str, cap: Option<usize>) -> Result<Output> {
    let base = base_graph(graph_arg)?;
    let hz: Rational = targs.hz.parse()?;
    let chain = parse_intervals(chain)?;
    let profile = diagnosability_profile_capped(&base, hz, &template(targs)?, &chain, exact_cap(cap))?;
    let mut text = String::from("interval           panes  nodes  t\n");
    for e in &profile.entries {
        let t = match e.value {
            crate::temporal::ProfileValue::Exact { t } => t.to_string(),
            crate::temporal::ProfileValue::Bounds { lower, upper } => format!("[{lower}, {upper}]"),
        };
        text += &format!("{:<18} {:>5}  {:>5}  {}\n", e.interval.to_string(), e.panes, e.nodes, t);
    }
    Ok(Output::new(0, serde_json::to_value(&profile)?, text))
}

fn audit_cmd(temporal: &Path, syndrome: &Path, windows: &str, intermittent: bool) -> Result<Output> {
    let tg = match load(&temporal.to_string_lossy())? {
        Loaded::Temporal(t) => t,
        Loaded::Static(_) => {
            return Err(Error::BadTemplate("audit needs a temporal graph document".into()))
        }
    };
    let s = read_syndrome(syndrome)?;
    let windows = parse_intervals(windows)?;
    let mode = if intermittent {
        AuditMode::Intermittent
    } else {
        AuditMode::TimeConstant
    };
    let report = audit(&tg, &s, &windows, mode)?;
    let mut text = String::new();
    for w in &report.windows {
        text += &format!("window {} (panes {}, t {}):", w.interval, w.panes, w.t);
        for (id, st) in &w.statuses {
            text += &format!(" {id}={}", serde_json::to_value(st)?.as_str().unwrap_or(""));
        }
        text += "\n";
    }
    let resolved = report.windows.last().is_some_and(|w| {
        !w.inconsistent && w.statuses.values().all(|s| *s != crate::NodeStatus::Unknown)
    });
    Ok(Output::new(
        if resolved { 0 } else { 1 },
        serde_json::to_value(&report)?,
        text,
    ))
}

fn export_dot_cmd(graph_arg: &str, syndrome: Option<&Path>, out: Option<&Path>) -> Result<Output> {
    let loaded = load(graph_arg)?;
    let s = syndrome.map(read_syndrome).transpose()?;
    if let Some(s) = &s {
        s.aligned(loaded.graph())?;
    }
    let dot = match &loaded {
        Loaded::Static(g) => to_dot(g, s.as_ref(), None),
        Loaded::Temporal(t) => t.to_dot(s.as_ref()),
    };
    let text = match out {
        Some(p) => {
            write_file(p, &dot)?;
            format!("wrote {}\n", p.display())
        }
        None => dot.clone(),
    };
    Ok(Output::new(0, json!({ "dot": dot }), text))
}

fn scenarios_cmd(write: Option<&Path>) -> Result<Output> {
    let mut list = Vec::new();
    let mut text = String::new();
    for name in SCENARIO_NAMES {
        let sc = scenario(name)?;
        if let Some(dir) = write {
            std::fs::create_dir_all(dir)?;
            write_file(&dir.join(format!("{name}.json")), &(graph_to_json(&sc.graph) + "\n"))?;
        }
        text += &format!(
            "{name}: {} nodes, {} edges\n",
            sc.graph.node_count(),
            sc.graph.edge_count()
        );
        for p in &sc.documented_properties {
            text += &format!("  {} = {} ({:?})\n", p.property, p.expected, p.provenance);
        }
        list.push(serde_json::to_value(&sc)?);
    }
    Ok(Output::new(0, json!({ "scenarios": list }), text))
}

fn dispatch(cmd: &Command) -> (bool, Result<Output>) {
    match cmd {
        Command::Analyze {
            graph,
            t,
            exact_cap,
            json,
        } => (*json, analyze(graph, *t, *exact_cap)),
        Command::Identify {
            graph,
            syndrome,
            t,
            limit,
            json,
        } => (*json, identify_cmd(graph, syndrome, *t, *limit)),
        Command::Simulate(a) => (a.json, simulate_cmd(a)),
        Command::Expand {
            graph,
            temporal,
            interval,
            out,
            dot,
            json,
        } => (*json, expand_cmd(graph, temporal, interval, out.as_deref(), *dot)),
        Command::Profile {
            graph,
            temporal,
            chain,
            exact_cap,
            json,
        } => (*json, profile_cmd(graph, temporal, chain, *exact_cap)),
        Command::Audit {
            temporal,
            syndrome,
            windows,
            intermittent,
            json,
        } => (*json, audit_cmd(temporal, syndrome, windows, *intermittent)),
        Command::ExportDot {
            graph,
            syndrome,
            out,
            json,
        } => (*json, export_dot_cmd(graph, syndrome.as_deref(), out.as_deref())),
        Command::Scenarios { write, json } => (*json, scenarios_cmd(write.as_deref())),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if code == 0 {
                write!(out, "{e}")
            } else {
                write!(err, "{e}")
            };
            return code;
        }
    };
    let (json_mode, result) = dispatch(&cli.command);
    match result {
        Ok(o) => {
            let _ = if json_mode {
                writeln!(out, "{}", o.json)
            } else {
                write!(out, "{}", o.text)
            };
            o.code
        }
        Err(e) => {
            if json_mode {
                let _ = writeln!(out, "{}", json!({ "error": e.to_string() }));
            }
            let _ = writeln!(err, "error: {e}");
            2
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn interval_lists() {
        let v = parse_intervals("0:0.02,0:0.01,0:0").unwrap();
        assert_eq!(v.len(), 3);
        assert_eq!(v[0], Interval::from_f64(0.0, 0.02).unwrap());
        assert!(parse_intervals("0-1").is_err());
        assert!(parse_intervals("1:0").is_err());
    }

    #[test]
    fn id_lists() {
        assert_eq!(parse_ids("1, 3").unwrap(), vec![1, 3]);
        assert!(parse_ids("").unwrap().is_empty());
        assert!(parse_ids("x").is_err());
    }

    #[test]
    fn scenario_names_resolve() {
        assert_eq!(load("five_cycle").unwrap().graph().node_count(), 5);
        assert!(load("no/such/graph.json").is_err());
    }

    #[test]
    fn unknown_ids_are_usage_errors() {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run(
            ["diagkit", "simulate", "five_cycle", "--faults", "9"],
            &mut out,
            &mut err,
        );
        assert_eq!(code, 2);
    }
}

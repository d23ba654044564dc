//! Pipeline runner behind the `cyclesparse` binary. Every run produces an
//! output document and a versioned report; both depend only on the input
//! bytes, the seed and the flags.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use cyclesparse::biclique::{
    bicliques_to_json, dd_subset, schur_complement, schur_step_cliques, BicliqueRecord,
};
use cyclesparse::cycles::{ceil_log2, CycleAlgo, ShortCycleConfig};
use cyclesparse::io::{load_graph, save_directed, save_undirected, LoadedGraph};
use cyclesparse::linalg::{laplacian, DENSE_LIMIT};
use cyclesparse::report::{input_hash, ApproxReport};
use cyclesparse::resistance::{
    approx_effective_resistances, exact_edge_resistances, exact_effective_resistances,
    foster_residual,
};
use cyclesparse::sketch::{spectral_sketch, SketchConfig};
use cyclesparse::sparsify::{
    degree_preserving_sparsify, eulerian_sparsify, imbalance, SparsifyConfig,
};
use cyclesparse::validate::check_cycle_decomposition;
use cyclesparse::weight_reduce::{default_keep_bits, default_xi, reduce_to_unit};
use cyclesparse::{rng, DirectedGraph, Error, WeightedMultigraph};
use serde_json::{json, Value};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVARIANT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AlgoArg {
    Naive,
    Short,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Edgelist,
    Json,
}

#[derive(Debug, Parser)]
#[command(
    name = "cyclesparse",
    version,
    about = "Cycle-decomposition graph sparsification"
)]
pub struct Cli {
    #[command(flatten)]
    pub common: Common,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Seed for every random stream of the run.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Accuracy parameter.
    #[arg(long, global = true, default_value_t = 0.5)]
    pub eps: f64,
    /// Cycle decomposition routine.
    #[arg(long = "cycle-algo", alias = "algo", global = true, value_enum, default_value_t = AlgoArg::Naive)]
    pub cycle_algo: AlgoArg,
    /// Fixed conductance for expander decompositions (sketch).
    #[arg(long, global = true)]
    pub phi: Option<f64>,
    /// Walks per endpoint scale for the short cycle routine.
    #[arg(long, global = true, default_value_t = 16)]
    pub k: usize,
    /// Recursion levels of the short cycle routine.
    #[arg(long, global = true, default_value_t = 1)]
    pub levels: usize,
    /// Write the JSON report here.
    #[arg(long, global = true)]
    pub report: Option<PathBuf>,
    /// Write the output document here instead of stdout.
    #[arg(long, short = 'o', global = true)]
    pub output: Option<PathBuf>,
    /// Output format for graphs.
    #[arg(long, global = true, value_enum, default_value_t = FormatArg::Edgelist)]
    pub format: FormatArg,
    /// Record wall-clock time in the report (breaks byte-identical replay).
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Short cycle decomposition of an undirected graph.
    Decompose { input: PathBuf },
    /// Degree-preserving spectral sparsification.
    Sparsify {
        input: PathBuf,
        /// Rounds run regardless of the loop guard.
        #[arg(long, default_value_t = 0)]
        min_rounds: usize,
    },
    /// Sparsification of an Eulerian directed graph.
    SparsifyEulerian {
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        min_rounds: usize,
    },
    /// Degree-preserving spectral sketch.
    Sketch { input: PathBuf },
    /// Per-edge effective resistances.
    Resistances {
        input: PathBuf,
        /// Dense or solver-based exact values instead of projections.
        #[arg(long)]
        exact: bool,
        /// Log accuracy of the projected estimates.
        #[arg(long, default_value_t = 1.5f64.ln())]
        theta: f64,
        /// Extra vertex pair `u,v` to report (exact mode only); repeatable.
        #[arg(long = "pair", value_parser = parse_pair)]
        pairs: Vec<(usize, usize)>,
    },
    /// One squaring step of Schur-complement elimination on a diagonally
    /// dominant subset.
    SchurStep {
        input: PathBuf,
        /// Dominance factor of the eliminated subset.
        #[arg(long, default_value_t = 1.1)]
        alpha: f64,
    },
    /// Reduce an Eulerian digraph to power-of-two weight classes.
    ReduceWeights {
        input: PathBuf,
        /// Bucket spacing; defaults to ⌈4 log₂ n⌉.
        #[arg(long)]
        xi: Option<u32>,
    },
    /// Replay a stored run and compare its report byte for byte.
    Verify {
        #[arg(long)]
        certificate: PathBuf,
    },
}

fn parse_pair(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s
        .split_once(',')
        .ok_or_else(|| format!("expected u,v, got {s:?}"))?;
    let p = |x: &str| x.trim().parse::<usize>().map_err(|e| format!("{x:?}: {e}"));
    Ok((p(a)?, p(b)?))
}

/// A finished run.
#[derive(Debug, Clone)]
pub struct RunOutput {
    pub code: i32,
    pub output: String,
    pub report: Option<ApproxReport>,
    pub message: Option<String>,
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Invariant(_) => EXIT_INVARIANT,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn usage(msg: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_USAGE,
        message: msg.into(),
    }
}

/// Arguments that reproduce a run: everything except the report and output
/// destinations.
pub fn replay_args(argv: &[String]) -> Vec<String> {
    let mut out = Vec::new();
    let mut skip = false;
    for a in argv {
        if skip {
            skip = false;
            continue;
        }
        if a == "--report" || a == "--output" || a == "-o" {
            skip = true;
            continue;
        }
        if a.starts_with("--report=") || a.starts_with("--output=") {
            continue;
        }
        out.push(a.clone());
    }
    out
}

/// Parse and run `argv` (without the program name) and return the output
/// and report without touching the filesystem beyond reading inputs.
pub fn execute(argv: &[String]) -> RunOutput {
    let cli = match Cli::try_parse_from(
        std::iter::once("cyclesparse".to_string()).chain(argv.iter().cloned()),
    ) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return RunOutput {
                code,
                output: e.to_string(),
                report: None,
                message: None,
            };
        }
    };
    let start = Instant::now();
    match dispatch(&cli, replay_args(argv)) {
        Ok((output, mut report)) => {
            if cli.common.timing {
                report.wall_clock_ms = Some(start.elapsed().as_secs_f64() * 1e3);
            }
            let (code, message) = match report.first_failure() {
                None => (EXIT_OK, None),
                Some(c) => (
                    EXIT_INVARIANT,
                    Some(format!(
                        "check {} failed{}",
                        c.name,
                        c.detail
                            .as_ref()
                            .map(|d| format!(": {d}"))
                            .unwrap_or_default()
                    )),
                ),
            };
            RunOutput {
                code,
                output,
                report: Some(report),
                message,
            }
        }
        Err(f) => RunOutput {
            code: f.code,
            output: String::new(),
            report: None,
            message: Some(f.message),
        },
    }
}

/// Run `argv` and write the output and report to the requested places.
pub fn run(argv: &[String]) -> i32 {
    let cli =
        Cli::try_parse_from(std::iter::once("cyclesparse".to_string()).chain(argv.iter().cloned()))
            .ok();
    let out = execute(argv);
    let Some(cli) = cli else {
        if out.code == EXIT_OK {
            print!("{}", out.output);
        } else {
            eprint!("{}", out.output);
        }
        return out.code;
    };
    if let Some(msg) = &out.message {
        eprintln!("cyclesparse: {msg}");
    }
    if let Some(report) = &out.report {
        let write = |path: &Path, text: &str| {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        };
        let result = match &cli.common.output {
            Some(p) => write(p, &out.output),
            None => {
                print!("{}", out.output);
                Ok(())
            }
        }
        .and_then(|_| match &cli.common.report {
            Some(p) => write(p, &report.to_json()),
            None => Ok(()),
        });
        if let Err(e) = result {
            eprintln!("cyclesparse: {e}");
            return EXIT_USAGE;
        }
    }
    out.code
}

fn read_input(path: &Path) -> Result<Vec<u8>, Failure> {
    std::fs::read(path).map_err(|e| usage(format!("cannot read {}: {e}", path.display())))
}

fn undirected(bytes: &[u8]) -> Result<WeightedMultigraph, Failure> {
    let text = std::str::from_utf8(bytes).map_err(|_| usage("input is not UTF-8"))?;
    match load_graph(text, false)? {
        LoadedGraph::Undirected(g) => Ok(g),
        LoadedGraph::Directed(_) => Err(usage("expected an undirected graph")),
    }
}

fn directed(bytes: &[u8]) -> Result<DirectedGraph, Failure> {
    let text = std::str::from_utf8(bytes).map_err(|_| usage("input is not UTF-8"))?;
    match load_graph(text, true)? {
        LoadedGraph::Directed(g) => Ok(g),
        LoadedGraph::Undirected(_) => Err(usage("expected a directed graph")),
    }
}

fn cycle_algo(c: &Common) -> CycleAlgo {
    match c.cycle_algo {
        AlgoArg::Naive => CycleAlgo::Naive,
        AlgoArg::Short => CycleAlgo::Short {
            l: c.levels,
            k: c.k,
            cfg: ShortCycleConfig::default(),
        },
    }
}

fn graph_json(
    n: usize,
    directed: bool,
    edges: impl Iterator<Item = (usize, usize, u128)>,
) -> String {
    let edges: Vec<Value> = edges
        .map(|(u, v, w)| json!([u, v, w.to_string()]))
        .collect();
    let mut s =
        serde_json::to_string_pretty(&json!({"n": n, "directed": directed, "edges": edges}))
            .unwrap();
    s.push('\n');
    s
}

fn render_undirected(g: &WeightedMultigraph, f: FormatArg) -> String {
    match f {
        FormatArg::Edgelist => save_undirected(g),
        FormatArg::Json => graph_json(g.n, false, g.edges.iter().map(|e| (e.u, e.v, e.w))),
    }
}

fn render_directed(g: &DirectedGraph, f: FormatArg) -> String {
    match f {
        FormatArg::Edgelist => save_directed(g),
        FormatArg::Json => graph_json(g.n, true, g.edges.iter().map(|e| (e.u, e.v, e.w))),
    }
}

fn pretty(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).unwrap();
    s.push('\n');
    s
}

fn dispatch(cli: &Cli, args: Vec<String>) -> Result<(String, ApproxReport), Failure> {
    let c = &cli.common;
    let input = match &cli.command {
        Command::Decompose { input }
        | Command::Sparsify { input, .. }
        | Command::SparsifyEulerian { input, .. }
        | Command::Sketch { input }
        | Command::Resistances { input, .. }
        | Command::SchurStep { input, .. }
        | Command::ReduceWeights { input, .. } => input,
        Command::Verify { certificate } => return verify(certificate, args),
    };
    let bytes = read_input(input)?;
    let mut report = ApproxReport::new(command_name(&cli.command), args, c.seed, &bytes);
    let output = match &cli.command {
        Command::Decompose { .. } => {
            let g = undirected(&bytes)?;
            let d = cycle_algo(c).decompose(
                &g,
                rng::child_seed(&mut rng::stream(c.seed, "cli", "decompose", 0)),
            )?;
            report.edge_counts = vec![g.m()];
            report.metric("cycles", d.cycles.len());
            report.metric("extras", d.extras.len());
            report.metric("max_cycle_len", d.max_cycle_len());
            report.metric("length_bound", d.length_bound);
            report.metric("extras_bound", d.extras_bound);
            let check = check_cycle_decomposition(&g, &d);
            report.cycles_valid = Some(check.is_ok());
            report.check("cycle_decomposition", check.is_ok(), check.err());
            let mut s = d.to_json();
            s.push('\n');
            s
        }
        Command::Sparsify { min_rounds, .. } => {
            let g = undirected(&bytes)?;
            let mut cfg = SparsifyConfig::new(c.eps, c.seed);
            cfg.cycle_algo = cycle_algo(c);
            cfg.min_rounds = *min_rounds;
            let out = degree_preserving_sparsify(&g, &cfg)?;
            report.edge_counts = std::iter::once(g.m())
                .chain(out.rounds.iter().map(|r| r.edges_out))
                .collect();
            let exact = out.graph.degrees() == g.degrees();
            report.degree_exact = Some(exact);
            report.check("degrees", exact, None);
            report.metric("stop_threshold", out.stop_threshold);
            report.metric("rounds", &out.rounds);
            if let Some(cert) = out.certificate {
                report.certificate("spectral", cert);
                report.check(
                    "spectral_within_eps",
                    cert <= c.eps,
                    Some(format!("{cert:.6} vs {}", c.eps)),
                );
            }
            render_undirected(&out.graph, c.format)
        }
        Command::SparsifyEulerian { min_rounds, .. } => {
            let g = directed(&bytes)?;
            let mut cfg = SparsifyConfig::new(c.eps, c.seed);
            cfg.cycle_algo = cycle_algo(c);
            cfg.min_rounds = *min_rounds;
            let out = eulerian_sparsify(&g, &cfg)?;
            report.edge_counts = std::iter::once(g.m())
                .chain(out.rounds.iter().map(|r| r.edges_out))
                .collect();
            let exact = out.graph.is_eulerian() && imbalance(&out.graph) == imbalance(&g);
            report.degree_exact = Some(exact);
            report.check("eulerian", exact, None);
            report.metric("stop_threshold", out.stop_threshold);
            report.metric("rounds", &out.rounds);
            if let Some(cert) = out.certificate {
                report.certificate("asym", cert);
                report.check(
                    "asym_within_eps",
                    cert <= c.eps,
                    Some(format!("{cert:.6} vs {}", c.eps)),
                );
            }
            render_directed(&out.graph, c.format)
        }
        Command::Sketch { .. } => {
            let g = undirected(&bytes)?;
            let mut cfg = SketchConfig::new(c.eps, c.seed);
            cfg.cycle_algo = cycle_algo(c);
            cfg.phi = c.phi;
            let out = spectral_sketch(&g, &cfg)?;
            report.edge_counts = std::iter::once(g.m())
                .chain(out.rounds.iter().map(|r| r.edges_out))
                .collect();
            let exact = out.graph.degrees() == g.degrees();
            report.degree_exact = Some(exact);
            report.check("degrees", exact, None);
            report.metric("alpha", out.alpha);
            report.metric("rounds", &out.rounds);
            report.metric("size_constant", out.size_constant);
            if g.n <= DENSE_LIMIT && g.m() > 0 {
                let cert = cyclesparse::linalg::certify_spectral_approx(&g, &out.graph)?.epsilon();
                report.certificate("spectral", cert);
            }
            render_undirected(&out.graph, c.format)
        }
        Command::Resistances {
            exact,
            theta,
            pairs,
            ..
        } => {
            if !pairs.is_empty() && !*exact {
                return Err(usage("--pair requires --exact"));
            }
            let g = undirected(&bytes)?;
            report.edge_counts = vec![g.m()];
            let est = if *exact {
                exact_edge_resistances(&g)?
            } else {
                approx_effective_resistances(
                    &g,
                    *theta,
                    &mut rng::stream(c.seed, "cli", "resistances", 0),
                )?
            };
            let residual = foster_residual(&g, &est);
            report.certificate("foster_residual", residual);
            if *exact {
                let tol = 1e-6 * g.n as f64;
                report.check(
                    "foster",
                    residual.abs() <= tol,
                    Some(format!("|{residual:e}| vs {tol:e}")),
                );
            }
            let rows: Vec<Value> = g
                .edges
                .iter()
                .zip(&est.values)
                .map(|(e, r)| json!([e.u, e.v, r]))
                .collect();
            let mut v = json!({"method": est.method, "theta": est.theta, "resistances": rows});
            if !pairs.is_empty() {
                let values = exact_effective_resistances(&g, pairs)?;
                let rows: Vec<Value> = pairs
                    .iter()
                    .zip(values)
                    .map(|((u, w), r)| json!([u, w, r]))
                    .collect();
                v["pairs"] = Value::Array(rows);
            }
            round_floats(&mut v);
            pretty(&v)
        }
        Command::SchurStep { alpha, .. } => {
            let g = undirected(&bytes)?;
            report.edge_counts = vec![g.m()];
            let f = dd_subset(&g, *alpha, &mut rng::stream(c.seed, "cli", "schur-step", 0));
            let step = schur_step_cliques(&g, &f)?;
            report.metric("f", f.len());
            report.metric("c", step.c.len());
            if g.n <= DENSE_LIMIT {
                let lhs = schur_complement(&laplacian(&g), &step.f, &step.c);
                let rhs = schur_complement(&step.laplacian(g.n), &step.f, &step.c) * 0.5;
                let scale = lhs.amax().max(1.0);
                let err = (lhs - rhs).amax() / scale;
                report.certificate("schur_identity", err);
                report.check("schur_identity", err <= 1e-8, Some(format!("{err:e}")));
            }
            let cliques = |cl: &[cyclesparse::biclique::WeightedClique]| -> Vec<Value> {
                cl.iter()
                    .map(|q| json!({"vertices": q.vertices, "weights": q.weights}))
                    .collect()
            };
            let records: Vec<BicliqueRecord> = step
                .bicliques
                .iter()
                .cloned()
                .map(BicliqueRecord::Weighted)
                .collect();
            let bic: Value =
                serde_json::from_str(&bicliques_to_json(&records)).unwrap_or(Value::Null);
            let explicit: Vec<Value> = step
                .explicit
                .iter()
                .map(|(u, v, w)| json!([u, v, w]))
                .collect();
            let mut v = json!({
                "F": step.f,
                "C": step.c,
                "f_cliques": cliques(&step.f_cliques),
                "c_cliques": cliques(&step.c_cliques),
                "bicliques": bic,
                "explicit": explicit,
            });
            round_floats(&mut v);
            pretty(&v)
        }
        Command::ReduceWeights { xi, .. } => {
            let g = directed(&bytes)?;
            let n = g.n;
            let xi = xi.unwrap_or_else(|| default_xi(n));
            let red = reduce_to_unit(&g, xi, default_keep_bits(n))?;
            report.edge_counts = vec![g.m(), red.stats.edge_total];
            let want: (Vec<i128>, Vec<i128>) = (
                g.out_degrees().iter().map(|&d| d as i128).collect(),
                g.in_degrees().iter().map(|&d| d as i128).collect(),
            );
            let exact = red.degrees() == want;
            report.degree_exact = Some(exact);
            report.check("degrees", exact, None);
            report.metric("xi", xi);
            report.metric("parts", red.stats.parts);
            report.metric("classes", red.classes.len());
            report.metric("vertex_total", red.stats.vertex_total);
            report.metric("vertex_budget_n_log2_n", n * ceil_log2(n.max(2)).pow(2));
            report.metric("absorbed_arcs", red.stats.absorbed_arcs);
            let over = red
                .stats
                .touched
                .iter()
                .zip(&red.stats.touched_limit)
                .filter(|(t, l)| **t > 2 * **l)
                .count();
            report.check(
                "touched_components",
                over == 0,
                Some(format!("{over} buckets over 2n")),
            );
            if n <= DENSE_LIMIT {
                let err = red.error_against(&g);
                let tol = 1.0 / (n.max(1) * n.max(1)) as f64;
                report.certificate("asym", err);
                report.check(
                    "asym_within_n_minus_2",
                    err <= tol,
                    Some(format!("{err:e} vs {tol:e}")),
                );
            }
            let classes: Vec<Value> = red
                .classes
                .iter()
                .map(|cl| {
                    let arcs: Vec<Value> =
                        cl.graph.edges.iter().map(|e| json!([e.u, e.v])).collect();
                    json!({"exp": cl.exp, "arcs": arcs})
                })
                .collect();
            let base: Vec<Value> = red
                .sparse
                .base
                .iter()
                .map(|(u, v, w)| json!([u, v, w]))
                .collect();
            let corr: Vec<Value> = red
                .sparse
                .corrections
                .iter()
                .map(|(u, v, w)| json!([u, v, w.to_string()]))
                .collect();
            let mut v = json!({"n": n, "xi": xi, "tree_base": base, "tree_corrections": corr, "classes": classes});
            round_floats(&mut v);
            pretty(&v)
        }
        Command::Verify { .. } => unreachable!("handled above"),
    };
    report.metric("output_sha256", input_hash(output.as_bytes()));
    Ok((output, report))
}

fn command_name(c: &Command) -> &'static str {
    match c {
        Command::Decompose { .. } => "decompose",
        Command::Sparsify { .. } => "sparsify",
        Command::SparsifyEulerian { .. } => "sparsify-eulerian",
        Command::Sketch { .. } => "sketch",
        Command::Resistances { .. } => "resistances",
        Command::SchurStep { .. } => "schur-step",
        Command::ReduceWeights { .. } => "reduce-weights",
        Command::Verify { .. } => "verify",
    }
}

fn round_floats(v: &mut Value) {
    match v {
        Value::Number(num) if num.is_f64() => {
            if let Some(r) = num
                .as_f64()
                .map(cyclesparse::report::round_sig)
                .and_then(serde_json::Number::from_f64)
            {
                *num = r;
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_floats),
        Value::Object(map) => map.values_mut().for_each(round_floats),
        _ => {}
    }
}

fn verify(certificate: &Path, args: Vec<String>) -> Result<(String, ApproxReport), Failure> {
    let stored_bytes = read_input(certificate)?;
    let stored_text =
        std::str::from_utf8(&stored_bytes).map_err(|_| usage("certificate is not UTF-8"))?;
    let mut stored = ApproxReport::from_json(stored_text)?;
    let mut report = ApproxReport::new("verify", args, stored.seed, &stored_bytes);
    if stored.command == "verify" {
        return Err(usage("certificate records a verify run"));
    }
    let replay = execute(&stored.args);
    let Some(mut fresh) = replay.report else {
        return Err(Failure {
            code: EXIT_INVARIANT,
            message: format!("replay failed: {}", replay.message.unwrap_or_default()),
        });
    };
    report.check(
        "input_hash",
        fresh.input_sha256 == stored.input_sha256,
        None,
    );
    // Wall-clock time is the one field allowed to differ between replays.
    let identical = if stored.wall_clock_ms.is_some() {
        stored.wall_clock_ms = None;
        fresh.wall_clock_ms = None;
        fresh.to_json() == stored.to_json()
    } else {
        fresh.to_json() == stored_text
    };
    report.check("report_identical", identical, None);
    report.metric("replayed", &stored.args);
    Ok((fresh.to_json(), report))
}

//! The `lctrs` command line.
//!
//! Exit codes: 0 when every goal is proved or valid, 1 on any failure or
//! invalid instance, 2 when the answer is inconclusive (aborted search,
//! solver unknowns, frontier-limited graphs), 3 on input errors.

use std::collections::BTreeSet;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use super::{load, GoalKind, Spec};
use crate::lctrs::{derivatives, ReachabilityFormula};
use crate::oracle::{check_dvp, check_goal, parse_edge_list, Domain, DvpVerdict, InstanceCheck, TransitionGraph};
use crate::par::Exec;
use crate::prover::{prove, GoalOutcome, SearchConfig};
use crate::smt::{Solver, SolverConfig, Verdict};
use crate::terms::FreshCounter;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILED: i32 = 1;
pub const EXIT_INCONCLUSIVE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;

pub const DEFAULT_BOUND: u32 = 6;
pub const DEFAULT_STEPS: usize = 64;

#[derive(Parser, Debug)]
#[command(name = "lctrs", version, about = "Reachability prover for logically constrained rewrite systems")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// Maximum number of der-forall steps on a branch.
    #[arg(long, global = true)]
    pub max_depth: Option<usize>,
    /// Maximum number of derivatives of one der-forall step.
    #[arg(long, global = true)]
    pub max_branch: Option<usize>,
    /// SMT solver executable; defaults to $RMT_SOLVER, then `z3`.
    #[arg(long, global = true)]
    pub solver: Option<String>,
    /// Per-query solver timeout.
    #[arg(long, global = true)]
    pub timeout_ms: Option<u64>,
    /// Print proof trees.
    #[arg(long, global = true, value_enum, num_args = 0..=1, default_missing_value = "text")]
    pub dump_proof: Option<DumpFormat>,
    /// Integer bound of the oracle domain.
    #[arg(long, global = true)]
    pub bound: Option<u32>,
    /// Exploration depth of the oracle graph.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Allow case splits given by `split` annotations.
    #[arg(long, global = true)]
    pub enable_disj: bool,
    /// Run goals and graph layers on one thread.
    #[arg(long, global = true)]
    pub sequential: bool,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Prove every `prove` and `circ` goal of a spec file.
    Prove { file: PathBuf },
    /// Print the derivatives of a constrained term.
    Derive {
        file: PathBuf,
        /// A constrained term `t /\ φ` over the spec's signature.
        #[arg(long)]
        term: String,
    },
    /// Check the goals on the ground transition graph over a bounded domain.
    Oracle {
        file: PathBuf,
        #[arg(long)]
        export_dot: Option<PathBuf>,
        #[arg(long)]
        export_edges: Option<PathBuf>,
    },
    /// Decide demonic validity on a graph given in edge-list form.
    CheckGraph { file: PathBuf },
    /// Parse, resolve and validate a spec file.
    Validate { file: PathBuf },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DumpFormat {
    Text,
    Json,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let text = e.render().to_string();
            return if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = write!(out, "{text}");
                EXIT_OK
            } else {
                let _ = write!(err, "{text}");
                EXIT_INPUT
            };
        }
    };
    match execute(&cli, out, err) {
        Ok(code) => code,
        Err(Failure(code, msg)) => {
            let _ = writeln!(err, "error: {msg}");
            code
        }
    }
}

struct Failure(i32, String);

fn input<E: std::fmt::Display>(e: E) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

fn io(e: std::io::Error) -> Failure {
    Failure(EXIT_INPUT, e.to_string())
}

fn read_spec(path: &Path) -> Result<Spec, Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))?;
    load(&text).map_err(|e| input(format!("{}: {e}", path.display())))
}

impl Cli {
    fn exec(&self) -> Exec {
        if self.sequential {
            Exec::Sequential
        } else {
            Exec::default()
        }
    }

    fn solver(&self, spec: &Spec) -> Solver {
        let timeout = self
            .timeout_ms
            .or(spec.options.timeout_ms)
            .unwrap_or(crate::smt::DEFAULT_TIMEOUT_MS);
        Solver::new(SolverConfig::resolve(self.solver.as_deref()).with_timeout_ms(timeout))
    }

    fn search_config(&self, spec: &Spec) -> SearchConfig {
        let d = SearchConfig::default();
        let o = &spec.options;
        SearchConfig {
            max_der_depth: self.max_depth.or(o.max_depth).unwrap_or(d.max_der_depth),
            max_branching: self.max_branch.or(o.max_branch).unwrap_or(d.max_branching),
            enable_disj: self.enable_disj || o.enable_disj.unwrap_or(false),
            node_budget: o.node_budget.unwrap_or(d.node_budget),
            exec: self.exec(),
        }
    }
}

fn execute(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    match &cli.command {
        Command::Prove { file } => cmd_prove(cli, &read_spec(file)?, out, err),
        Command::Derive { file, term } => cmd_derive(cli, &read_spec(file)?, term, out),
        Command::Oracle {
            file,
            export_dot,
            export_edges,
        } => cmd_oracle(cli, &read_spec(file)?, export_dot.as_deref(), export_edges.as_deref(), out),
        Command::CheckGraph { file } => cmd_check_graph(file, out),
        Command::Validate { file } => {
            let spec = read_spec(file)?;
            let sig = spec.lctrs.signature();
            writeln!(
                out,
                "ok: {} sorts, {} symbols, {} rules, {} goals",
                sig.user_sorts().len(),
                sig.symbols().len(),
                spec.lctrs.rules().len(),
                spec.goals.len()
            )
            .map_err(io)?;
            Ok(EXIT_OK)
        }
    }
}

fn kind_of(spec: &Spec, f: &ReachabilityFormula) -> GoalKind {
    spec.goals
        .iter()
        .find(|g| g.formula == *f)
        .map(|g| g.kind)
        .unwrap_or(GoalKind::Prove)
}

fn cmd_prove(cli: &Cli, spec: &Spec, out: &mut dyn Write, err: &mut dyn Write) -> Result<i32, Failure> {
    let (goals, splits) = spec.goal_set();
    if goals.is_empty() {
        return Err(input("no goals to prove"));
    }
    let solver = cli.solver(spec);
    if !solver.is_available() {
        writeln!(err, "warning: solver {} is not available", solver.config().executable.display()).map_err(io)?;
    }
    let cfg = cli.search_config(spec);
    let result = prove(&spec.lctrs, &goals, &splits, &cfg, &solver);

    if cli.dump_proof == Some(DumpFormat::Json) {
        let items: Vec<serde_json::Value> = result
            .goals
            .iter()
            .map(|(f, o)| {
                let mut v = json!({
                    "goal": f.to_string(),
                    "kind": kind_of(spec, f).keyword(),
                    "outcome": o.label(),
                    "tree": o.tree().map(|t| t.to_json()),
                });
                match o {
                    GoalOutcome::Failed { frontier, .. } => {
                        v["frontier"] = json!(frontier.iter().map(ToString::to_string).collect::<Vec<_>>());
                    }
                    GoalOutcome::Aborted(why) => v["reason"] = json!(why),
                    GoalOutcome::Proved(_) => {}
                }
                v
            })
            .collect();
        writeln!(out, "{}", serde_json::to_string_pretty(&items).expect("json renders")).map_err(io)?;
    } else {
        for (i, (f, o)) in result.goals.iter().enumerate() {
            writeln!(out, "goal {} ({}) {}: {f}", i + 1, kind_of(spec, f).keyword(), o.label()).map_err(io)?;
            match o {
                GoalOutcome::Failed { frontier, .. } => {
                    for g in frontier {
                        writeln!(out, "  open: {g}").map_err(io)?;
                    }
                }
                GoalOutcome::Aborted(why) => writeln!(out, "  reason: {why}").map_err(io)?,
                GoalOutcome::Proved(_) => {}
            }
            if cli.dump_proof == Some(DumpFormat::Text) {
                if let Some(t) = o.tree() {
                    write!(out, "{}", t.to_text()).map_err(io)?;
                }
            }
        }
    }
    let outcomes: Vec<&GoalOutcome> = result.goals.iter().map(|(_, o)| o).collect();
    Ok(if outcomes.iter().any(|o| matches!(o, GoalOutcome::Failed { .. })) {
        EXIT_FAILED
    } else if outcomes.iter().any(|o| matches!(o, GoalOutcome::Aborted(_))) {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

fn cmd_derive(cli: &Cli, spec: &Spec, term: &str, out: &mut dyn Write) -> Result<i32, Failure> {
    let ct = spec.cterm(term).map_err(input)?;
    let solver = cli.solver(spec);
    let ds = derivatives(&spec.lctrs, &ct, &BTreeSet::new(), &mut FreshCounter::new(), &solver)
        .map_err(|e| Failure(EXIT_INCONCLUSIVE, e.to_string()))?;
    for d in &ds.items {
        let pos: Vec<String> = d.position.iter().map(|p| (p + 1).to_string()).collect();
        let at = if pos.is_empty() { "top".into() } else { pos.join(".") };
        write!(out, "rule {} at {at}: {}", d.rule + 1, d.ct).map_err(io)?;
        if d.verdict == Verdict::Unknown {
            write!(out, "  (satisfiability unknown)").map_err(io)?;
        }
        writeln!(out).map_err(io)?;
    }
    writeln!(out, "{} derivative(s)", ds.len()).map_err(io)?;
    if ds.incomplete {
        writeln!(out, "incomplete: some successors may be missing").map_err(io)?;
    }
    Ok(if ds.incomplete || ds.has_unknown() {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

/// `path` with `-{tag}` inserted before the extension.
fn tagged(path: &Path, tag: &str) -> PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    let name = match path.extension() {
        Some(ext) => format!("{stem}-{tag}.{}", ext.to_string_lossy()),
        None => format!("{stem}-{tag}"),
    };
    path.with_file_name(name)
}

fn describe<N: Clone + Eq + std::hash::Hash + std::fmt::Display>(g: &TransitionGraph<N>, v: &DvpVerdict) -> String {
    match v {
        DvpVerdict::Valid => "valid".into(),
        DvpVerdict::Invalid { path, .. } => {
            let run: Vec<String> = path.iter().map(|&i| g.node(i).to_string()).collect();
            format!("invalid: {}", run.join(" -> "))
        }
        DvpVerdict::Inconclusive { frontier } => format!("inconclusive: unexplored successors of {}", g.node(*frontier)),
    }
}

fn cmd_oracle(
    cli: &Cli,
    spec: &Spec,
    dot: Option<&Path>,
    edges: Option<&Path>,
    out: &mut dyn Write,
) -> Result<i32, Failure> {
    let (goals, _) = spec.goal_set();
    let dom = Domain::new(cli.bound.or(spec.options.bound).unwrap_or(DEFAULT_BOUND));
    let steps = cli.steps.or(spec.options.steps).unwrap_or(DEFAULT_STEPS);
    let mut checks: Vec<(usize, Vec<InstanceCheck>)> = Vec::new();
    let (mut invalid, mut inconclusive) = (false, false);
    for (i, g) in goals.iter().enumerate() {
        match check_goal(&spec.lctrs, g, &dom, steps, cli.exec()) {
            Ok(cs) => checks.push((i, cs)),
            Err(e) => {
                writeln!(out, "goal {} error: {e}", i + 1).map_err(io)?;
                inconclusive = true;
            }
        }
    }
    let total: usize = checks.iter().map(|(_, cs)| cs.len()).sum();
    for (i, cs) in &checks {
        let worst = cs
            .iter()
            .find(|c| matches!(c.verdict, DvpVerdict::Invalid { .. }))
            .or_else(|| cs.iter().find(|c| matches!(c.verdict, DvpVerdict::Inconclusive { .. })));
        let sources: usize = cs.iter().map(|c| c.sources).sum();
        let label = worst.map_or("valid", |c| c.verdict.label());
        writeln!(
            out,
            "goal {} {label}: {} instance(s) of the shared variables, {sources} source state(s), bound {}",
            i + 1,
            cs.len(),
            dom.bound
        )
        .map_err(io)?;
        if let Some(c) = worst {
            let shared: Vec<String> = c.shared.iter().map(|(x, v)| format!("{x} = {v}")).collect();
            if !shared.is_empty() {
                writeln!(out, "  at {}", shared.join(", ")).map_err(io)?;
            }
            writeln!(out, "  {}", describe(&c.graph, &c.verdict)).map_err(io)?;
            match c.verdict {
                DvpVerdict::Invalid { .. } => invalid = true,
                _ => inconclusive = true,
            }
        }
        for (k, c) in cs.iter().enumerate() {
            let tag = format!("g{}-{}", i + 1, k + 1);
            for (path, render) in [(dot, true), (edges, false)] {
                let Some(path) = path else { continue };
                let target = if total == 1 { path.to_path_buf() } else { tagged(path, &tag) };
                let text = if render {
                    c.graph.to_dot(&c.p, &c.q)
                } else {
                    c.graph.to_edge_list(&c.p, &c.q)
                };
                std::fs::write(&target, text).map_err(io)?;
            }
        }
    }
    Ok(if invalid {
        EXIT_FAILED
    } else if inconclusive {
        EXIT_INCONCLUSIVE
    } else {
        EXIT_OK
    })
}

fn cmd_check_graph(file: &Path, out: &mut dyn Write) -> Result<i32, Failure> {
    let text = std::fs::read_to_string(file).map_err(|e| input(format!("{}: {e}", file.display())))?;
    let g = parse_edge_list(&text).map_err(|e| input(format!("{}: {e}", file.display())))?;
    let v = check_dvp(&g.graph, &g.p, &g.q);
    writeln!(out, "{}", describe(&g.graph, &v)).map_err(io)?;
    Ok(match v {
        DvpVerdict::Valid => EXIT_OK,
        DvpVerdict::Invalid { .. } => EXIT_FAILED,
        DvpVerdict::Inconclusive { .. } => EXIT_INCONCLUSIVE,
    })
}

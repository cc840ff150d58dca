//! SMT-LIB 2 backend driving an external solver process.

pub mod encode;
mod process;
pub mod sexp;

use std::collections::HashMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;
use std::time::Duration;

use serde::Serialize;
use thiserror::Error;

use crate::constraints::Formula;
use crate::terms::{Value, Var};
pub use encode::{encode, prepare, EncodeError, Prepared};

/// Environment variable naming the solver executable.
pub const SOLVER_ENV: &str = "RMT_SOLVER";
pub const DEFAULT_TIMEOUT_MS: u64 = 5000;
pub const DEFAULT_LOGIC: &str = "NIA";

// Extra wall-clock time granted beyond the solver's own timeout before the
// process is killed.
const KILL_GRACE: Duration = Duration::from_millis(1500);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Verdict {
    Sat,
    Unsat,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Sat => "sat",
            Verdict::Unsat => "unsat",
            Verdict::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Validity {
    Valid,
    Invalid,
    Unknown,
}

impl Validity {
    /// Validity of `φ` from the satisfiability verdict of `¬φ`.
    pub fn from_negation(v: Verdict) -> Validity {
        match v {
            Verdict::Unsat => Validity::Valid,
            Verdict::Sat => Validity::Invalid,
            Verdict::Unknown => Validity::Unknown,
        }
    }
}

impl fmt::Display for Validity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Validity::Valid => "valid",
            Validity::Invalid => "invalid",
            Validity::Unknown => "unknown",
        })
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtResult {
    pub verdict: Verdict,
    pub model: Option<Vec<(Var, Value)>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SmtError {
    #[error("solver unavailable: {0}")]
    SolverUnavailable(String),
    #[error(transparent)]
    Encode(#[from] EncodeError),
    #[error("malformed solver output: {0}")]
    MalformedSolverOutput(String),
    #[error("i/o error talking to solver: {0}")]
    Io(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverKind {
    Z3,
    Cvc5,
    Other,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SolverConfig {
    pub executable: PathBuf,
    pub kind: SolverKind,
    pub timeout_ms: u64,
    pub logic: String,
    /// Option sets tried in order while the answer is `unknown`.
    pub option_profiles: Vec<Vec<(String, String)>>,
}

impl SolverConfig {
    pub fn new(executable: impl AsRef<Path>) -> SolverConfig {
        let executable = executable.as_ref().to_path_buf();
        let stem = executable
            .file_name()
            .map(|s| s.to_string_lossy().to_lowercase())
            .unwrap_or_default();
        let kind = if stem.contains("z3") {
            SolverKind::Z3
        } else if stem.contains("cvc5") {
            SolverKind::Cvc5
        } else {
            SolverKind::Other
        };
        let option_profiles = match kind {
            // E-matching makes z3 give up on the nested quantified
            // divisibility constraints typical of loop invariants.
            SolverKind::Z3 => vec![vec![("smt.ematching".into(), "false".into())], vec![]],
            _ => vec![vec![]],
        };
        SolverConfig {
            executable,
            kind,
            timeout_ms: DEFAULT_TIMEOUT_MS,
            logic: DEFAULT_LOGIC.into(),
            option_profiles,
        }
    }

    /// Solver from an explicit choice, else `RMT_SOLVER`, else `z3`.
    pub fn resolve(explicit: Option<&str>) -> SolverConfig {
        let name = explicit
            .map(str::to_owned)
            .or_else(|| std::env::var(SOLVER_ENV).ok().filter(|s| !s.is_empty()))
            .unwrap_or_else(|| "z3".into());
        SolverConfig::new(name)
    }

    pub fn with_timeout_ms(mut self, ms: u64) -> SolverConfig {
        self.timeout_ms = ms.max(1);
        self
    }

    pub fn with_logic(mut self, logic: &str) -> SolverConfig {
        self.logic = logic.into();
        self
    }

    fn args(&self) -> Vec<String> {
        match self.kind {
            SolverKind::Z3 => vec!["-in".into(), "-smt2".into(), format!("-t:{}", self.timeout_ms)],
            SolverKind::Cvc5 => vec!["--lang=smt2".into(), format!("--tlimit-per={}", self.timeout_ms)],
            SolverKind::Other => vec![],
        }
    }
}

/// Anything that decides satisfiability of constraint formulas.
pub trait SatChecker: Sync {
    fn check_sat(&self, f: &Formula) -> Result<Verdict, SmtError>;

    fn check_valid(&self, f: &Formula) -> Result<Validity, SmtError> {
        self.check_sat(&Formula::not(f.clone())).map(Validity::from_negation)
    }
}

#[derive(Debug, Default)]
pub struct SolverStats {
    pub queries: AtomicUsize,
    pub decided_by_simplifier: AtomicUsize,
    pub cache_hits: AtomicUsize,
    pub solver_runs: AtomicUsize,
    pub unknowns: AtomicUsize,
}

/// A solver process driver with a per-instance answer cache keyed by the
/// script text.
pub struct Solver {
    config: SolverConfig,
    cache: Mutex<HashMap<String, SmtResult>>,
    pub stats: SolverStats,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Solver {
        Solver {
            config,
            cache: Mutex::new(HashMap::new()),
            stats: SolverStats::default(),
        }
    }

    pub fn config(&self) -> &SolverConfig {
        &self.config
    }

    /// A solver with the same configuration and an empty cache.
    pub fn fresh(&self) -> Solver {
        Solver::new(self.config.clone())
    }

    /// Whether the executable can be started at all.
    pub fn is_available(&self) -> bool {
        !matches!(
            self.check(&Formula::cmp(
                crate::signature::BuiltinOp::Lt,
                crate::terms::Term::var("x", crate::signature::Sort::int()),
                crate::terms::Term::int(0)
            ), false),
            Err(SmtError::SolverUnavailable(_))
        )
    }

    pub fn check(&self, f: &Formula, want_model: bool) -> Result<SmtResult, SmtError> {
        self.stats.queries.fetch_add(1, Ordering::Relaxed);
        let (decls, body) = match prepare(f) {
            Prepared::Decided(b) if !want_model => {
                self.stats.decided_by_simplifier.fetch_add(1, Ordering::Relaxed);
                let verdict = if b { Verdict::Sat } else { Verdict::Unsat };
                return Ok(SmtResult { verdict, model: None });
            }
            Prepared::Decided(false) => {
                return Ok(SmtResult {
                    verdict: Verdict::Unsat,
                    model: None,
                })
            }
            Prepared::Decided(true) => {
                let decls: Vec<Var> = f.free_vars().into_iter().collect();
                (decls, f.clone())
            }
            Prepared::Query { decls, body } => (decls, body),
        };
        let mut last = SmtResult {
            verdict: Verdict::Unknown,
            model: None,
        };
        for options in &self.config.option_profiles {
            let script = encode::encode_script(&self.config.logic, options, &decls, &body, want_model)?;
            if let Some(hit) = self.cache.lock().unwrap().get(&script) {
                self.stats.cache_hits.fetch_add(1, Ordering::Relaxed);
                if hit.verdict != Verdict::Unknown {
                    return Ok(hit.clone());
                }
                continue;
            }
            self.stats.solver_runs.fetch_add(1, Ordering::Relaxed);
            let result = self.run(&script, &decls)?;
            log::trace!("solver answered {} for\n{script}", result.verdict);
            self.cache.lock().unwrap().insert(script, result.clone());
            if result.verdict != Verdict::Unknown {
                return Ok(result);
            }
            last = result;
        }
        self.stats.unknowns.fetch_add(1, Ordering::Relaxed);
        Ok(last)
    }

    fn run(&self, script: &str, decls: &[Var]) -> Result<SmtResult, SmtError> {
        let limit = Duration::from_millis(self.config.timeout_ms) + KILL_GRACE;
        let out = process::run_solver(&self.config.executable, &self.config.args(), script, limit)?;
        if out.timed_out {
            return Ok(SmtResult {
                verdict: Verdict::Unknown,
                model: None,
            });
        }
        interpret(&out.stdout, decls)
    }
}

/// Reads the verdict from the first meaningful response line and, after
/// `sat`, an optional model.
pub fn interpret(stdout: &str, decls: &[Var]) -> Result<SmtResult, SmtError> {
    let mut lines = stdout.lines().map(str::trim).filter(|l| !l.is_empty());
    let mut errors = Vec::new();
    let verdict = loop {
        match lines.next() {
            None => {
                return Err(SmtError::MalformedSolverOutput(if errors.is_empty() {
                    "no answer".into()
                } else {
                    errors.join("; ")
                }))
            }
            Some("success") | Some("unsupported") => continue,
            Some("sat") => break Verdict::Sat,
            Some("unsat") => break Verdict::Unsat,
            Some("unknown") | Some("timeout") => break Verdict::Unknown,
            Some(l) if l.starts_with("(error") => errors.push(l.to_string()),
            Some(l) => return Err(SmtError::MalformedSolverOutput(l.to_string())),
        }
    };
    let mut model = None;
    if verdict == Verdict::Sat {
        let rest: Vec<&str> = lines.collect();
        if !rest.is_empty() {
            let text = rest.join("\n");
            if let Ok(sx) = sexp::parse_all(&text) {
                if let Some(first) = sx.first() {
                    model = sexp::parse_model(first, decls).ok();
                }
            }
        }
    }
    Ok(SmtResult { verdict, model })
}

impl SatChecker for Solver {
    fn check_sat(&self, f: &Formula) -> Result<Verdict, SmtError> {
        self.check(f, false).map(|r| r.verdict)
    }
}

/// Decides only what the simplifier settles and answers `Sat` otherwise.
/// Over-approximates satisfiability, so derivative sets computed with it
/// are supersets of the exact ones.
#[derive(Clone, Copy, Debug, Default)]
pub struct AssumeSat;

impl SatChecker for AssumeSat {
    fn check_sat(&self, f: &Formula) -> Result<Verdict, SmtError> {
        Ok(match prepare(f) {
            Prepared::Decided(false) => Verdict::Unsat,
            _ => Verdict::Sat,
        })
    }
}

//! The `opial` command-line front end: argument parsing, input loading, dispatch, report output.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use opial_core::dist::{make_uniform_interval, quantize, uniform_integers};
use opial_core::functionals::{evaluate, EvalRequest, DEFAULT_ORDER_CAP};
use opial_core::oracle::{enumerate_functional, OracleRequest, DEFAULT_BUDGET};
use opial_core::sharpness::{
    convergence_study, maximize_ratio_opial, search_counterexample, wirtinger_best_constant,
};
use opial_core::{Distribution, FunctionalId, NodeFunction, Terms, Tolerances};

/// Environment variable overriding the oracle summand budget.
pub const BUDGET_ENV: &str = "OPIAL_BUDGET";

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{path}:{message}")]
    Input { path: String, message: String },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Core(#[from] opial_core::Error),
    #[error("serializing report: {0}")]
    Serialize(#[from] serde_json::Error),
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Verify,
    OracleDiff,
    Sharpness,
    Converge,
    Search,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

/// Evaluate, verify and stress distribution-function Opial and Wirtinger inequalities.
#[derive(Debug, Parser)]
#[command(name = "opial", version)]
pub struct Cli {
    #[arg(value_enum)]
    pub command: Command,
    /// Distribution file: {"atoms": [[x, p], ...], "pieces": [{"lo", "hi", "mass"}, ...]}.
    #[arg(long, value_name = "PATH")]
    pub dist: Option<PathBuf>,
    /// ψ as a JSON file, inline JSON, or shorthand (constant[:level], identity, cos_pi_F,
    /// step:threshold:low:high, values:v1,v2,...). Defaults to constant 1.
    #[arg(long, value_name = "SPEC|PATH")]
    pub psi: Option<String>,
    /// Weight χ for the weighted family, same forms as --psi. Defaults to constant 1.
    #[arg(long, value_name = "SPEC|PATH")]
    pub chi: Option<String>,
    #[arg(long, value_name = "ID")]
    pub functional: Option<String>,
    /// Order for thm2.
    #[arg(long, value_name = "K")]
    pub n: Option<usize>,
    /// Split point for corollary and r4-split.
    #[arg(long, value_name = "REAL", allow_negative_numbers = true)]
    pub c: Option<f64>,
    /// Resolution for continuous parts; the largest support size for search.
    #[arg(long, value_name = "INT")]
    pub m: Option<usize>,
    /// Comma-separated increasing resolutions for converge.
    #[arg(long, value_name = "LIST", value_delimiter = ',')]
    pub grids: Option<Vec<usize>>,
    /// Relative tolerance (equality and verification; agreement for oracle-diff).
    #[arg(long, value_name = "REAL")]
    pub tol: Option<f64>,
    #[arg(long, value_name = "INT", default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Number of randomized trials for search.
    #[arg(long, value_name = "INT", default_value_t = 100_000)]
    pub trials: u64,
    /// Exponent p of the weight x^p for troy.
    #[arg(long, value_name = "REAL", default_value_t = 0.0, allow_negative_numbers = true)]
    pub weight_exp: f64,
    /// Centre ψ before evaluating wirtinger.
    #[arg(long)]
    pub project_mean: bool,
    /// Highest accepted order for thm2.
    #[arg(long, value_name = "K", default_value_t = DEFAULT_ORDER_CAP)]
    pub order_cap: usize,
}

/// Validated run parameters.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub command: Command,
    pub dist: Option<Distribution>,
    pub psi: NodeFunction,
    pub chi: Option<NodeFunction>,
    pub functional: FunctionalId,
    pub n: Option<usize>,
    pub c: Option<f64>,
    pub m: Option<usize>,
    pub grids: Vec<usize>,
    pub tol: f64,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub trials: u64,
    pub weight_exp: f64,
    pub project_mean: bool,
    pub order_cap: usize,
    pub budget: u128,
}

impl RunConfig {
    /// Validate `cli`, load the referenced inputs and read [`BUDGET_ENV`].
    pub fn from_cli(cli: Cli) -> CliResult<Self> {
        let budget = match std::env::var(BUDGET_ENV) {
            Ok(raw) => raw
                .trim()
                .parse::<u128>()
                .map_err(|_| CliError::Usage(format!("{BUDGET_ENV}={raw:?} is not a nonnegative integer")))?,
            Err(_) => DEFAULT_BUDGET,
        };
        Self::from_cli_with_budget(cli, budget)
    }

    pub fn from_cli_with_budget(cli: Cli, budget: u128) -> CliResult<Self> {
        let functional: FunctionalId = cli
            .functional
            .as_deref()
            .ok_or_else(|| CliError::Usage("--functional is required".into()))?
            .parse()
            .map_err(|e: opial_core::Error| CliError::Usage(e.to_string()))?;
        let default_tol = match cli.command {
            Command::OracleDiff => Tolerances::default().oracle,
            _ => Tolerances::default().equality,
        };
        let tol = cli.tol.unwrap_or(default_tol);
        if !(tol > 0.0 && tol.is_finite()) {
            return Err(CliError::Usage(format!("--tol must be positive, got {tol}")));
        }
        let format = match (cli.command, cli.format) {
            (Command::Converge, f) => f.unwrap_or(Format::Csv),
            (_, Some(Format::Csv)) => {
                return Err(CliError::Usage("--format csv is only available for converge".into()));
            }
            _ => Format::Json,
        };
        if cli.m == Some(0) {
            return Err(CliError::Usage("--m must be positive".into()));
        }
        let dist = cli.dist.as_deref().map(load_distribution).transpose()?;
        let psi = match cli.psi.as_deref() {
            Some(arg) => load_node_function(arg)?,
            None => NodeFunction::constant(1.0),
        };
        let chi = cli.chi.as_deref().map(load_node_function).transpose()?;
        Ok(Self {
            command: cli.command,
            dist,
            psi,
            chi,
            functional,
            n: cli.n,
            c: cli.c,
            m: cli.m,
            grids: cli.grids.unwrap_or_default(),
            tol,
            seed: cli.seed,
            out: cli.out,
            format,
            trials: cli.trials,
            weight_exp: cli.weight_exp,
            project_mean: cli.project_mean,
            order_cap: cli.order_cap,
            budget,
        })
    }
}

fn input_error(path: &Path, message: impl Into<String>) -> CliError {
    CliError::Input {
        path: path.display().to_string(),
        message: message.into(),
    }
}

fn json_error(path: &Path, e: &serde_json::Error) -> CliError {
    if e.line() == 0 {
        input_error(path, format!(" {e}"))
    } else {
        input_error(path, format!("{}:{}: {e}", e.line(), e.column()))
    }
}

/// Parse and validate a distribution file.
pub fn load_distribution(path: &Path) -> CliResult<Distribution> {
    let raw = fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    serde_json::from_str(&raw).map_err(|e| json_error(path, &e))
}

/// Resolve a `--psi`/`--chi` argument: an existing file, inline JSON, or shorthand.
///
/// JSON may be a tagged object or a bare array of node values.
pub fn load_node_function(arg: &str) -> CliResult<NodeFunction> {
    let path = Path::new(arg);
    if path.is_file() {
        let raw = fs::read_to_string(path).map_err(|source| CliError::Io {
            path: arg.to_owned(),
            source,
        })?;
        return parse_node_json(&raw).map_err(|e| json_error(path, &e));
    }
    let trimmed = arg.trim();
    if trimmed.starts_with('{') || trimmed.starts_with('[') {
        return parse_node_json(trimmed).map_err(|e| json_error(Path::new("<inline>"), &e));
    }
    parse_shorthand(trimmed)
}

fn parse_node_json(raw: &str) -> Result<NodeFunction, serde_json::Error> {
    if raw.trim_start().starts_with('[') {
        serde_json::from_str::<Vec<f64>>(raw).map(NodeFunction::values)
    } else {
        serde_json::from_str(raw)
    }
}

fn parse_shorthand(arg: &str) -> CliResult<NodeFunction> {
    let bad = |why: &str| CliError::Usage(format!("cannot read function {arg:?}: {why}"));
    let num = |s: &str| s.trim().parse::<f64>().map_err(|_| bad(&format!("{s:?} is not a number")));
    let (head, rest) = match arg.split_once(':') {
        Some((h, r)) => (h, Some(r)),
        None => (arg, None),
    };
    Ok(match (head, rest) {
        ("constant", None) => NodeFunction::constant(1.0),
        ("constant", Some(level)) => NodeFunction::constant(num(level)?),
        ("identity", None) => NodeFunction::Identity,
        ("cos_pi_F", None) => NodeFunction::CosPiF,
        ("step", Some(args)) => {
            let parts: Vec<&str> = args.split(':').collect();
            let [t, lo, hi] = parts[..] else {
                return Err(bad("expected step:threshold:low:high"));
            };
            NodeFunction::Step {
                threshold: num(t)?,
                low: num(lo)?,
                high: num(hi)?,
            }
        }
        ("values", Some(list)) => NodeFunction::values(list.split(',').map(num).collect::<CliResult<Vec<_>>>()?),
        _ => return Err(bad("not a file, JSON, or known shorthand")),
    })
}

/// What a command concluded.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Verified,
    Violation,
}

impl Verdict {
    pub fn exit_code(self) -> i32 {
        match self {
            Verdict::Verified => 0,
            Verdict::Violation => 2,
        }
    }

    fn from_ok(ok: bool) -> Self {
        if ok {
            Verdict::Verified
        } else {
            Verdict::Violation
        }
    }
}

/// A command's rendered report and verdict.
#[derive(Debug, Clone)]
pub struct Output {
    pub body: String,
    pub verdict: Verdict,
    /// Human-oriented notes for stderr.
    pub notes: Vec<String>,
}

fn to_json<T: Serialize>(value: &T) -> CliResult<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// The distribution to evaluate against; discrete identities default to uniform `{1..N}` and
/// `troy` to `U(0,1)`.
fn distribution_for(cfg: &RunConfig) -> CliResult<Distribution> {
    if let Some(d) = &cfg.dist {
        return Ok(d.clone());
    }
    if cfg.functional == FunctionalId::Troy {
        return Ok(make_uniform_interval(0.0, 1.0)?);
    }
    if cfg.functional.is_discrete_identity() {
        if let NodeFunction::Values { values } = &cfg.psi {
            return Ok(uniform_integers(values.len())?);
        }
        return Err(CliError::Usage(format!(
            "{} needs --dist or a values-kind --psi",
            cfg.functional
        )));
    }
    Err(CliError::Usage("--dist is required".into()))
}

fn eval_request(cfg: &RunConfig) -> EvalRequest {
    let mut req = EvalRequest::new(cfg.functional);
    req.n = cfg.n;
    req.c = cfg.c;
    req.chi = cfg.chi.clone();
    req.weight_exp = cfg.weight_exp;
    req.project_mean = cfg.project_mean;
    req.m = cfg.m.unwrap_or(if cfg.functional == FunctionalId::Troy { 1000 } else { 1 });
    req.order_cap = cfg.order_cap;
    req.tol = cfg.tol;
    req
}

#[derive(Serialize)]
struct OracleDiff<'a> {
    functional: FunctionalId,
    #[serde(skip_serializing_if = "Option::is_none")]
    n: Option<usize>,
    fast: &'a Terms,
    oracle: &'a Terms,
    rel_err: f64,
    tol: f64,
    agree: bool,
}

fn relative_gap(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn oracle_diff(cfg: &RunConfig) -> CliResult<Output> {
    let f = distribution_for(cfg)?;
    let q = quantize(&f, cfg.m.unwrap_or(1))?;
    // The oracle sees the atomized model, so the fast side evaluates the same atoms.
    let atomic = q.to_distribution();
    let mut req = eval_request(cfg);
    req.m = 1;
    let fast = evaluate(&atomic, &cfg.psi, &req)?;

    let psi = cfg.psi.resolve(&q)?;
    let chi = cfg.chi.as_ref().map(|c| c.resolve(&q)).transpose()?;
    let mut oreq = OracleRequest::new(cfg.functional, &psi);
    oreq.chi = chi.as_deref();
    oreq.n = Some(cfg.n.unwrap_or(1));
    oreq.c = cfg.c;
    oreq.project_mean = cfg.project_mean;
    oreq.budget = cfg.budget;
    let oracle = enumerate_functional(&q, &oreq)?;

    let fast_terms: Vec<_> = fast.terms.iter().collect();
    let oracle_terms: Vec<_> = oracle.iter().collect();
    if fast_terms.len() != oracle_terms.len() {
        return Err(CliError::Usage(format!("no matching oracle terms for {}", cfg.functional)));
    }
    let rel_err = fast_terms
        .iter()
        .zip(&oracle_terms)
        .map(|((_, a), (_, b))| relative_gap(*a, *b))
        .fold(0.0, f64::max);
    let agree = rel_err <= cfg.tol;
    let diff = OracleDiff {
        functional: cfg.functional,
        n: (cfg.functional == FunctionalId::Thm2).then(|| cfg.n.unwrap_or(1)),
        fast: &fast.terms,
        oracle: &oracle,
        rel_err,
        tol: cfg.tol,
        agree,
    };
    Ok(Output {
        body: to_json(&diff)?,
        verdict: Verdict::from_ok(agree),
        notes: Vec::new(),
    })
}

fn verify(cfg: &RunConfig) -> CliResult<Output> {
    let f = distribution_for(cfg)?;
    let report = evaluate(&f, &cfg.psi, &eval_request(cfg))?;
    let mut notes = Vec::new();
    if report.heuristic {
        notes.push(format!("{}: the bound is not a theorem on this input (heuristic)", report.functional));
    }
    let holds = report.holds(cfg.tol);
    Ok(Output {
        body: to_json(&report)?,
        verdict: Verdict::from_ok(holds || report.heuristic),
        notes,
    })
}

fn sharpness(cfg: &RunConfig) -> CliResult<Output> {
    match cfg.functional {
        FunctionalId::Thm1Lower | FunctionalId::Thm1Upper => {
            let f = distribution_for(cfg)?;
            let q = quantize(&f, cfg.m.unwrap_or(1))?;
            let r = maximize_ratio_opial(&q, cfg.functional.direction().expect("directional id"));
            Ok(Output {
                body: to_json(&r)?,
                verdict: Verdict::from_ok(r.ratio_star <= 1.0 + 1e-9),
                notes: Vec::new(),
            })
        }
        FunctionalId::Wirtinger => {
            let w = wirtinger_best_constant(cfg.m.unwrap_or(1000))?;
            Ok(Output {
                body: to_json(&w)?,
                verdict: Verdict::Verified,
                notes: Vec::new(),
            })
        }
        other => Err(CliError::Usage(format!(
            "sharpness supports thm1-lower, thm1-upper and wirtinger, not {other}"
        ))),
    }
}

fn converge(cfg: &RunConfig) -> CliResult<Output> {
    if cfg.grids.is_empty() {
        return Err(CliError::Usage("--grids is required for converge".into()));
    }
    let table = convergence_study(cfg.functional, cfg.n, &cfg.grids)?;
    let body = match cfg.format {
        Format::Csv => table.to_csv(),
        Format::Json => to_json(&table)?,
    };
    Ok(Output {
        body,
        verdict: Verdict::Verified,
        notes: Vec::new(),
    })
}

fn search(cfg: &RunConfig) -> CliResult<Output> {
    let outcome = search_counterexample(cfg.functional, cfg.trials, cfg.seed, cfg.m.unwrap_or(30))?;
    let mut notes = Vec::new();
    let verdict = match (&outcome.violation, outcome.heuristic) {
        (None, _) => Verdict::Verified,
        (Some(v), true) => {
            notes.push(format!(
                "{}: heuristic class, trial {} has relative slack {:e} (logged, not a failure)",
                outcome.functional,
                v.trial,
                v.report.relative_chain_slack()
            ));
            Verdict::Verified
        }
        (Some(v), false) => {
            notes.push(format!(
                "{}: violation at trial {} with relative slack {:e}",
                outcome.functional,
                v.trial,
                v.report.relative_chain_slack()
            ));
            Verdict::Violation
        }
    };
    Ok(Output {
        body: to_json(&outcome)?,
        verdict,
        notes,
    })
}

/// Execute `cfg` and return the rendered report without writing it.
pub fn execute(cfg: &RunConfig) -> CliResult<Output> {
    match cfg.command {
        Command::Verify => verify(cfg),
        Command::OracleDiff => oracle_diff(cfg),
        Command::Sharpness => sharpness(cfg),
        Command::Converge => converge(cfg),
        Command::Search => search(cfg),
    }
}

/// Write `body` to `path` through a temporary file in the same directory and a rename.
pub fn write_atomically(path: &Path, body: &str) -> CliResult<()> {
    let io = |source| CliError::Io {
        path: path.display().to_string(),
        source,
    };
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(io)?;
    tmp.write_all(body.as_bytes()).map_err(io)?;
    tmp.as_file().sync_all().map_err(io)?;
    tmp.persist(path).map_err(|e| io(e.error))?;
    Ok(())
}

/// Run a full invocation and return the process exit code.
pub fn run(cfg: &RunConfig) -> CliResult<Verdict> {
    let out = execute(cfg)?;
    for note in &out.notes {
        eprintln!("{note}");
    }
    match &cfg.out {
        Some(path) => write_atomically(path, &out.body)?,
        None => print!("{}", out.body),
    }
    Ok(out.verdict)
}

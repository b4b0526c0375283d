//! Command-line harness: experiment subcommands, manifest runs and
//! deterministic JSON/CSV artifacts.
//!
//! Exit codes: 0 success, 1 validation or I/O error, 2 a checked claim
//! failed, 3 the run was refused by a budget.

pub mod commands;
pub mod manifest;
pub mod output;
pub mod selftest;

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use commands::{dispatch, Status};
use manifest::{Command, ExperimentManifest, Format, SpaceSpec};
use output::{canonical_value, envelope, manifest_hash, meta_path, render, write_atomic, RunMeta, Table};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
    Budget(String),
    Verification(String),
    Internal(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Validation(m) => write!(f, "invalid input: {m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
            CliError::Budget(m) => write!(f, "refused by budget: {m}"),
            CliError::Verification(m) => write!(f, "verification failed: {m}"),
            CliError::Internal(m) => write!(f, "internal: {m}"),
        }
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Validation(_) | CliError::Io(_) | CliError::Internal(_) => 1,
            CliError::Verification(_) => 2,
            CliError::Budget(_) => 3,
        }
    }
}

impl From<closurelab::Error> for CliError {
    fn from(e: closurelab::Error) -> Self {
        match e {
            closurelab::Error::BudgetExceeded { .. } => CliError::Budget(e.to_string()),
            closurelab::Error::Internal(_) => CliError::Verification(e.to_string()),
            _ => CliError::Validation(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(name = "closurelab", version, about = "Closedness, spectra and forcing experiments over F2 tensor spaces")]
pub struct Cli {
    /// Seed for every random choice in the run.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true)]
    pub workers: Option<usize>,
    /// Exact measurement instead of sampling where both exist.
    #[arg(long, global = true)]
    pub exact: bool,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Runs a JSON manifest; the same as the `run` subcommand.
    #[arg(long)]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Option<Sub>,
}

#[derive(Debug, Subcommand)]
pub enum Sub {
    /// Closedness of A under the multiset B.
    Closedness {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        a: String,
        #[arg(long)]
        b: Option<String>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        confidence: Option<f64>,
        #[arg(long)]
        radius: Option<String>,
    },
    /// Integer Walsh–Hadamard spectrum of a set.
    Spectrum {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        set: String,
        #[arg(long)]
        threshold: Option<String>,
    },
    /// Subspace inside S+S+S+S.
    Bogolyubov {
        #[arg(long)]
        n: u32,
        #[arg(long)]
        set: String,
    },
    /// Matrix-case pipeline on a seeded dense set of rank-1 matrices.
    ForcingPipeline {
        #[arg(long, value_delimiter = ',')]
        shape: Vec<usize>,
        #[arg(long)]
        delta: Option<String>,
        #[arg(long)]
        epsilon: Option<String>,
        #[arg(long)]
        l: Option<usize>,
    },
    /// Size and membership count of a simple set.
    SimpleSet {
        #[arg(long, value_delimiter = ',')]
        shape: Vec<usize>,
        /// `AXES:ROWS`, e.g. `0,1:1,82`; repeatable.
        #[arg(long = "space")]
        spaces: Vec<String>,
        #[arg(long)]
        translate: Option<String>,
    },
    /// l-system from a seeded dense set of rank-1 tensors.
    Lsystem {
        #[arg(long, value_delimiter = ',')]
        shape: Vec<usize>,
        #[arg(long)]
        delta: Option<String>,
        /// Subspace-form simple set to intersect with, `AXES:ROWS`; repeatable.
        #[arg(long = "simple-space")]
        simple: Vec<String>,
    },
    /// Hamming-layer compatibility trend and slice concentration.
    Counterexample {
        #[arg(long, value_delimiter = ',')]
        n: Vec<u32>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long)]
        samples: Option<u64>,
        #[arg(long)]
        confidence: Option<f64>,
        #[arg(long)]
        radius: Option<String>,
        #[arg(long)]
        concentration_n: Option<u32>,
        #[arg(long)]
        concentration_w: Option<u32>,
        #[arg(long)]
        threshold: Option<String>,
    },
    /// The worked closedness scenarios.
    Scenarios,
    /// Runs a JSON manifest; global flags override its fields.
    Run {
        #[arg(long)]
        manifest: PathBuf,
    },
    /// Exact identity suite.
    Selftest {
        #[arg(long, value_enum, hide = true)]
        inject_fault: Option<selftest::Fault>,
    },
}

fn parse_space_flag(s: &str) -> Result<SpaceSpec, CliError> {
    let (axes, rows) = s
        .split_once(':')
        .ok_or_else(|| CliError::Validation(format!("space {s:?} is not AXES:ROWS")))?;
    let axes = axes
        .split(',')
        .map(|a| a.trim().parse().map_err(|_| CliError::Validation(format!("bad axis in {s:?}"))))
        .collect::<Result<Vec<usize>, _>>()?;
    let rows = rows.split(',').filter(|r| !r.is_empty()).map(str::to_string).collect();
    Ok(SpaceSpec { axes, rows })
}

fn put<T: serde::Serialize>(params: &mut BTreeMap<String, Value>, key: &str, v: Option<T>) {
    if let Some(v) = v {
        params.insert(key.into(), json!(v));
    }
}

fn spaces_value(specs: &[String]) -> Result<Value, CliError> {
    let parsed = specs.iter().map(|s| parse_space_flag(s)).collect::<Result<Vec<_>, _>>()?;
    canonical_value(&parsed)
}

/// The manifest a flag-style invocation stands for.
fn manifest_from_flags(cli: &Cli) -> Result<Option<ExperimentManifest>, CliError> {
    let mut p = BTreeMap::new();
    let Some(sub) = &cli.command else { return Ok(None) };
    let command = match sub {
        Sub::Closedness { n, a, b, samples, confidence, radius } => {
            put(&mut p, "n", Some(n));
            put(&mut p, "a", Some(a));
            put(&mut p, "b", b.as_ref());
            put(&mut p, "samples", *samples);
            put(&mut p, "confidence", *confidence);
            put(&mut p, "radius", radius.as_ref());
            Command::Closedness
        }
        Sub::Spectrum { n, set, threshold } => {
            put(&mut p, "n", Some(n));
            put(&mut p, "set", Some(set));
            put(&mut p, "threshold", threshold.as_ref());
            Command::Spectrum
        }
        Sub::Bogolyubov { n, set } => {
            put(&mut p, "n", Some(n));
            put(&mut p, "set", Some(set));
            Command::Bogolyubov
        }
        Sub::ForcingPipeline { shape, delta, epsilon, l } => {
            put(&mut p, "shape", Some(shape));
            put(&mut p, "delta", delta.as_ref());
            put(&mut p, "epsilon", epsilon.as_ref());
            put(&mut p, "l", *l);
            Command::ForcingPipeline
        }
        Sub::SimpleSet { shape, spaces, translate } => {
            put(&mut p, "shape", Some(shape));
            p.insert("spaces".into(), spaces_value(spaces)?);
            put(&mut p, "translate", translate.as_ref());
            Command::SimpleSet
        }
        Sub::Lsystem { shape, delta, simple } => {
            put(&mut p, "shape", Some(shape));
            put(&mut p, "delta", delta.as_ref());
            if !simple.is_empty() {
                p.insert("simple".into(), spaces_value(simple)?);
            }
            Command::Lsystem
        }
        Sub::Counterexample {
            n,
            c,
            samples,
            confidence,
            radius,
            concentration_n,
            concentration_w,
            threshold,
        } => {
            put(&mut p, "n", (!n.is_empty()).then_some(n));
            put(&mut p, "c", *c);
            put(&mut p, "samples", *samples);
            put(&mut p, "confidence", *confidence);
            put(&mut p, "radius", radius.as_ref());
            put(&mut p, "concentration_n", *concentration_n);
            put(&mut p, "concentration_w", *concentration_w);
            put(&mut p, "threshold", threshold.as_ref());
            Command::Counterexample
        }
        Sub::Scenarios => Command::Scenarios,
        Sub::Run { .. } | Sub::Selftest { .. } => return Ok(None),
    };
    Ok(Some(ExperimentManifest {
        command,
        params: p,
        seed: 0,
        budgets: Default::default(),
        output: Default::default(),
    }))
}

/// Applies the global flags on top of a manifest.
fn apply_globals(cli: &Cli, mut m: ExperimentManifest) -> ExperimentManifest {
    if let Some(seed) = cli.seed {
        m.seed = seed;
    }
    if let Some(out) = &cli.out {
        m.output.path = Some(out.clone());
    }
    if let Some(f) = cli.format {
        m.output.format = f;
    }
    if cli.exact && m.command == Command::Closedness {
        m.params.insert("exact".into(), Value::Bool(true));
    }
    m
}

fn pool(workers: Option<usize>) -> Result<rayon::ThreadPool, CliError> {
    let mut b = rayon::ThreadPoolBuilder::new();
    if let Some(w) = workers {
        if w == 0 {
            return Err(CliError::Validation("--workers must be positive".into()));
        }
        b = b.num_threads(w);
    }
    b.build().map_err(|e| CliError::Internal(format!("thread pool: {e}")))
}

fn unix_ms() -> u128 {
    SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_millis()).unwrap_or(0)
}

fn emit(path: Option<&PathBuf>, bytes: &[u8], stdout: &mut dyn Write) -> Result<(), CliError> {
    match path {
        Some(p) => write_atomic(p, bytes),
        None => stdout.write_all(bytes).map_err(|e| CliError::Io(e.to_string())),
    }
}

/// Runs one manifest and writes its artifacts; returns the exit code.
pub fn execute(m: &ExperimentManifest, workers: Option<usize>, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<i32, CliError> {
    let started = unix_ms();
    let clock = Instant::now();
    let pool = pool(workers)?;
    let outcome = pool.install(|| dispatch(m))?;
    let doc = envelope(m, outcome.status.as_str(), &outcome.payload)?;
    let bytes = render(&doc, &outcome.table, m.output.format)?;
    emit(m.output.path.as_ref(), &bytes, stdout)?;
    let code = if outcome.status == Status::Failed { 2 } else { 0 };
    let meta = RunMeta {
        tool: output::TOOL_NAME,
        version: output::TOOL_VERSION,
        manifest_hash: manifest_hash(m)?,
        started_unix_ms: started,
        elapsed_ms: clock.elapsed().as_millis(),
        workers: pool.current_num_threads(),
        exit_code: code,
    };
    let meta_bytes = serde_json::to_vec(&meta).map_err(|e| CliError::Internal(e.to_string()))?;
    match &m.output.path {
        Some(p) => write_atomic(&meta_path(p), &meta_bytes)?,
        None => {
            let _ = writeln!(stderr, "{}", String::from_utf8_lossy(&meta_bytes));
        }
    }
    if code == 2 {
        let _ = writeln!(stderr, "verification failed: status {}", outcome.status.as_str());
    }
    Ok(code)
}

fn run_selftest(cli: &Cli, fault: Option<selftest::Fault>, stdout: &mut dyn Write) -> Result<i32, CliError> {
    let report = pool(cli.workers)?.install(|| selftest::selftest(cli.seed.unwrap_or(0), fault));
    let format = cli.format.unwrap_or_default();
    let mut table = Table::new(&["check", "cases", "passed"]);
    for c in &report.checks {
        table.push(vec![c.name.to_string(), c.cases.to_string(), c.passed.to_string()]);
    }
    let bytes = render(&canonical_value(&report)?, &table, format)?;
    emit(cli.out.as_ref(), &bytes, stdout)?;
    Ok(if report.all_pass { 0 } else { 2 })
}

/// Entry point shared by the binary and the tests.
pub fn run_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = write!(stderr, "{e}");
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = (|| -> Result<i32, CliError> {
        let path = match (&cli.manifest, &cli.command) {
            (Some(p), None) | (None, Some(Sub::Run { manifest: p })) => Some(p),
            (Some(_), Some(_)) => return Err(CliError::Validation("--manifest cannot be combined with a subcommand".into())),
            (None, None) => return Err(CliError::Validation("a subcommand or --manifest is required".into())),
            _ => None,
        };
        if let Some(Sub::Selftest { inject_fault }) = &cli.command {
            return run_selftest(&cli, *inject_fault, stdout);
        }
        let m = match path {
            Some(p) => ExperimentManifest::load(p)?,
            None => manifest_from_flags(&cli)?.expect("experiment subcommand"),
        };
        execute(&apply_globals(&cli, m), cli.workers, stdout, stderr)
    })();
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

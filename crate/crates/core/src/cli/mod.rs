//! Command-line front end: argument and config-file parsing, dispatch, and
//! exit-code discipline (0 success, 1 failed check, 2 usage, 3 I/O).

mod run;

use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use crate::error::Error;
use crate::linop::TOL_KER;
use crate::sim::TOL_BLOCK;

pub use run::{run_command, Outcome};

pub const DEFAULT_STEPS: usize = 100;
pub const DEFAULT_INIT: &str = "arc:0";

#[derive(Debug, Parser)]
#[command(name = "szwalk", version, about = "Abstract Szegedy quantum walks: spectra, generators, dynamics")]
pub struct Cli {
    #[command(subcommand)]
    pub command: CommandArgs,
}

#[derive(Debug, Subcommand)]
pub enum CommandArgs {
    /// Run every invariant check on one walk and emit it as JSON.
    Validate(RunArgs),
    /// Predicted spectrum of U as CSV (angle, re, im, multiplicity, provenance).
    Spectrum(RunArgs),
    /// The generator H as JSON, with its block dimensions and spectra.
    Generator(RunArgs),
    /// Finding probabilities nu_n as CSV rows (n, label, probability).
    Simulate(RunArgs),
    /// Limit distribution and localization flags as JSON.
    Localize(RunArgs),
    /// The digraph induced by the evolution and a partition.
    InferGraph(RunArgs),
    /// Full invariant suite on seeded random instances.
    Fuzz(RunArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WeightMode {
    Grover,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON file with default values for any of the flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Graph JSON file.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Built-in fixture: single-edge, cycle:N, complete:N, path-loops:N, star:N, random:H,K,SEED.
    #[arg(long)]
    pub fixture: Option<String>,
    /// Random abstract instance "H,K,SEED".
    #[arg(long)]
    pub random: Option<String>,
    /// JSON file {"matrix": ..., "blocks": [...]} (infer-graph only).
    #[arg(long)]
    pub unitary: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub weight: Option<WeightMode>,
    /// Comma-separated 1-form values, one per edge.
    #[arg(long, allow_hyphen_values = true)]
    pub one_form: Option<String>,
    #[arg(long)]
    pub steps: Option<usize>,
    /// arc:<i>, vertex-uniform:<label>, random:<seed>, or a JSON array of [re, im].
    #[arg(long)]
    pub init: Option<String>,
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    #[arg(long)]
    pub tol_ker: Option<f64>,
    #[arg(long)]
    pub tol_block: Option<f64>,
    /// Observation window "N0,N1" for localize.
    #[arg(long)]
    pub window: Option<String>,
    /// Seed range "a..b" (half-open) or "a..=b" for fuzz.
    #[arg(long)]
    pub seeds: Option<String>,
    /// Also run the verification suite for spectrum or generator.
    #[arg(long)]
    pub verify: bool,
    /// Append Cesàro rows (tagged n = -2) to simulate output.
    #[arg(long)]
    pub cesaro: bool,
    /// Append limit-distribution rows (tagged n = -1) to simulate output.
    #[arg(long)]
    pub limit: bool,
    /// Omit C, U and T from emitted walk JSON.
    #[arg(long)]
    pub no_derived: bool,
}

/// Values accepted in a `--config` file.
#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "kebab-case")]
struct FileConfig {
    graph: Option<PathBuf>,
    fixture: Option<String>,
    random: Option<String>,
    unitary: Option<PathBuf>,
    weight: Option<WeightMode>,
    one_form: Option<Vec<f64>>,
    steps: Option<usize>,
    init: Option<String>,
    output: Option<PathBuf>,
    format: Option<Format>,
    tol_ker: Option<f64>,
    tol_block: Option<f64>,
    window: Option<[usize; 2]>,
    seeds: Option<String>,
    verify: Option<bool>,
    cesaro: Option<bool>,
    limit: Option<bool>,
    no_derived: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Validate,
    Spectrum,
    Generator,
    Simulate,
    Localize,
    InferGraph,
    Fuzz,
}

#[derive(Debug, Clone, PartialEq)]
pub enum InputSource {
    Graph(PathBuf),
    Fixture(String),
    Random { dim_h: usize, dim_k: usize, seed: u64 },
    Unitary(PathBuf),
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub command: Command,
    /// `None` only for `fuzz`.
    pub input: Option<InputSource>,
    pub weight: WeightMode,
    pub one_form: Option<Vec<f64>>,
    pub steps: usize,
    pub init: String,
    pub output: Option<PathBuf>,
    pub format: Option<Format>,
    pub tol_ker: f64,
    pub tol_block: f64,
    pub window: Option<(usize, usize)>,
    pub seeds: (u64, u64),
    pub verify: bool,
    pub cesaro: bool,
    pub limit: bool,
    pub no_derived: bool,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("I/O: {0}")]
    Io(String),
    #[error(transparent)]
    Compute(#[from] Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Io(_) => 3,
            CliError::Compute(Error::Io(_)) => 3,
            CliError::Compute(Error::Consistency(_)) => 1,
            CliError::Compute(_) => 2,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn parse_random(spec: &str) -> Result<InputSource, CliError> {
    let parts: Vec<&str> = spec.split(',').map(str::trim).collect();
    let bad = || usage(format!("--random expects H,K,SEED, got {spec:?}"));
    let [h, k, s] = parts[..] else { return Err(bad()) };
    Ok(InputSource::Random {
        dim_h: h.parse().map_err(|_| bad())?,
        dim_k: k.parse().map_err(|_| bad())?,
        seed: s.parse().map_err(|_| bad())?,
    })
}

fn parse_seeds(spec: &str) -> Result<(u64, u64), CliError> {
    let bad = || usage(format!("--seeds expects a..b or a..=b, got {spec:?}"));
    let (a, b, inclusive) = match spec.split_once("..=") {
        Some((a, b)) => (a, b, true),
        None => {
            let (a, b) = spec.split_once("..").ok_or_else(bad)?;
            (a, b, false)
        }
    };
    let a: u64 = a.trim().parse().map_err(|_| bad())?;
    let b: u64 = b.trim().parse().map_err(|_| bad())?;
    let end = if inclusive { b.checked_add(1).ok_or_else(bad)? } else { b };
    if end <= a {
        return Err(usage(format!("empty seed range {spec:?}")));
    }
    Ok((a, end))
}

fn parse_window(spec: &str) -> Result<(usize, usize), CliError> {
    let bad = || usage(format!("--window expects N0,N1 with N0 <= N1, got {spec:?}"));
    let (a, b) = spec.split_once(',').ok_or_else(bad)?;
    let w = (a.trim().parse().map_err(|_| bad())?, b.trim().parse().map_err(|_| bad())?);
    if w.0 > w.1 {
        return Err(bad());
    }
    Ok(w)
}

fn parse_one_form(spec: &str) -> Result<Vec<f64>, CliError> {
    spec.split(',')
        .map(|x| x.trim().parse().map_err(|_| usage(format!("bad 1-form value {x:?}"))))
        .collect()
}

/// Parses `argv` (including the program name), layering flags over an
/// optional `--config` file.
pub fn parse_config<I, T>(argv: I) -> Result<RunConfig, CliError>
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = Cli::try_parse_from(argv).map_err(|e| usage(e.to_string()))?;
    let (command, args) = match cli.command {
        CommandArgs::Validate(a) => (Command::Validate, a),
        CommandArgs::Spectrum(a) => (Command::Spectrum, a),
        CommandArgs::Generator(a) => (Command::Generator, a),
        CommandArgs::Simulate(a) => (Command::Simulate, a),
        CommandArgs::Localize(a) => (Command::Localize, a),
        CommandArgs::InferGraph(a) => (Command::InferGraph, a),
        CommandArgs::Fuzz(a) => (Command::Fuzz, a),
    };
    let file = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<FileConfig>(&text)
                .map_err(|e| usage(format!("config {}: {e}", path.display())))?
        }
        None => FileConfig::default(),
    };
    resolve(command, args, file)
}

fn resolve(command: Command, args: RunArgs, file: FileConfig) -> Result<RunConfig, CliError> {
    // flags win over file values, source by source
    let graph = args.graph.or(file.graph);
    let fixture = args.fixture.or(file.fixture);
    let random = args.random.or(file.random);
    let unitary = args.unitary.or(file.unitary);
    let mut sources = Vec::new();
    if let Some(p) = graph {
        sources.push(InputSource::Graph(p));
    }
    if let Some(f) = fixture {
        sources.push(InputSource::Fixture(f));
    }
    if let Some(r) = random {
        sources.push(parse_random(&r)?);
    }
    if let Some(p) = unitary {
        sources.push(InputSource::Unitary(p));
    }
    if sources.len() > 1 {
        return Err(usage("give exactly one of --graph, --fixture, --random, --unitary"));
    }
    let input = sources.pop();
    match (&input, command) {
        (None, Command::Fuzz) => {}
        (Some(_), Command::Fuzz) => return Err(usage("fuzz takes --seeds, not an input source")),
        (None, _) => return Err(usage("an input source is required")),
        (Some(InputSource::Unitary(_)), c) if c != Command::InferGraph => {
            return Err(usage("--unitary is only accepted by infer-graph"))
        }
        _ => {}
    }
    let one_form = match args.one_form {
        Some(s) => Some(parse_one_form(&s)?),
        None => file.one_form,
    };
    let window = match args.window {
        Some(s) => Some(parse_window(&s)?),
        None => match file.window {
            Some([a, b]) if a > b => return Err(usage("window start exceeds its end")),
            Some([a, b]) => Some((a, b)),
            None => None,
        },
    };
    let seeds = match args.seeds.or(file.seeds) {
        Some(s) => parse_seeds(&s)?,
        None => (1, 11),
    };
    let tol_ker = args.tol_ker.or(file.tol_ker).unwrap_or(TOL_KER);
    let tol_block = args.tol_block.or(file.tol_block).unwrap_or(TOL_BLOCK);
    for (name, t) in [("tol-ker", tol_ker), ("tol-block", tol_block)] {
        if !(t > 0.0 && t.is_finite()) {
            return Err(usage(format!("--{name} must be positive, got {t}")));
        }
    }
    Ok(RunConfig {
        command,
        input,
        weight: args.weight.or(file.weight).unwrap_or(WeightMode::Grover),
        one_form,
        steps: args.steps.or(file.steps).unwrap_or(DEFAULT_STEPS),
        init: args.init.or(file.init).unwrap_or_else(|| DEFAULT_INIT.to_string()),
        output: args.output.or(file.output),
        format: args.format.or(file.format),
        tol_ker,
        tol_block,
        window,
        seeds,
        verify: args.verify || file.verify.unwrap_or(false),
        cesaro: args.cesaro || file.cesaro.unwrap_or(false),
        limit: args.limit || file.limit.unwrap_or(false),
        no_derived: args.no_derived || file.no_derived.unwrap_or(false),
    })
}

/// Parses, runs and writes output; returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let argv: Vec<T> = argv.into_iter().collect();
    if let Err(e) = Cli::try_parse_from(argv.clone()) {
        if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
            print!("{e}");
            return 0;
        }
    }
    let result = parse_config(argv).and_then(|cfg| {
        let outcome = run_command(&cfg)?;
        match &cfg.output {
            Some(path) => fs::write(path, &outcome.body)
                .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?,
            None => print!("{}", outcome.body),
        }
        if !outcome.summary.is_empty() {
            eprintln!("{}", outcome.summary);
        }
        Ok(outcome.passed)
    });
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("szwalk: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests;

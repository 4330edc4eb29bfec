//! Command execution. Every command returns its emitted document as a
//! string so that output bytes depend only on the configuration.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{CliError, Command, Format, InputSource, RunConfig, WeightMode};
use crate::analysis::Analysis;
use crate::error::Error;
use crate::fixtures::fixture_graph;
use crate::graph::{grover_weight, parse_graph_json, validate_structures, Graph, OneForm, Weight};
use crate::linop::{unitarity_defect, Operator, OperatorJson};
use crate::report::ValidationReport;
use crate::sim::{
    block_unitarity_check, evolve_and_measure, infer_graph, limit_distribution,
    localization_report, Block, InitialState, Partition,
};
use crate::szegedy::{random_instance, WalkInstance};

/// Emitted document plus the pass/fail verdict for the exit code.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub body: String,
    /// Human-readable note for stderr; may be empty.
    pub summary: String,
    pub passed: bool,
}

impl Outcome {
    fn ok(body: String) -> Self {
        Outcome { body, summary: String::new(), passed: true }
    }

    fn with_report(body: String, report: &ValidationReport) -> Self {
        Outcome { body, summary: report.to_string(), passed: report.passed }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct UnitaryFile {
    matrix: OperatorJson,
    blocks: Vec<BlockJson>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct BlockJson {
    label: String,
    indices: Vec<usize>,
}

fn read_text(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

fn json_text<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("serializable value");
    s.push('\n');
    s
}

fn twisted(g: &Graph, w: &Weight, theta: &OneForm) -> Result<WalkInstance, CliError> {
    let report = validate_structures(g, Some(w), Some(theta));
    if !report.passed {
        return Err(CliError::Usage(format!("invalid walk data: {report}")));
    }
    Ok(WalkInstance::twisted_szegedy(g, w, theta)?)
}

fn one_form_for(g: &Graph, cfg: &RunConfig, from_file: Option<OneForm>) -> Result<OneForm, CliError> {
    match &cfg.one_form {
        Some(values) => Ok(OneForm::from_edge_values(g, values)?),
        None => Ok(from_file.unwrap_or_else(|| OneForm::zero(g))),
    }
}

/// Builds the walk selected by the input source and walk parameters.
pub(crate) fn load_instance(cfg: &RunConfig) -> Result<WalkInstance, CliError> {
    match cfg.input.as_ref().expect("non-fuzz commands carry an input") {
        InputSource::Graph(path) => {
            let data = parse_graph_json(&read_text(path)?).map_err(|e| match e {
                Error::Json(e) => CliError::Usage(format!("{}: {e}", path.display())),
                other => CliError::Compute(other),
            })?;
            let g = &data.graph;
            let w = match (cfg.weight, data.weight) {
                (WeightMode::Grover, _) => grover_weight(g),
                (WeightMode::Explicit, Some(w)) => w,
                (WeightMode::Explicit, None) => {
                    return Err(CliError::Usage("--weight explicit needs weights in the graph file".into()))
                }
            };
            let theta = one_form_for(g, cfg, data.one_form)?;
            twisted(g, &w, &theta)
        }
        InputSource::Fixture(name) => {
            if cfg.weight == WeightMode::Explicit {
                return Err(CliError::Usage("built-in fixtures carry no explicit weights".into()));
            }
            if let Some(spec) = name.strip_prefix("random:") {
                if cfg.one_form.is_some() {
                    return Err(CliError::Usage("random instances take no 1-form".into()));
                }
                return crate::fixtures::fixture(&format!("random:{spec}")).map_err(usage_from);
            }
            let g = fixture_graph(name).map_err(usage_from)?;
            let theta = one_form_for(&g, cfg, None)?;
            twisted(&g, &grover_weight(&g), &theta)
        }
        InputSource::Random { dim_h, dim_k, seed } => {
            if cfg.one_form.is_some() || cfg.weight == WeightMode::Explicit {
                return Err(CliError::Usage("random instances take no weight or 1-form".into()));
            }
            random_instance(*dim_h, *dim_k, *seed).map_err(usage_from)
        }
        InputSource::Unitary(_) => Err(CliError::Usage("--unitary is only accepted by infer-graph".into())),
    }
}

/// Bad names and impossible dimensions are input mistakes.
fn usage_from(e: Error) -> CliError {
    match e {
        Error::Domain(m) | Error::Dimension(m) | Error::Structural(m) => CliError::Usage(m),
        other => CliError::Compute(other),
    }
}

fn analyse(cfg: &RunConfig, inst: WalkInstance) -> Result<Analysis, CliError> {
    Ok(Analysis::with_tol(inst, cfg.tol_ker)?)
}

fn initial_state(cfg: &RunConfig, part: &Partition) -> Result<crate::linop::State, CliError> {
    InitialState::parse(&cfg.init)
        .and_then(|s| s.build(part))
        .map_err(usage_from)
}

pub fn run_command(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Validate => validate(cfg),
        Command::Spectrum => spectrum(cfg),
        Command::Generator => generator(cfg),
        Command::Simulate => simulate(cfg),
        Command::Localize => localize(cfg),
        Command::InferGraph => infer(cfg),
        Command::Fuzz => fuzz(cfg),
    }
}

fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let inst = load_instance(cfg)?;
    let analysis = analyse(cfg, inst)?;
    let report = analysis.full_report();
    let doc = json!({
        "dim_h": analysis.inst.dim_h(),
        "dim_k": analysis.inst.dim_k(),
        "report": &report,
        "walk": analysis.inst.to_json(!cfg.no_derived),
    });
    Ok(Outcome::with_report(json_text(&doc), &report))
}

fn spectrum(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let analysis = analyse(cfg, load_instance(cfg)?)?;
    let pred = &analysis.prediction;
    let body = match cfg.format.unwrap_or(Format::Csv) {
        Format::Csv => pred.to_csv(),
        Format::Json => json_text(pred),
    };
    if cfg.verify {
        let mut report = pred.check_invariants();
        report.merge(analysis.atlas.check_invariants(&analysis.inst));
        report.merge(crate::spectral_map::verify_spectral_mapping(&analysis.inst, pred));
        return Ok(Outcome::with_report(body, &report));
    }
    Ok(Outcome::ok(body))
}

fn generator(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Usage("generator emits JSON only".into()));
    }
    let analysis = analyse(cfg, load_instance(cfg)?)?;
    let gen = &analysis.gen;
    let [d1p, d1m, kp, km] = gen.block_dims();
    let mut doc = json!({
        "dim_h": analysis.inst.dim_h(),
        "h": OperatorJson::from(&gen.h),
        "block_dims": { "D1_plus": d1p, "D1_minus": d1m, "ker(U-1)": kp, "ker(U+1)": km },
        "spectra": {
            "D1_plus": &gen.spectrum_plus,
            "D1_minus": &gen.spectrum_minus,
            "ker(U-1)": vec![0.0; kp],
            "ker(U+1)": vec![std::f64::consts::PI; km],
        },
    });
    if cfg.verify {
        let mut report = crate::generator::verify_generator(&analysis.inst, gen);
        report.merge(analysis.dpm.check_invariants());
        report.merge(crate::generator::verify_identities(&analysis.inst, &analysis.dpm, &analysis.atlas));
        report.merge(crate::generator::verify_eigenspace_classes(&analysis.inst, &analysis.dpm, gen));
        doc["report"] = serde_json::to_value(&report).expect("serializable report");
        return Ok(Outcome::with_report(json_text(&doc), &report));
    }
    Ok(Outcome::ok(json_text(&doc)))
}

fn csv_rows(out: &mut String, n: i64, labels: &[String], values: &[f64]) {
    for (label, p) in labels.iter().zip(values) {
        writeln!(out, "{n},{label},{p:.16e}").expect("write to String");
    }
}

fn simulate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.format == Some(Format::Json) {
        return Err(CliError::Usage("simulate emits CSV only".into()));
    }
    let inst = load_instance(cfg)?;
    let part = inst
        .partition()
        .cloned()
        .unwrap_or_else(|| Partition::singletons(inst.dim_h()));
    let psi0 = initial_state(cfg, &part)?;
    let trace = evolve_and_measure(inst.u(), &part, &psi0, cfg.steps).map_err(usage_from)?;
    let mut body = String::from("n,label,probability\n");
    for (n, dist) in trace.distributions.iter().enumerate() {
        csv_rows(&mut body, n as i64, &trace.labels, dist);
    }
    if cfg.cesaro {
        if cfg.steps == 0 {
            return Err(CliError::Usage("--cesaro needs --steps >= 1".into()));
        }
        csv_rows(&mut body, -2, &trace.labels, &trace.cesaro(cfg.steps)?);
    }
    if cfg.limit {
        let analysis = analyse(cfg, inst)?;
        let limit = limit_distribution(&analysis.gen, &part, &psi0)?;
        csv_rows(&mut body, -1, &trace.labels, &limit);
    }
    let report = trace.check_invariants();
    Ok(Outcome { body, summary: String::new(), passed: report.passed })
}

fn localize(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Usage("localize emits JSON only".into()));
    }
    let analysis = analyse(cfg, load_instance(cfg)?)?;
    let part = analysis.partition();
    let psi0 = initial_state(cfg, &part)?;
    let window = cfg.window.unwrap_or((0, 10 * analysis.inst.dim_h()));
    let report = localization_report(&analysis.inst, &analysis.atlas, &analysis.gen, &part, &psi0, window)
        .map_err(usage_from)?;
    Ok(Outcome::ok(json_text(&report)))
}

/// Unitarity required of an operator handed to `infer-graph`.
const INPUT_UNITARITY_TOL: f64 = 1e-9;

fn infer(cfg: &RunConfig) -> Result<Outcome, CliError> {
    if cfg.format == Some(Format::Csv) {
        return Err(CliError::Usage("infer-graph emits JSON only".into()));
    }
    let (w, part) = match cfg.input.as_ref().expect("infer-graph carries an input") {
        InputSource::Unitary(path) => {
            let file: UnitaryFile = serde_json::from_str(&read_text(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let w = Operator::try_from(&file.matrix).map_err(usage_from)?;
            if !w.is_square() {
                return Err(CliError::Usage("unitary matrix must be square".into()));
            }
            let blocks = file
                .blocks
                .into_iter()
                .map(|b| Block { label: b.label, indices: b.indices })
                .collect();
            let part = Partition::new(w.nrows(), blocks).map_err(usage_from)?;
            (w, part)
        }
        _ => {
            let inst = load_instance(cfg)?;
            let part = inst
                .partition()
                .cloned()
                .unwrap_or_else(|| Partition::singletons(inst.dim_h()));
            (inst.u().clone(), part)
        }
    };
    let defect = unitarity_defect(&w);
    if defect > INPUT_UNITARITY_TOL {
        return Err(CliError::Usage(format!("operator is not unitary (defect {defect:.3e})")));
    }
    let graph = infer_graph(&w, &part, cfg.tol_block);
    let report = block_unitarity_check(&w, &part);
    let arcs: Vec<[&str; 2]> = graph
        .arcs
        .iter()
        .map(|&(a, b)| [graph.labels[a].as_str(), graph.labels[b].as_str()])
        .collect();
    let doc = json!({
        "labels": &graph.labels,
        "arcs": arcs,
        "symmetric": graph.is_symmetric(),
        "block_unitarity": &report,
    });
    Ok(Outcome::with_report(json_text(&doc), &report))
}

fn fuzz(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (start, end) = cfg.seeds;
    let mut body = format!("{:>8} {:>5} {:>5} {:>7} {:>10}  status\n", "seed", "dim_h", "dim_k", "checks", "violations");
    let mut failures = 0usize;
    for seed in start..end {
        let (h, k) = crate::fixtures::random_dims(seed);
        let outcome = random_instance(h, k, seed).and_then(|inst| Analysis::with_tol(inst, cfg.tol_ker));
        let (checks, violations, status) = match outcome {
            Ok(a) => {
                let r = a.full_report();
                let status = if r.passed { "ok" } else { "FAIL" };
                (r.checks, r.violations.len(), status.to_string())
            }
            Err(e) => (0, 1, format!("ERROR {e}")),
        };
        if status != "ok" {
            failures += 1;
        }
        writeln!(body, "{seed:>8} {h:>5} {k:>5} {checks:>7} {violations:>10}  {status}").expect("write to String");
    }
    let total = end - start;
    writeln!(body, "{} of {total} instances passed", total as usize - failures).expect("write to String");
    Ok(Outcome { body, summary: String::new(), passed: failures == 0 })
}

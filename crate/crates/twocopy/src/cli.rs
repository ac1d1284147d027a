//! Command dispatch. Every command builds one JSON document; the text and CSV
//! outputs are renderings of that document.

use std::path::PathBuf;

use clap::{Parser, ValueEnum};
use rayon::prelude::*;
use serde_json::{json, Map, Value};
use thiserror::Error;
use twocopy_core::circuit::{assemble_unitary, build_interaction_circuit, interaction_unitary, CircuitError};
use twocopy_core::protocol::{
    detect_pure_local_with, detect_with, diagonals_from_postselection, exact_weak_value, reconstruct,
    weak_values_all, DetectOptions, ProtocolError, WeakHamiltonian,
};
use twocopy_core::robustness::{bound_check, sweep_rows, RobustnessError};
use twocopy_core::states::StateSampler;
use twocopy_core::tolerances::{TAU_DET, TAU_WV};
use twocopy_core::{ComplexScalar, TwoQubitState, Verdict};

use crate::io::{self, pair, DetectionJson, IoError, StateFile};
use crate::pointer::{estimate_weak_values, PointerError, PointerGrid, SimConfig};

/// Largest acceptable tomography trace distance.
pub const TOMO_TOL: f64 = 1e-8;
/// Largest acceptable circuit/unitary deviation.
pub const CIRCUIT_TOL: f64 = 1e-12;
/// Pointer estimates may be off by at most this multiple of ε.
pub const POINTER_ERROR_FACTOR: f64 = 5.0;

const CIRCUIT_GRID: [f64; 6] = [1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0];

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    Validate,
    Detect,
    DetectPure,
    Tomo,
    PointerSim,
    CircuitVerify,
    Robustness,
    Benchmark,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum OutputFormat {
    #[default]
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Parser)]
#[command(name = "twocopy", version, about = "Two-copy weak-value entanglement detection for two-qubit states")]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// State file ({"matrix": ...}) or, for detect-pure, amplitude file.
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-3)]
    pub epsilon: f64,
    #[arg(long, default_value_t = 1.0)]
    pub sigma: f64,
    #[arg(long, default_value_t = 4096)]
    pub grid_n: usize,
    #[arg(long, default_value_t = 40.0)]
    pub grid_l: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, default_value_t = 1e-2)]
    pub delta: f64,
    /// Override the determinant threshold used for the verdict.
    #[arg(long)]
    pub tol_det: Option<f64>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
}

impl RunConfig {
    pub fn new(command: Command) -> Self {
        Self {
            command,
            input: None,
            epsilon: 1e-3,
            sigma: 1.0,
            grid_n: 4096,
            grid_l: 40.0,
            seed: 0,
            trials: 1000,
            delta: 1e-2,
            tol_det: None,
            format: OutputFormat::Json,
        }
    }

    fn detect_options(&self) -> DetectOptions {
        DetectOptions {
            tau_det: self.tol_det.unwrap_or(TAU_DET),
            ..DetectOptions::default()
        }
    }

    fn sim_config(&self) -> Result<SimConfig, PointerError> {
        SimConfig::new(self.epsilon, self.sigma, PointerGrid::new(self.grid_n, self.grid_l)?)
    }
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("--input is required for this command")]
    MissingInput,
    #[error("invalid parameter: {0}")]
    Parameter(String),
    #[error(transparent)]
    Io(#[from] IoError),
    #[error("{0}")]
    Internal(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::MissingInput | CliError::Parameter(_) => 1,
            CliError::Io(e) => e.exit_code(),
            CliError::Internal(_) => 3,
        }
    }
}

impl From<PointerError> for CliError {
    fn from(e: PointerError) -> Self {
        match e {
            PointerError::NoSignal { .. } | PointerError::Protocol(_) | PointerError::Matrix(_) => {
                CliError::Internal(e.to_string())
            }
            _ => CliError::Parameter(e.to_string()),
        }
    }
}

impl From<RobustnessError> for CliError {
    fn from(e: RobustnessError) -> Self {
        match e {
            RobustnessError::BadDelta(_) => CliError::Parameter(e.to_string()),
            RobustnessError::RankDeficient { .. } => CliError::Io(IoError::Shape(e.to_string())),
            _ => CliError::Internal(e.to_string()),
        }
    }
}

impl From<ProtocolError> for CliError {
    fn from(e: ProtocolError) -> Self {
        CliError::Internal(e.to_string())
    }
}

impl From<CircuitError> for CliError {
    fn from(e: CircuitError) -> Self {
        CliError::Internal(e.to_string())
    }
}

/// A finished command: its report and the exit code (0, or 3 when a check
/// against an oracle failed, or 2 for an invalid state under `validate`).
#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub code: i32,
    pub document: Value,
}

impl Outcome {
    fn checked(document: Value, ok: bool) -> Self {
        Self {
            code: if ok { 0 } else { 3 },
            document,
        }
    }
}

pub fn run(cfg: &RunConfig) -> Result<Outcome, CliError> {
    match cfg.command {
        Command::Validate => validate(cfg),
        Command::Detect => detect(cfg),
        Command::DetectPure => detect_pure(cfg),
        Command::Tomo => tomo(cfg),
        Command::PointerSim => pointer_sim(cfg),
        Command::CircuitVerify => circuit_verify(cfg),
        Command::Robustness => robustness(cfg),
        Command::Benchmark => benchmark(cfg),
    }
}

fn input(cfg: &RunConfig) -> Result<&std::path::Path, CliError> {
    cfg.input.as_deref().ok_or(CliError::MissingInput)
}

fn load_state(cfg: &RunConfig) -> Result<TwoQubitState, CliError> {
    Ok(io::load_state(input(cfg)?)?)
}

/// State from --input, otherwise a random mixed state drawn from --seed.
fn state_or_random(cfg: &RunConfig) -> Result<(TwoQubitState, &'static str), CliError> {
    match cfg.input {
        Some(_) => Ok((load_state(cfg)?, "file")),
        None => Ok((StateSampler::new(cfg.seed).mixed(), "random")),
    }
}

fn validate(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let m = io::load_state_matrix(input(cfg)?)?;
    let hermitian_deviation = m.hermitian_deviation();
    let trace = m.trace();
    match TwoQubitState::validate(&m) {
        Ok(rho) => {
            let min_eigenvalue = rho.matrix().hermitian_eigen().map(|e| e.min_value()).ok();
            Ok(Outcome {
                code: 0,
                document: json!({
                    "command": "validate",
                    "valid": true,
                    "trace": pair(trace),
                    "hermitian_deviation": hermitian_deviation,
                    "min_eigenvalue": min_eigenvalue,
                }),
            })
        }
        Err(e) => Ok(Outcome {
            code: 2,
            document: json!({
                "command": "validate",
                "valid": false,
                "error": e.to_string(),
                "trace": pair(trace),
                "hermitian_deviation": hermitian_deviation,
            }),
        }),
    }
}

fn detect(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rho = load_state(cfg)?;
    let report = detect_with(&rho, &cfg.detect_options());
    let oracle = rho.ppt_oracle();
    let mut doc = serde_json::to_value(DetectionJson::from(&report)).expect("plain data");
    doc["oracle_verdict"] = json!(oracle.as_str());
    doc["negativity"] = json!(rho.negativity());
    Ok(Outcome::checked(doc, report.verdict == oracle))
}

fn detect_pure(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let psi = io::load_amplitudes(input(cfg)?)?;
    let report = detect_pure_local_with(&psi, &cfg.detect_options());
    let overlap = psi.concurrence_amplitude().norm();
    let oracle = if overlap > TAU_WV {
        Verdict::Entangled
    } else {
        Verdict::Separable
    };
    let mut doc = serde_json::to_value(DetectionJson::from(&report)).expect("plain data");
    doc["oracle_verdict"] = json!(oracle.as_str());
    doc["abs_ad_minus_bc"] = json!(overlap);
    Ok(Outcome::checked(doc, report.verdict == oracle))
}

fn tomo(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let rho = load_state(cfg)?;
    let wv = weak_values_all(&rho);
    let diagonals = diagonals_from_postselection(&rho);
    let rec = reconstruct(&wv, diagonals)?;
    let distance = rho.trace_distance(&rec);
    let doc = json!({
        "command": "tomo",
        "trace_distance": distance,
        "diagonals": diagonals,
        "weak_values": io::weak_values_json(&wv),
        "reconstructed": StateFile::from_matrix(rec.matrix()).matrix,
    });
    Ok(Outcome::checked(doc, distance <= TOMO_TOL))
}

fn pointer_sim(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let sim = cfg.sim_config()?;
    let half = sim.with_epsilon(sim.epsilon() / 2.0)?;
    let (rho, source) = state_or_random(cfg)?;
    let h = WeakHamiltonian::general();
    let full = estimate_weak_values(&rho, &sim)?;
    let halved = estimate_weak_values(&rho, &half)?;

    let mut rows = Vec::new();
    let (mut max_err, mut max_err_half) = (0.0f64, 0.0f64);
    for (a, b) in full.iter().zip(&halved) {
        let exact: ComplexScalar = exact_weak_value(&rho, &h, a.k)?;
        let err = (a.estimate - exact).norm();
        let err_half = (b.estimate - exact).norm();
        max_err = max_err.max(err);
        max_err_half = max_err_half.max(err_half);
        rows.push(json!({
            "k": a.k.k(),
            "probability": a.postselect_prob,
            "exact_re": exact.re,
            "exact_im": exact.im,
            "estimate_re": a.estimate.re,
            "estimate_im": a.estimate.im,
            "error": err,
            "error_half": err_half,
        }));
    }
    let doc = json!({
        "command": "pointer-sim",
        "state_source": source,
        "epsilon": sim.epsilon(),
        "sigma": sim.sigma(),
        "grid_n": sim.grid().n(),
        "grid_l": sim.grid().half_extent(),
        "max_error": max_err,
        "max_error_half": max_err_half,
        "convergence_ratio": max_err / max_err_half,
        "table": rows,
    });
    Ok(Outcome::checked(doc, max_err <= POINTER_ERROR_FACTOR * sim.epsilon()))
}

fn circuit_verify(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut grid = CIRCUIT_GRID.to_vec();
    if !grid.contains(&cfg.epsilon) {
        grid.push(cfg.epsilon);
    }
    let h = WeakHamiltonian::general();
    let mut rows = Vec::new();
    let mut max_dev = 0.0f64;
    for &eps in &grid {
        let u = interaction_unitary(eps);
        let circuit = assemble_unitary(&build_interaction_circuit(eps))?;
        let expm = h
            .matrix()
            .expm_hermitian(ComplexScalar::new(0.0, -eps))
            .map_err(|e| CliError::Internal(e.to_string()))?;
        let dev = circuit.max_abs_diff(&u);
        let expm_dev = expm.max_abs_diff(&u);
        max_dev = max_dev.max(dev).max(expm_dev);
        rows.push(json!({"epsilon": eps, "circuit_deviation": dev, "expm_deviation": expm_dev}));
    }
    let gates: Vec<String> = build_interaction_circuit(cfg.epsilon)
        .to_text()
        .lines()
        .map(str::to_owned)
        .collect();
    let doc = json!({
        "command": "circuit-verify",
        "max_deviation": max_dev,
        "gates": gates,
        "table": rows,
    });
    Ok(Outcome::checked(doc, max_dev <= CIRCUIT_TOL))
}

fn robustness(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let (rho, source) = state_or_random(cfg)?;
    let report = bound_check(&rho, cfg.delta, cfg.trials, cfg.seed)?;
    let rows: Vec<Value> = sweep_rows(&report)
        .into_iter()
        .map(|(k, dev)| json!({"delta": report.delta, "k": k, "deviation": dev, "bound": report.bound}))
        .collect();
    let doc = json!({
        "command": "robustness",
        "state_source": source,
        "delta": report.delta,
        "trials": report.trials,
        "m": report.m,
        "bound": report.bound,
        "margin": report.margin,
        "violations": report.violations,
        "checked": report.checked,
        "table": rows,
    });
    Ok(Outcome::checked(doc, report.holds()))
}

struct BenchmarkTrial {
    detected: Verdict,
    oracle: Verdict,
    distance: Option<f64>,
}

fn benchmark(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let mut sampler = StateSampler::new(cfg.seed);
    let states: Vec<TwoQubitState> = (0..cfg.trials).map(|_| sampler.mixed()).collect();
    let opts = cfg.detect_options();
    let trials: Vec<BenchmarkTrial> = states
        .par_iter()
        .map(|rho| {
            let detected = detect_with(rho, &opts).verdict;
            let distance = reconstruct(&weak_values_all(rho), diagonals_from_postselection(rho))
                .ok()
                .map(|rec| rho.trace_distance(&rec));
            BenchmarkTrial {
                detected,
                oracle: rho.ppt_oracle(),
                distance,
            }
        })
        .collect();

    let verdicts = [Verdict::Entangled, Verdict::Separable];
    let mut agreement = Map::new();
    for d in verdicts {
        let mut row = Map::new();
        for o in verdicts {
            let n = trials.iter().filter(|t| t.detected == d && t.oracle == o).count();
            row.insert(o.as_str().to_owned(), json!(n));
        }
        agreement.insert(d.as_str().to_owned(), Value::Object(row));
    }
    let mismatches = trials.iter().filter(|t| t.detected != t.oracle).count();
    let failures = trials.iter().filter(|t| t.distance.is_none()).count();
    let distances: Vec<f64> = trials.iter().filter_map(|t| t.distance).collect();
    let max_distance = distances.iter().copied().fold(0.0, f64::max);
    let mean_distance = if distances.is_empty() {
        0.0
    } else {
        distances.iter().sum::<f64>() / distances.len() as f64
    };
    let doc = json!({
        "command": "benchmark",
        "seed": cfg.seed,
        "trials": cfg.trials,
        "agreements": cfg.trials - mismatches,
        "mismatches": mismatches,
        "agreement_matrix": agreement,
        "reconstruction_failures": failures,
        "max_trace_distance": max_distance,
        "mean_trace_distance": mean_distance,
    });
    let ok = mismatches == 0 && failures == 0 && max_distance <= TOMO_TOL;
    Ok(Outcome::checked(doc, ok))
}

/// Renders a command document in the requested format.
pub fn render(doc: &Value, format: OutputFormat) -> String {
    match format {
        OutputFormat::Json => {
            let mut s = serde_json::to_string_pretty(doc).expect("plain data");
            s.push('\n');
            s
        }
        OutputFormat::Text => render_text(doc),
        OutputFormat::Csv => render_csv(doc),
    }
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let parts: Vec<String> = items.iter().map(scalar).collect();
            format!("[{}]", parts.join(", "))
        }
        other => other.to_string(),
    }
}

/// (dotted key, value) pairs for everything except the "table" entry.
fn flatten(prefix: &str, v: &Value, out: &mut Vec<(String, String)>) {
    match v {
        Value::Object(map) => {
            for (key, val) in map {
                if prefix.is_empty() && key == "table" {
                    continue;
                }
                let name = if prefix.is_empty() { key.clone() } else { format!("{prefix}.{key}") };
                flatten(&name, val, out);
            }
        }
        Value::Array(items) if items.iter().any(|i| i.is_object() || i.is_array()) => {
            for (i, val) in items.iter().enumerate() {
                flatten(&format!("{prefix}.{i}"), val, out);
            }
        }
        _ => out.push((prefix.to_owned(), scalar(v))),
    }
}

fn table(doc: &Value) -> Option<(Vec<String>, Vec<Vec<String>>)> {
    let rows = doc.get("table")?.as_array()?;
    let header: Vec<String> = rows.first()?.as_object()?.keys().cloned().collect();
    let body = rows
        .iter()
        .map(|r| header.iter().map(|h| r.get(h).map(scalar).unwrap_or_default()).collect())
        .collect();
    Some((header, body))
}

fn render_text(doc: &Value) -> String {
    let mut pairs = Vec::new();
    flatten("", doc, &mut pairs);
    let width = pairs.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in &pairs {
        out.push_str(&format!("{k:<width$}  {v}\n"));
    }
    if let Some((header, body)) = table(doc) {
        let widths: Vec<usize> = (0..header.len())
            .map(|c| body.iter().map(|r| r[c].len()).chain([header[c].len()]).max().unwrap_or(0))
            .collect();
        let line = |cells: &[String]| {
            let padded: Vec<String> = cells.iter().zip(&widths).map(|(c, w)| format!("{c:>w$}")).collect();
            padded.join("  ").trim_end().to_owned() + "\n"
        };
        out.push('\n');
        out.push_str(&line(&header));
        for r in &body {
            out.push_str(&line(r));
        }
    }
    out
}

/// The "table" entry if the document has one, otherwise key/value rows.
fn render_csv(doc: &Value) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    match table(doc) {
        Some((header, body)) => {
            w.write_record(&header).expect("in-memory write");
            for r in body {
                w.write_record(&r).expect("in-memory write");
            }
        }
        None => {
            let mut pairs = Vec::new();
            flatten("", doc, &mut pairs);
            w.write_record(["key", "value"]).expect("in-memory write");
            for (k, v) in pairs {
                w.write_record([k, v]).expect("in-memory write");
            }
        }
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("csv of utf-8 fields")
}

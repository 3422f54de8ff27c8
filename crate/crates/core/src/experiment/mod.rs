//! Config-driven experiment runner behind the `smp-lab` binary.
//!
//! A run writes four files to its output directory:
//!
//! * `results.csv`: per-input or per-trial rows, column order fixed per experiment;
//! * `summary.txt`: flat `key=value` lines, including `assert.*` and `margin.*`
//!   for every hard assertion (margin = bound minus observed, negative on failure);
//! * `config.toml`: the resolved config with every default filled in;
//! * `timing.txt`: wall time, kept apart so the other files are reproducible.
//!
//! Failures write `error.txt` (`status`, `kind`, `message`) instead.

mod runs;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::codes::CodeError;
use crate::oracle::OracleError;
use crate::protocols::FIXTURE_NAMES;
use crate::qcore::{QcoreError, Tolerances};
use crate::rng::derive_seed;
use crate::smp::SmpError;
use crate::transforms::TransformError;

/// Experiments beyond the protocol fixtures.
pub const EXTRA_EXPERIMENTS: [&str; 4] = ["compile", "learn-state", "derandomize", "oracle-suite"];

pub fn experiment_names() -> Vec<&'static str> {
    FIXTURE_NAMES.iter().chain(EXTRA_EXPERIMENTS.iter()).copied().collect()
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExperimentError {
    #[error("config error: {0}")]
    Config(String),
    #[error("cap exceeded: {0}")]
    Cap(String),
    #[error("{0}")]
    Module(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl ExperimentError {
    pub fn exit_code(&self) -> u8 {
        match self {
            ExperimentError::Config(_) => 2,
            ExperimentError::Cap(_) => 4,
            ExperimentError::Module(_) | ExperimentError::Io(_) => 1,
        }
    }

    pub fn kind(&self) -> &'static str {
        match self {
            ExperimentError::Config(_) => "config",
            ExperimentError::Cap(_) => "cap",
            ExperimentError::Module(_) => "module",
            ExperimentError::Io(_) => "io",
        }
    }
}

impl From<QcoreError> for ExperimentError {
    fn from(e: QcoreError) -> Self {
        match e {
            QcoreError::CapExceeded { .. } => ExperimentError::Cap(e.to_string()),
            QcoreError::InvalidArgument(_) => ExperimentError::Config(e.to_string()),
            _ => ExperimentError::Module(e.to_string()),
        }
    }
}

impl From<SmpError> for ExperimentError {
    fn from(e: SmpError) -> Self {
        match e {
            SmpError::Qcore(q) => q.into(),
            SmpError::EnumerationCap { .. } => ExperimentError::Cap(e.to_string()),
            SmpError::InvalidParameter(_) => ExperimentError::Config(e.to_string()),
            _ => ExperimentError::Module(e.to_string()),
        }
    }
}

impl From<TransformError> for ExperimentError {
    fn from(e: TransformError) -> Self {
        match e {
            TransformError::Qcore(q) => q.into(),
            TransformError::Smp(s) => s.into(),
            TransformError::InvalidParameter(_) => ExperimentError::Config(e.to_string()),
            _ => ExperimentError::Module(e.to_string()),
        }
    }
}

impl From<CodeError> for ExperimentError {
    fn from(e: CodeError) -> Self {
        match e {
            CodeError::TooLarge { .. } => ExperimentError::Cap(e.to_string()),
            _ => ExperimentError::Config(e.to_string()),
        }
    }
}

impl From<OracleError> for ExperimentError {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::Smp(s) => s.into(),
            OracleError::Code(c) => c.into(),
            OracleError::CapExceeded { .. } => ExperimentError::Cap(e.to_string()),
            _ => ExperimentError::Module(e.to_string()),
        }
    }
}

impl From<std::io::Error> for ExperimentError {
    fn from(e: std::io::Error) -> Self {
        ExperimentError::Io(e.to_string())
    }
}

pub type Result<T, E = ExperimentError> = std::result::Result<T, E>;

/// Parameter record shared by all experiments; each experiment reads the
/// fields it uses and fills in its defaults.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub s: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub subset_size: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub copies: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub edges_sent: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub trials: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instances: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub attempts: Option<u64>,
    /// `hadamard` or a generator-matrix file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub code: Option<String>,
    /// Named fixture within an experiment.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fixture: Option<String>,
    /// Matrix file for the `files` learn-state fixture.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<String>,
    /// Comma-separated matrix files for the `files` learn-state fixture.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<String>,
}

fn parse_value<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value.trim().parse().map_err(|_| ExperimentError::Config(format!("bad value {value:?} for {key}")))
}

impl Params {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "n" => self.n = Some(parse_value(key, value)?),
            "k" => self.k = Some(parse_value(key, value)?),
            "delta" => self.delta = Some(parse_value(key, value)?),
            "r" => self.r = Some(parse_value(key, value)?),
            "s" => self.s = Some(parse_value(key, value)?),
            "reps" => self.reps = Some(parse_value(key, value)?),
            "subset_size" => self.subset_size = Some(parse_value(key, value)?),
            "copies" => self.copies = Some(parse_value(key, value)?),
            "edges_sent" => self.edges_sent = Some(parse_value(key, value)?),
            "trials" => self.trials = Some(parse_value(key, value)?),
            "instances" => self.instances = Some(parse_value(key, value)?),
            "q" => self.q = Some(parse_value(key, value)?),
            "c" => self.c = Some(parse_value(key, value)?),
            "attempts" => self.attempts = Some(parse_value(key, value)?),
            "code" => self.code = Some(value.to_string()),
            "fixture" => self.fixture = Some(value.to_string()),
            "state" => self.state = Some(value.to_string()),
            "family" => self.family = Some(value.to_string()),
            _ => return Err(ExperimentError::Config(format!("unknown parameter {key:?}"))),
        }
        Ok(())
    }
}

/// Tolerances used by assertions, on top of the numerical ones.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RunTolerances {
    pub numeric: Tolerances,
    /// Slack on comparisons of exactly computed probabilities.
    pub exact: f64,
    /// Slack on amplitudes extracted from simulated states.
    pub amplitude: f64,
    /// Slack on the band-weight bound at bad steps.
    pub markov: f64,
}

impl Default for RunTolerances {
    fn default() -> Self {
        Self { numeric: Tolerances::default(), exact: 1e-12, amplitude: 1e-9, markov: 1e-6 }
    }
}

impl RunTolerances {
    pub fn with_overrides(overrides: &BTreeMap<String, f64>) -> Result<Self> {
        let mut t = Self::default();
        for (key, &v) in overrides {
            let slot = match key.as_str() {
                "exact" => &mut t.exact,
                "amplitude" => &mut t.amplitude,
                "markov" => &mut t.markov,
                "hermitian" => &mut t.numeric.hermitian,
                "trace" => &mut t.numeric.trace,
                "psd" => &mut t.numeric.psd,
                "group" => &mut t.numeric.group,
                "band_pad" => &mut t.numeric.band_pad,
                "zero_projection" => &mut t.numeric.zero_projection,
                "imag_trace" => &mut t.numeric.imag_trace,
                "band_edge_warning" => &mut t.numeric.band_edge_warning,
                "max_qubits" => {
                    if !((1.0..=16.0).contains(&v) && v.fract() == 0.0) {
                        return Err(ExperimentError::Config(format!("max_qubits = {v} must be an integer in 1..=16")));
                    }
                    t.numeric.max_qubits = v as u32;
                    continue;
                }
                _ => return Err(ExperimentError::Config(format!("unknown tolerance {key:?}"))),
            };
            if !(v >= 0.0 && v.is_finite()) {
                return Err(ExperimentError::Config(format!("tolerance {key} = {v} must be finite and >= 0")));
            }
            *slot = v;
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub parameter: String,
    pub values: Vec<String>,
}

impl SweepSpec {
    /// `key=v1,v2,...`; `key=` is an empty sweep.
    pub fn parse(text: &str) -> Result<Self> {
        let (parameter, values) = text
            .split_once('=')
            .ok_or_else(|| ExperimentError::Config(format!("sweep {text:?} is not key=v1,v2,...")))?;
        let values = values.split(',').map(str::trim).filter(|v| !v.is_empty()).map(String::from).collect();
        Ok(Self { parameter: parameter.trim().to_string(), values })
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(default)]
    pub params: Params,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub tolerance: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn new(experiment: &str) -> Self {
        Self { experiment: experiment.to_string(), ..Self::default() }
    }

    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| ExperimentError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| ExperimentError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config is representable in TOML")
    }

    /// `key=value` from the command line.
    pub fn set_param(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = split_assignment(assignment)?;
        self.params.set(k, v)
    }

    pub fn set_tolerance(&mut self, assignment: &str) -> Result<()> {
        let (k, v) = split_assignment(assignment)?;
        self.tolerance.insert(k.to_string(), parse_value(k, v)?);
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if !experiment_names().contains(&self.experiment.as_str()) {
            return Err(ExperimentError::Config(format!(
                "unknown experiment {:?}; expected one of {}",
                self.experiment,
                experiment_names().join(", ")
            )));
        }
        RunTolerances::with_overrides(&self.tolerance)?;
        if let Some(sweep) = &self.sweep {
            let mut probe = self.params.clone();
            for v in &sweep.values {
                probe.set(&sweep.parameter, v)?;
            }
        }
        Ok(())
    }
}

fn split_assignment(text: &str) -> Result<(&str, &str)> {
    text.split_once('=')
        .map(|(k, v)| (k.trim(), v.trim()))
        .ok_or_else(|| ExperimentError::Config(format!("expected key=value, got {text:?}")))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assertion {
    pub name: String,
    pub held: bool,
    /// Bound minus observed value.
    pub margin: f64,
}

impl Assertion {
    /// `observed <= bound`.
    pub fn at_most(name: &str, observed: f64, bound: f64) -> Self {
        Self { name: name.to_string(), held: observed <= bound, margin: bound - observed }
    }

    /// `observed >= bound`.
    pub fn at_least(name: &str, observed: f64, bound: f64) -> Self {
        Self { name: name.to_string(), held: observed >= bound, margin: observed - bound }
    }

    pub fn count_zero(name: &str, violations: usize) -> Self {
        Self { name: name.to_string(), held: violations == 0, margin: -(violations as f64) }
    }
}

/// What a run produced before it is written out.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Report {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub summary: Vec<(String, String)>,
    pub assertions: Vec<Assertion>,
}

impl Report {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), ..Self::default() }
    }

    pub fn row(&mut self, values: Vec<String>) {
        debug_assert_eq!(values.len(), self.columns.len());
        self.rows.push(values);
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        self.summary.push((key.to_string(), value.to_string()));
    }

    pub fn check(&mut self, assertion: Assertion) {
        self.assertions.push(assertion);
    }

    pub fn passed(&self) -> bool {
        self.assertions.iter().all(|a| a.held)
    }

    pub fn summary_value(&self, key: &str) -> Option<&str> {
        self.summary.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn csv(&self) -> String {
        let mut s = self.columns.join(",");
        s.push('\n');
        for row in &self.rows {
            s.push_str(&row.join(","));
            s.push('\n');
        }
        s
    }

    /// The `summary.txt` body.
    pub fn summary_text(&self, cfg: &ExperimentConfig) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "experiment={}", cfg.experiment);
        let _ = writeln!(s, "seed={}", cfg.seed.map_or("none".to_string(), |v| v.to_string()));
        for (k, v) in &self.summary {
            let _ = writeln!(s, "{k}={v}");
        }
        for a in &self.assertions {
            let _ = writeln!(s, "assert.{}={}", a.name, if a.held { "pass" } else { "fail" });
            let _ = writeln!(s, "margin.{}={}", a.name, a.margin);
        }
        let _ = writeln!(s, "status={}", if self.passed() { "ok" } else { "assertion_failed" });
        s
    }
}

/// A finished run: the resolved config and its report.
#[derive(Debug, Clone, PartialEq)]
pub struct RunOutcome {
    pub config: ExperimentConfig,
    pub report: Report,
}

impl RunOutcome {
    /// 0 when every hard assertion held, 3 otherwise.
    pub fn exit_code(&self) -> u8 {
        if self.report.passed() {
            0
        } else {
            3
        }
    }
}

/// Runs one experiment in memory; `cfg.params` comes back with defaults
/// filled in.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<RunOutcome> {
    cfg.validate()?;
    let mut config = cfg.clone();
    config.sweep = None;
    let tol = RunTolerances::with_overrides(&config.tolerance)?;
    let report = runs::dispatch(&config.experiment, &mut config.params, config.seed, &tol)?;
    Ok(RunOutcome { config, report })
}

/// Writes `results.csv`, `summary.txt`, `config.toml` and `timing.txt`.
pub fn write_outputs(dir: &Path, outcome: &RunOutcome, seconds: f64) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("results.csv"), outcome.report.csv())?;
    fs::write(dir.join("summary.txt"), outcome.report.summary_text(&outcome.config))?;
    fs::write(dir.join("config.toml"), outcome.config.to_toml())?;
    fs::write(dir.join("timing.txt"), format!("wall_seconds={seconds:.3}\n"))?;
    Ok(())
}

pub fn error_record(err: &ExperimentError) -> String {
    format!("status={}\nkind={}\nmessage={}\n", err.exit_code(), err.kind(), err.to_string().replace('\n', " "))
}

pub fn write_error(dir: &Path, err: &ExperimentError) -> Result<()> {
    fs::create_dir_all(dir)?;
    fs::write(dir.join("error.txt"), error_record(err))?;
    Ok(())
}

/// Runs and writes one experiment; returns the process exit code.
pub fn run_to_dir(cfg: &ExperimentConfig, dir: &Path) -> Result<u8> {
    let start = Instant::now();
    match run_experiment(cfg) {
        Ok(outcome) => {
            write_outputs(dir, &outcome, start.elapsed().as_secs_f64())?;
            Ok(outcome.exit_code())
        }
        Err(err) => {
            write_error(dir, &err)?;
            Err(err)
        }
    }
}

pub const SWEEP_COLUMNS: [&str; 6] = ["run", "parameter", "value", "seed", "status", "summary"];

/// One run per value with seed `derive_seed(seed, index)`, each in
/// `dir/run-<index>`, plus `dir/sweep.csv` with one row per run. Runs
/// execute concurrently; files are written after all runs finish.
pub fn sweep(cfg: &ExperimentConfig, spec: &SweepSpec, dir: &Path) -> Result<u8> {
    let mut base = cfg.clone();
    base.sweep = None;
    base.validate()?;
    let base_seed = base.seed.unwrap_or(0);
    let runs: Vec<(ExperimentConfig, Result<RunOutcome>, f64)> = spec
        .values
        .par_iter()
        .enumerate()
        .map(|(i, value)| {
            let mut c = base.clone();
            c.seed = Some(derive_seed(base_seed, i as u64));
            let start = Instant::now();
            let res = c.params.set(&spec.parameter, value).and_then(|_| run_experiment(&c));
            (c, res, start.elapsed().as_secs_f64())
        })
        .collect();

    fs::create_dir_all(dir)?;
    let mut csv = SWEEP_COLUMNS.join(",");
    csv.push('\n');
    let mut worst = 0u8;
    for (i, (c, res, seconds)) in runs.iter().enumerate() {
        let run_dir = dir.join(format!("run-{i}"));
        let (status, summary) = match res {
            Ok(outcome) => {
                write_outputs(&run_dir, outcome, *seconds)?;
                let summary: Vec<String> = outcome.report.summary.iter().map(|(k, v)| format!("{k}={v}")).collect();
                (outcome.exit_code(), summary.join(";"))
            }
            Err(err) => {
                write_error(&run_dir, err)?;
                (err.exit_code(), format!("error={}", err.kind()))
            }
        };
        worst = worst.max(status);
        let _ =
            writeln!(csv, "{i},{},{},{},{status},{summary}", spec.parameter, spec.values[i], c.seed.expect("derived"));
    }
    fs::write(dir.join("sweep.csv"), csv)?;
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_and_file_agree() {
        let file = ExperimentConfig::from_toml(
            "experiment = \"eq-public\"\nseed = 3\n[params]\nn = 3\nk = 1\n[tolerance]\nexact = 1e-10\n",
        )
        .unwrap();
        let mut flags = ExperimentConfig::new("eq-public");
        flags.seed = Some(3);
        flags.set_param("n=3").unwrap();
        flags.set_param("k = 1").unwrap();
        flags.set_tolerance("exact=1e-10").unwrap();
        assert_eq!(file, flags);
        assert_eq!(ExperimentConfig::from_toml(&file.to_toml()).unwrap(), file);
    }

    #[test]
    fn config_errors_exit_with_two() {
        let bad = [
            ExperimentConfig::from_toml("experiment = \"x\"\nbogus = 1\n").unwrap_err(),
            ExperimentConfig::new("eq-public").set_param("nope=1").unwrap_err(),
            ExperimentConfig::new("eq-public").set_param("n=four").unwrap_err(),
            ExperimentConfig::new("eq-public").set_tolerance("exact").unwrap_err(),
            run_experiment(&ExperimentConfig::new("no-such")).unwrap_err(),
        ];
        assert!(bad.iter().all(|e| e.exit_code() == 2), "{bad:?}");
        let mut cfg = ExperimentConfig::new("eq-public");
        cfg.tolerance.insert("wobble".into(), 1.0);
        assert_eq!(run_experiment(&cfg).unwrap_err().exit_code(), 2);
    }

    #[test]
    fn sweep_spec_parsing() {
        assert_eq!(SweepSpec::parse("k=1, 2,3").unwrap().values, vec!["1", "2", "3"]);
        assert!(SweepSpec::parse("k=").unwrap().values.is_empty());
        assert!(SweepSpec::parse("k").is_err());
    }

    #[test]
    fn summary_lists_assertions_and_status() {
        let mut r = Report::new(&["a"]);
        r.set("x", 1);
        r.check(Assertion::at_most("small", 0.5, 0.25));
        let text = r.summary_text(&ExperimentConfig::new("eq-public"));
        assert!(text.contains("assert.small=fail\nmargin.small=-0.25\n"));
        assert!(text.ends_with("status=assertion_failed\n"));
        assert_eq!(RunOutcome { config: ExperimentConfig::new("eq-public"), report: r }.exit_code(), 3);
    }
}

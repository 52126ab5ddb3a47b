//! Experiment plumbing behind the `shrinkboost` binary: instance sources,
//! sweep configuration and the artifacts a sweep leaves on disk.

use std::fmt;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use anyhow::{bail, Context, Result};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use shrinkboost::instances::{self, Stump, StumpSpec};
use shrinkboost::margins::optimal_margin;
use shrinkboost::theory::{self, BoundReport};
use shrinkboost::{run, BoostMatrix, IterateTrace, Loss as _, LossSpec, RunConfig, StepKind, StepRule, Termination};

pub const SUMMARY_FILE: &str = "summary.json";
pub const MARGINS_FILE: &str = "margins.csv";
pub const BOUNDS_FILE: &str = "bounds.json";

/// Synthetic instance families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GeneratorSpec {
    Planted { m: usize, n: usize, gamma: f64, seed: u64 },
    PlantedBinary { m: usize, n: usize, gamma: f64, seed: u64 },
    Mixed { m0: usize, m1: usize, n: usize, seed: u64 },
}

impl GeneratorSpec {
    pub fn seed(&self) -> u64 {
        match *self {
            GeneratorSpec::Planted { seed, .. }
            | GeneratorSpec::PlantedBinary { seed, .. }
            | GeneratorSpec::Mixed { seed, .. } => seed,
        }
    }

    pub fn generate(&self) -> Result<BoostMatrix> {
        Ok(match *self {
            GeneratorSpec::Planted { m, n, gamma, seed } => instances::planted(m, n, gamma, seed)?,
            GeneratorSpec::PlantedBinary { m, n, gamma, seed } => instances::planted_binary(m, n, gamma, seed)?,
            GeneratorSpec::Mixed { m0, m1, n, seed } => instances::mixed(m0, m1, n, seed)?,
        })
    }
}

impl fmt::Display for GeneratorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GeneratorSpec::Planted { m, n, gamma, seed } => write!(f, "planted:{m},{n},{gamma},{seed}"),
            GeneratorSpec::PlantedBinary { m, n, gamma, seed } => write!(f, "planted_binary:{m},{n},{gamma},{seed}"),
            GeneratorSpec::Mixed { m0, m1, n, seed } => write!(f, "mixed:{m0},{m1},{n},{seed}"),
        }
    }
}

/// Accepts `name:a,b,c,d` or `name(a,b,c,d)`.
impl FromStr for GeneratorSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (name, args) = if let Some((name, rest)) = s.split_once('(') {
            let inner = rest
                .strip_suffix(')')
                .ok_or_else(|| format!("generator '{s}': missing ')'"))?;
            (name, inner)
        } else {
            s.split_once(':')
                .ok_or_else(|| format!("generator '{s}': expected name:args"))?
        };
        let args: Vec<&str> = args.split(',').map(str::trim).collect();
        if args.len() != 4 {
            return Err(format!("generator '{s}': expected 4 arguments, got {}", args.len()));
        }
        fn num<T: FromStr>(s: &str, what: &str) -> Result<T, String> {
            s.parse().map_err(|_| format!("bad {what} '{s}'"))
        }
        match name.trim() {
            "planted" | "planted_binary" => {
                let m = num(args[0], "m")?;
                let n = num(args[1], "n")?;
                let gamma = num(args[2], "gamma")?;
                let seed = num(args[3], "seed")?;
                Ok(if name.trim() == "planted" {
                    GeneratorSpec::Planted { m, n, gamma, seed }
                } else {
                    GeneratorSpec::PlantedBinary { m, n, gamma, seed }
                })
            }
            "mixed" => Ok(GeneratorSpec::Mixed {
                m0: num(args[0], "m0")?,
                m1: num(args[1], "m1")?,
                n: num(args[2], "n")?,
                seed: num(args[3], "seed")?,
            }),
            other => Err(format!("unknown generator '{other}' (planted, planted_binary, mixed)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum InstanceSource {
    Matrix { path: PathBuf },
    Dataset { path: PathBuf, stumps: StumpSpec },
    Generator { spec: GeneratorSpec },
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub matrix: BoostMatrix,
    /// Stump behind each column when built from a dataset.
    pub stumps: Option<Vec<Stump>>,
    pub seed: Option<u64>,
}

impl InstanceSource {
    pub fn path(&self) -> Option<&Path> {
        match self {
            InstanceSource::Matrix { path } | InstanceSource::Dataset { path, .. } => Some(path),
            InstanceSource::Generator { .. } => None,
        }
    }

    pub fn load(&self) -> Result<Instance> {
        match self {
            InstanceSource::Matrix { path } => Ok(Instance {
                matrix: instances::load_matrix(path)?,
                stumps: None,
                seed: None,
            }),
            InstanceSource::Dataset { path, stumps } => {
                let data = instances::load_dataset(path)?;
                let sm = instances::build_stump_matrix(&data, stumps)?;
                Ok(Instance {
                    matrix: sm.matrix,
                    stumps: Some(sm.stumps),
                    seed: None,
                })
            }
            InstanceSource::Generator { spec } => Ok(Instance {
                matrix: spec.generate()?,
                stumps: None,
                seed: Some(spec.seed()),
            }),
        }
    }
}

impl fmt::Display for InstanceSource {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InstanceSource::Matrix { path } => write!(f, "matrix:{}", path.display()),
            InstanceSource::Dataset { path, .. } => write!(f, "dataset:{}", path.display()),
            InstanceSource::Generator { spec } => spec.fmt(f),
        }
    }
}

/// Bound families a sweep attaches to each run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum BoundCheck {
    Risk,
    Margin,
    /// Fraction of examples with margin below `theta` (AdaBoost runs only).
    Fraction { theta: f64 },
}

impl FromStr for BoundCheck {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "risk" => Ok(BoundCheck::Risk),
            "margin" => Ok(BoundCheck::Margin),
            other => match other.strip_prefix("fraction:") {
                Some(theta) => theta
                    .parse()
                    .map(|theta| BoundCheck::Fraction { theta })
                    .map_err(|_| format!("bad theta '{theta}'")),
                None => Err(format!("unknown bound check '{other}' (risk, margin, fraction:THETA)")),
            },
        }
    }
}

/// Reports for the requested checks that apply to `trace`. Fraction checks
/// are skipped without the instance matrix.
pub fn attach_bounds(
    a: Option<&BoostMatrix>,
    trace: &IterateTrace,
    gamma: Option<f64>,
    checks: &[BoundCheck],
) -> Vec<BoundReport> {
    let gamma = gamma.filter(|&g| g > 0.0);
    let mut out: Vec<BoundReport> = theory::applicable_bounds(trace, gamma)
        .into_iter()
        .filter(|r| {
            let family = if r.name.starts_with("risk_") {
                BoundCheck::Risk
            } else {
                BoundCheck::Margin
            };
            checks.contains(&family)
        })
        .collect();
    if let (Some(a), true) = (a, trace.config.loss.is_exponential()) {
        for c in checks {
            if let (BoundCheck::Fraction { theta }, Some(g)) = (c, gamma) {
                if let Ok(r) = theory::margin_fraction_check(a, trace, g, *theta) {
                    out.push(r);
                }
            }
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub source: InstanceSource,
    pub rules: Vec<StepKind>,
    pub nus: Vec<f64>,
    pub loss: LossSpec,
    pub max_iters: usize,
    pub risk_target: Option<f64>,
    pub out_dir: PathBuf,
    pub bounds: Vec<BoundCheck>,
    /// Concurrent runs; `None` uses every core.
    pub workers: Option<usize>,
}

impl ExperimentConfig {
    pub fn new(source: InstanceSource, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            source,
            rules: StepKind::ALL.to_vec(),
            nus: vec![1.0],
            loss: LossSpec::Exponential,
            max_iters: 1000,
            risk_target: None,
            out_dir: out_dir.into(),
            bounds: vec![BoundCheck::Risk, BoundCheck::Margin],
            workers: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rules.is_empty() {
            bail!("at least one step rule is required");
        }
        if self.nus.is_empty() {
            bail!("at least one nu is required");
        }
        for &nu in &self.nus {
            StepRule::new(StepKind::Qub, nu)?;
        }
        if self.max_iters == 0 {
            bail!("iteration budget must be at least 1");
        }
        if self.workers == Some(0) {
            bail!("worker count must be at least 1");
        }
        if let Some(p) = self.source.path() {
            if !p.is_file() {
                bail!("input file {} does not exist", p.display());
            }
        }
        Ok(())
    }

    fn jobs(&self) -> Vec<(StepKind, f64)> {
        self.rules
            .iter()
            .flat_map(|&k| self.nus.iter().map(move |&nu| (k, nu)))
            .collect()
    }
}

pub fn trace_stem(rule: StepKind, nu: f64) -> String {
    format!("trace_{}_nu{}", rule.name(), nu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundSummary {
    pub name: String,
    pub status: theory::BoundStatus,
    pub max_violation: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub rule: StepKind,
    pub nu: f64,
    pub trace_csv: Option<String>,
    pub trace_json: Option<String>,
    pub iterations: Option<usize>,
    pub final_margin: Option<f64>,
    pub final_log_risk: Option<f64>,
    pub termination: Option<Termination>,
    pub outside_theory: bool,
    /// Step flags raised anywhere in the run, once each.
    pub flags: Vec<String>,
    pub bounds: Vec<BoundSummary>,
    pub error: Option<String>,
}

impl RunSummary {
    fn failed(rule: StepKind, nu: f64, error: String) -> Self {
        RunSummary {
            rule,
            nu,
            trace_csv: None,
            trace_json: None,
            iterations: None,
            final_margin: None,
            final_log_risk: None,
            termination: None,
            outside_theory: false,
            flags: Vec::new(),
            bounds: Vec::new(),
            error: Some(error),
        }
    }

    pub fn ok(&self) -> bool {
        self.error.is_none()
            && self.termination.as_ref().is_some_and(Termination::is_normal)
            && self.bounds.iter().all(|b| b.status != theory::BoundStatus::Violated)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSummary {
    pub config: ExperimentConfig,
    pub instance: String,
    pub m: usize,
    pub n: usize,
    pub binary: bool,
    /// Best achievable margin of the instance.
    pub gamma: f64,
    pub runs: Vec<RunSummary>,
    pub all_ok: bool,
}

#[derive(Serialize)]
struct RunBounds<'a> {
    rule: StepKind,
    nu: f64,
    reports: &'a [BoundReport],
}

struct RunOutput {
    summary: RunSummary,
    trace: Option<IterateTrace>,
    reports: Vec<BoundReport>,
}

fn one_run(cfg: &ExperimentConfig, inst: &Instance, gamma: f64, rule: StepKind, nu: f64) -> RunOutput {
    let attempt = || -> Result<(RunSummary, IterateTrace, Vec<BoundReport>)> {
        let mut rc = RunConfig::new(cfg.loss, StepRule::new(rule, nu)?, cfg.max_iters);
        rc.risk_target = cfg.risk_target;
        rc.seed = inst.seed;
        let trace = run(&inst.matrix, &rc)?;
        let reports = attach_bounds(Some(&inst.matrix), &trace, Some(gamma), &cfg.bounds);

        let stem = trace_stem(rule, nu);
        let csv_name = format!("{stem}.csv");
        let json_name = format!("{stem}.json");
        let csv_path = cfg.out_dir.join(&csv_name);
        trace
            .write_csv(BufWriter::new(File::create(&csv_path)?))
            .with_context(|| format!("writing {}", csv_path.display()))?;
        let json_path = cfg.out_dir.join(&json_name);
        trace
            .write_json(BufWriter::new(File::create(&json_path)?))
            .with_context(|| format!("writing {}", json_path.display()))?;

        let mut flags: Vec<String> = Vec::new();
        for f in trace.records.iter().filter_map(|r| r.flag) {
            let name = f.name().to_string();
            if !flags.contains(&name) {
                flags.push(name);
            }
        }
        let last = trace.last();
        let summary = RunSummary {
            rule,
            nu,
            trace_csv: Some(csv_name),
            trace_json: Some(json_name),
            iterations: Some(trace.iterations()),
            final_margin: last.margin,
            final_log_risk: Some(last.log_risk),
            termination: Some(trace.termination.clone()),
            outside_theory: trace.outside_theory,
            flags,
            bounds: reports
                .iter()
                .map(|r| BoundSummary {
                    name: r.name.clone(),
                    status: r.status,
                    max_violation: r.max_violation,
                })
                .collect(),
            error: None,
        };
        Ok((summary, trace, reports))
    };
    match attempt() {
        Ok((summary, trace, reports)) => RunOutput {
            summary,
            trace: Some(trace),
            reports,
        },
        Err(e) => RunOutput {
            summary: RunSummary::failed(rule, nu, format!("{e:#}")),
            trace: None,
            reports: Vec::new(),
        },
    }
}

/// Runs every (rule, nu) pair and writes one trace CSV and JSON per run,
/// plus the combined margins CSV, bound reports and summary.
pub fn sweep(cfg: &ExperimentConfig) -> Result<SweepSummary> {
    cfg.validate()?;
    let inst = cfg.source.load().with_context(|| format!("loading {}", cfg.source))?;
    let gamma = optimal_margin(&inst.matrix)?.gamma;
    fs::create_dir_all(&cfg.out_dir).with_context(|| format!("creating {}", cfg.out_dir.display()))?;

    let jobs = cfg.jobs();
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(w) = cfg.workers {
        pool = pool.num_threads(w);
    }
    let outputs: Vec<RunOutput> = pool
        .build()?
        .install(|| jobs.par_iter().map(|&(k, nu)| one_run(cfg, &inst, gamma, k, nu)).collect());

    let margins_path = cfg.out_dir.join(MARGINS_FILE);
    let mut w = csv::Writer::from_path(&margins_path)?;
    w.write_record(["rule", "nu", "t", "margin"])?;
    for out in &outputs {
        let Some(trace) = &out.trace else { continue };
        for r in &trace.records {
            if let Some(mg) = r.margin {
                w.write_record([
                    out.summary.rule.name().to_string(),
                    out.summary.nu.to_string(),
                    r.t.to_string(),
                    mg.to_string(),
                ])?;
            }
        }
    }
    w.flush()?;

    let bounds: Vec<RunBounds> = outputs
        .iter()
        .filter(|o| o.trace.is_some())
        .map(|o| RunBounds {
            rule: o.summary.rule,
            nu: o.summary.nu,
            reports: &o.reports,
        })
        .collect();
    serde_json::to_writer_pretty(BufWriter::new(File::create(cfg.out_dir.join(BOUNDS_FILE))?), &bounds)?;

    let runs: Vec<RunSummary> = outputs.into_iter().map(|o| o.summary).collect();
    let summary = SweepSummary {
        config: cfg.clone(),
        instance: cfg.source.to_string(),
        m: inst.matrix.rows(),
        n: inst.matrix.cols(),
        binary: inst.matrix.is_binary(),
        gamma,
        all_ok: runs.iter().all(RunSummary::ok),
        runs,
    };
    serde_json::to_writer_pretty(BufWriter::new(File::create(cfg.out_dir.join(SUMMARY_FILE))?), &summary)?;
    Ok(summary)
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use shrinkboost::hardcore::DEFAULT_VERIFY_CAP;
use shrinkboost::instances::{self, StumpSpec, Thresholds};
use shrinkboost::margins::optimal_margin;
use shrinkboost::theory;
use shrinkboost::{compute_hardcore, verify_hardcore, IterateTrace, LossSpec, StepKind};
use shrinkboost_cli::{attach_bounds, sweep, BoundCheck, ExperimentConfig, GeneratorSpec, InstanceSource};

#[derive(Parser)]
#[command(name = "shrinkboost", version, about = "Shrinkage boosting experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Single boosting run.
    Run(RunArgs),
    /// All combinations of the given rules and shrinkage factors.
    Sweep(SweepArgs),
    /// Best achievable margin of an instance.
    Gamma(SourceArgs),
    /// Split an instance into its hard core and easy rows.
    Hardcore(HardcoreArgs),
    /// Per-iteration AdaBoost margin guarantee for given nu and gamma.
    Upsilon(UpsilonArgs),
    /// Build a decision-stump matrix from a labelled dataset.
    Stumps(StumpsArgs),
    /// Evaluate the bounds that apply to a saved JSON trace.
    CheckBounds(CheckBoundsArgs),
}

#[derive(Args, Clone)]
#[group(multiple = false)]
struct SourceSel {
    /// Headerless CSV of matrix entries in [-1, 1].
    #[arg(long)]
    matrix: Option<PathBuf>,
    /// CSV of numeric features with a final +1/-1 label column.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// planted:m,n,gamma,seed | planted_binary:m,n,gamma,seed | mixed:m0,m1,n,seed
    #[arg(long)]
    generator: Option<GeneratorSpec>,
}

#[derive(Args, Clone)]
struct SourceArgs {
    #[command(flatten)]
    sel: SourceSel,
    /// Leave out the negated stumps when building from a dataset.
    #[arg(long)]
    no_negations: bool,
}

impl SourceArgs {
    fn optional(&self) -> Option<InstanceSource> {
        let stumps = StumpSpec {
            thresholds: Thresholds::Midpoints,
            include_negations: !self.no_negations,
        };
        match (&self.sel.matrix, &self.sel.dataset, self.sel.generator) {
            (Some(p), _, _) => Some(InstanceSource::Matrix { path: p.clone() }),
            (_, Some(p), _) => Some(InstanceSource::Dataset { path: p.clone(), stumps }),
            (_, _, Some(spec)) => Some(InstanceSource::Generator { spec }),
            _ => None,
        }
    }

    fn source(&self) -> Result<InstanceSource> {
        match self.optional() {
            Some(s) => Ok(s),
            None => bail!("an instance is required: --matrix, --dataset or --generator"),
        }
    }
}

#[derive(Args)]
struct CommonRunArgs {
    #[command(flatten)]
    source: SourceArgs,
    #[arg(long, default_value = "exp")]
    loss: LossSpec,
    #[arg(long, default_value_t = 1000)]
    iters: usize,
    /// Stop a run once its risk falls to this value.
    #[arg(long)]
    risk_target: Option<f64>,
    #[arg(long, env = "SHRINKBOOST_OUT", default_value = "shrinkboost-out")]
    out: PathBuf,
    /// Bound checks: risk, margin, fraction:THETA.
    #[arg(long, value_delimiter = ',', default_value = "risk,margin")]
    bounds: Vec<BoundCheck>,
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    #[arg(long, default_value = "wolfe")]
    rule: StepKind,
    #[arg(long, default_value_t = 1.0)]
    nu: f64,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    common: CommonRunArgs,
    #[arg(long, value_delimiter = ',', default_value = "qub,wolfe,ada,opt")]
    rules: Vec<StepKind>,
    #[arg(long, value_delimiter = ',', default_value = "1,0.5,0.1")]
    nus: Vec<f64>,
    /// Concurrent runs (all cores when omitted).
    #[arg(long)]
    workers: Option<usize>,
}

#[derive(Args)]
struct HardcoreArgs {
    #[command(flatten)]
    source: SourceArgs,
    /// Also re-check the decomposition with the restricted row LPs.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct UpsilonArgs {
    #[arg(long)]
    nu: f64,
    #[arg(long)]
    gamma: f64,
    /// Also report the per-iteration fraction factor at this margin level.
    #[arg(long)]
    theta: Option<f64>,
}

#[derive(Args)]
struct StumpsArgs {
    dataset: PathBuf,
    #[arg(long)]
    no_negations: bool,
    /// Matrix CSV destination (stdout when omitted).
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Also write the stump behind each column as JSON.
    #[arg(long)]
    stumps_json: Option<PathBuf>,
}

#[derive(Args)]
struct CheckBoundsArgs {
    /// JSON trace written by `run` or `sweep`.
    trace: PathBuf,
    /// Instance the trace was run on; needed for margin and fraction checks.
    #[command(flatten)]
    source: SourceArgs,
    /// Use this gamma instead of solving for it.
    #[arg(long)]
    gamma: Option<f64>,
    #[arg(long, value_delimiter = ',', default_value = "risk,margin")]
    bounds: Vec<BoundCheck>,
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    let mut out = io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

fn experiment(common: CommonRunArgs, rules: Vec<StepKind>, nus: Vec<f64>, workers: Option<usize>) -> Result<bool> {
    let mut cfg = ExperimentConfig::new(common.source.source()?, common.out);
    cfg.rules = rules;
    cfg.nus = nus;
    cfg.loss = common.loss;
    cfg.max_iters = common.iters;
    cfg.risk_target = common.risk_target;
    cfg.bounds = common.bounds;
    cfg.workers = workers;
    let summary = sweep(&cfg)?;
    eprintln!(
        "{} ({}x{}, gamma = {}) -> {}",
        summary.instance,
        summary.m,
        summary.n,
        summary.gamma,
        cfg.out_dir.display()
    );
    for r in &summary.runs {
        let status = if r.ok() { "ok" } else { "FAIL" };
        match &r.error {
            Some(e) => eprintln!("  {:<5} nu={:<6} {status}: {e}", r.rule.name(), r.nu),
            None => eprintln!(
                "  {:<5} nu={:<6} {status}: {} iters, {}, margin {}",
                r.rule.name(),
                r.nu,
                r.iterations.unwrap_or(0),
                r.termination.as_ref().map_or("?", |t| t.name()),
                r.final_margin.map_or_else(|| "undefined".to_string(), |m| m.to_string()),
            ),
        }
    }
    Ok(summary.all_ok)
}

#[derive(Serialize)]
struct GammaOut {
    m: usize,
    n: usize,
    binary: bool,
    gamma: f64,
    witness: Vec<f64>,
}

#[derive(Serialize)]
struct UpsilonOut {
    nu: f64,
    gamma: f64,
    upsilon: f64,
    theta: Option<f64>,
    fraction_factor: Option<f64>,
}

fn dispatch(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Run(a) => experiment(a.common, vec![a.rule], vec![a.nu], Some(1)),
        Command::Sweep(a) => experiment(a.common, a.rules, a.nus, a.workers),
        Command::Gamma(src) => {
            let a = src.source()?.load()?.matrix;
            let opt = optimal_margin(&a)?;
            print_json(&GammaOut {
                m: a.rows(),
                n: a.cols(),
                binary: a.is_binary(),
                gamma: opt.gamma,
                witness: opt.witness,
            })?;
            Ok(true)
        }
        Command::Hardcore(h) => {
            let a = h.source.source()?.load()?.matrix;
            let hc = compute_hardcore(&a)?;
            print_json(&hc)?;
            if h.verify {
                let ok = verify_hardcore(&a, &hc, DEFAULT_VERIFY_CAP)?;
                eprintln!("verification {}", if ok { "passed" } else { "FAILED" });
                return Ok(ok);
            }
            Ok(true)
        }
        Command::Upsilon(u) => {
            let upsilon = theory::upsilon(u.nu, u.gamma)?;
            let fraction_factor = u
                .theta
                .map(|th| theory::upsilon_product_factor(u.nu, u.gamma, th))
                .transpose()?;
            print_json(&UpsilonOut {
                nu: u.nu,
                gamma: u.gamma,
                upsilon,
                theta: u.theta,
                fraction_factor,
            })?;
            Ok(true)
        }
        Command::Stumps(s) => {
            let data = instances::load_dataset(&s.dataset)?;
            let spec = StumpSpec {
                thresholds: Thresholds::Midpoints,
                include_negations: !s.no_negations,
            };
            let sm = instances::build_stump_matrix(&data, &spec)?;
            match &s.output {
                Some(p) => instances::save_matrix(&sm.matrix, p)?,
                None => instances::write_matrix(&sm.matrix, io::stdout().lock())?,
            }
            if let Some(p) = &s.stumps_json {
                let f = File::create(p).with_context(|| format!("creating {}", p.display()))?;
                serde_json::to_writer_pretty(BufWriter::new(f), &sm.stumps)?;
            }
            eprintln!("{} rows, {} stump columns", sm.matrix.rows(), sm.matrix.cols());
            Ok(true)
        }
        Command::CheckBounds(c) => {
            let f = File::open(&c.trace).with_context(|| format!("opening {}", c.trace.display()))?;
            let trace = IterateTrace::read_json(io::BufReader::new(f))?;
            let matrix = c.source.optional().map(|s| s.load()).transpose()?.map(|i| i.matrix);
            if let Some(a) = &matrix {
                if (a.rows(), a.cols()) != (trace.m, trace.n) {
                    bail!("instance is {}x{}, trace was run on {}x{}", a.rows(), a.cols(), trace.m, trace.n);
                }
            }
            let gamma = match (c.gamma, &matrix) {
                (Some(g), _) => Some(g),
                (None, Some(a)) => Some(optimal_margin(a)?.gamma),
                (None, None) => None,
            };
            if matrix.is_none() && c.bounds.iter().any(|b| matches!(b, BoundCheck::Fraction { .. })) {
                bail!("fraction checks need the instance (--matrix, --dataset or --generator)");
            }
            let reports = attach_bounds(matrix.as_ref(), &trace, gamma, &c.bounds);
            print_json(&reports)?;
            Ok(trace.termination.is_normal() && reports.iter().all(|r| r.satisfied()))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

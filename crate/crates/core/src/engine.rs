//! Coordinate-descent boosting loop.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::BoostMatrix;
use crate::loss::{Loss, LossSpec};
use crate::steps::{compute_step, log_risk, StepContext, StepError, StepFlag, StepKind, StepRule};
use crate::trace::{IterRecord, IterateTrace};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("max_iters must be at least 1")]
    ZeroIterations,
    #[error("risk target must be positive and finite, got {0}")]
    RiskTarget(f64),
    #[error("gamma_t floor must be in [0, 1), got {0}")]
    GammaFloor(f64),
    #[error(transparent)]
    Step(#[from] StepError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub loss: LossSpec,
    pub rule: StepRule,
    pub max_iters: usize,
    /// Stop once the risk is at or below this value. `None` runs the full budget.
    pub risk_target: Option<f64>,
    /// Stop when `gamma_t <= gamma_t_floor`.
    pub gamma_t_floor: f64,
    pub record_margins: bool,
    /// Seed of the instance generator, carried for provenance only.
    pub seed: Option<u64>,
}

impl RunConfig {
    pub fn new(loss: LossSpec, rule: StepRule, max_iters: usize) -> Self {
        RunConfig {
            loss,
            rule,
            max_iters,
            risk_target: None,
            gamma_t_floor: 0.0,
            record_margins: true,
            seed: None,
        }
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.max_iters == 0 {
            return Err(ConfigError::ZeroIterations);
        }
        if let Some(eps) = self.risk_target {
            if !(eps > 0.0 && eps.is_finite()) {
                return Err(ConfigError::RiskTarget(eps));
            }
        }
        if !(0.0..1.0).contains(&self.gamma_t_floor) {
            return Err(ConfigError::GammaFloor(self.gamma_t_floor));
        }
        self.rule.validated()?;
        Ok(())
    }

    /// AdaBoost steps carry no guarantee outside the exponential loss.
    pub fn outside_theory(&self) -> bool {
        self.rule.kind == StepKind::Ada && !self.loss.is_exponential()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Termination {
    MaxIters,
    RiskTarget,
    GammaFloor { gamma_t: f64 },
    StepFailed { error: String },
    CappedStep { flag: StepFlag },
    /// The accepted step did not lower the computed risk.
    NoProgress,
    /// A margin exceeded the exponential clamp.
    Saturated,
}

impl Termination {
    /// Whether the run ended by exhausting its budget, meeting a target or
    /// reaching a point where floating-point steps stop lowering the risk.
    pub fn is_normal(&self) -> bool {
        matches!(
            self,
            Termination::MaxIters | Termination::RiskTarget | Termination::GammaFloor { .. } | Termination::NoProgress
        )
    }

    pub fn name(&self) -> &'static str {
        match self {
            Termination::MaxIters => "max_iters",
            Termination::RiskTarget => "risk_target",
            Termination::GammaFloor { .. } => "gamma_floor",
            Termination::StepFailed { .. } => "step_failed",
            Termination::CappedStep { .. } => "capped_step",
            Termination::NoProgress => "no_progress",
            Termination::Saturated => "saturated",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ColumnChoice {
    pub column: usize,
    pub sign: f64,
    /// `|A^T g|_inf / |g|_1`.
    pub gamma_t: f64,
}

/// Picks `j = argmax_j |(A^T g)_j|` (lowest index on ties) and the sign that
/// makes `g^T A v` negative (`+1` when the correlation is zero).
pub fn select_column(a: &BoostMatrix, gradient: &[f64]) -> ColumnChoice {
    let corr = a.col_correlation(gradient);
    let mut best = 0;
    for (j, c) in corr.iter().enumerate() {
        if c.abs() > corr[best].abs() {
            best = j;
        }
    }
    let g1: f64 = gradient.iter().map(|g| g.abs()).sum();
    let sign = if corr[best] > 0.0 { -1.0 } else { 1.0 };
    ColumnChoice {
        column: best,
        sign,
        gamma_t: corr[best].abs() / g1,
    }
}

pub fn run(a: &BoostMatrix, cfg: &RunConfig) -> Result<IterateTrace, ConfigError> {
    run_with_loss(a, &cfg.loss, cfg)
}

/// Same as [`run`] with an arbitrary loss; `cfg.loss` is recorded but not used.
pub fn run_with_loss<L: Loss + ?Sized>(
    a: &BoostMatrix,
    loss: &L,
    cfg: &RunConfig,
) -> Result<IterateTrace, ConfigError> {
    cfg.validate()?;
    let n = a.cols();
    let mut lambda = vec![0.0; n];
    let z0 = vec![0.0; a.rows()];
    let mut current = log_risk(loss, &z0);
    let mut records = vec![IterRecord::initial(current)];
    let ln_target = cfg.risk_target.map(f64::ln);
    let saturates = |z: &[f64]| cfg.loss == LossSpec::Exponential && z.iter().any(|&x| cfg.loss.saturates(x));

    let mut termination = Termination::MaxIters;
    if ln_target.is_some_and(|lt| current <= lt) {
        termination = Termination::RiskTarget;
    } else {
        for t in 1..=cfg.max_iters {
            let ctx = StepContext::new(loss, a, &lambda);
            if ctx.gamma_t <= cfg.gamma_t_floor {
                termination = Termination::GammaFloor { gamma_t: ctx.gamma_t };
                break;
            }
            let out = match compute_step(&cfg.rule, loss, a, &ctx) {
                Ok(out) => out,
                Err(e) => {
                    termination = Termination::StepFailed { error: e.to_string() };
                    break;
                }
            };
            let prev = lambda[ctx.column];
            lambda[ctx.column] += ctx.sign * out.alpha;
            let z = a.matvec(&lambda);
            if saturates(&z) {
                lambda[ctx.column] = prev;
                termination = Termination::Saturated;
                break;
            }
            let next = log_risk(loss, &z);
            if !(next < current) {
                lambda[ctx.column] = prev;
                termination = Termination::NoProgress;
                break;
            }
            current = next;
            let l1: f64 = lambda.iter().map(|v| v.abs()).sum();
            let margin = if cfg.record_margins && l1 > 0.0 {
                Some(z.iter().map(|&v| -v / l1).fold(f64::INFINITY, f64::min))
            } else {
                None
            };
            records.push(IterRecord {
                t,
                column: Some(ctx.column),
                sign: Some(if ctx.sign > 0.0 { 1 } else { -1 }),
                alpha: out.alpha,
                risk: current.exp(),
                log_risk: current,
                margin,
                gamma_t: Some(ctx.gamma_t),
                l1_norm: l1,
                c_t: Some(ctx.c_t),
                flag: out.flag,
            });
            if let Some(flag) = out.flag.filter(StepFlag::is_terminal) {
                termination = Termination::CappedStep { flag };
                break;
            }
            if ln_target.is_some_and(|lt| current <= lt) {
                termination = Termination::RiskTarget;
                break;
            }
        }
    }

    Ok(IterateTrace {
        m: a.rows(),
        n,
        config: cfg.clone(),
        outside_theory: cfg.outside_theory(),
        termination,
        records,
        final_lambda: lambda,
    })
}

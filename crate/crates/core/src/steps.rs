//! Step-size rules for one coordinate-descent iteration.
//!
//! Four rules are provided, from most to least conservative: the
//! quadratic-upper-bound step, a Wolfe search, the AdaBoost step and the
//! exact line minimizer. Each is scaled by a shrinkage factor `nu` in
//! `(0, 1]`.
//!
//! Line searches evaluate `phi(alpha) = L(A(lambda + alpha v))` relative to
//! `phi(0)`. All sums are shifted by the largest per-example log-loss, so
//! they stay finite when the risk itself is far below `f64::MIN_POSITIVE`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::engine::select_column;
use crate::linalg::BoostMatrix;
use crate::loss::Loss;

/// `gamma_t` values at or above `1 - UNIT_GAMMA_BAND` make the AdaBoost step
/// degenerate.
pub const UNIT_GAMMA_BAND: f64 = 1e-12;
/// Replacement `gamma_t` under [`StepRule::clamp_unit_gamma`].
pub const CLAMPED_GAMMA: f64 = 1.0 - 1e-9;

const MAX_SEARCH_ITERS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StepKind {
    Qub,
    Wolfe,
    Ada,
    Opt,
}

impl StepKind {
    pub const ALL: [StepKind; 4] = [StepKind::Qub, StepKind::Wolfe, StepKind::Ada, StepKind::Opt];

    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Qub => "qub",
            StepKind::Wolfe => "wolfe",
            StepKind::Ada => "ada",
            StepKind::Opt => "opt",
        }
    }
}

impl std::fmt::Display for StepKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for StepKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "qub" => Ok(StepKind::Qub),
            "wolfe" | "wol" => Ok(StepKind::Wolfe),
            "ada" | "adaboost" => Ok(StepKind::Ada),
            "opt" | "optimal" => Ok(StepKind::Opt),
            other => Err(format!("unknown step rule '{other}' (expected qub|wolfe|ada|opt)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum StepError {
    #[error("invalid step rule: {0}")]
    InvalidRule(String),
    #[error("gamma_t is zero; the iterate is stationary")]
    ZeroGamma,
    #[error("gamma_t = {0} is too close to 1 for the AdaBoost step")]
    DegenerateGamma(f64),
    #[error("bisection interval [{lo}, {hi}] shrank below tolerance without satisfying the Wolfe conditions")]
    BisectionStall { lo: f64, hi: f64 },
    #[error("direction is not a descent direction")]
    NotDescent,
}

/// Non-fatal conditions attached to a returned step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StepFlag {
    /// Wolfe expansion reached `alpha_cap` without meeting the curvature condition.
    BracketFailure,
    /// The line derivative was still negative at `alpha_cap`.
    NoMinimizer,
    /// `gamma_t` was clamped below 1 for the AdaBoost step.
    GammaClamped,
}

impl StepFlag {
    /// Capped steps end a run.
    pub fn is_terminal(&self) -> bool {
        matches!(self, StepFlag::BracketFailure | StepFlag::NoMinimizer)
    }

    pub fn name(&self) -> &'static str {
        match self {
            StepFlag::BracketFailure => "bracket_failure",
            StepFlag::NoMinimizer => "no_minimizer",
            StepFlag::GammaClamped => "gamma_clamped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRule {
    pub kind: StepKind,
    pub nu: f64,
    pub wolfe_tol: f64,
    pub opt_tol: f64,
    pub alpha_cap: f64,
    /// Clamp `gamma_t` to `1 - 1e-9` instead of halting when the AdaBoost
    /// step degenerates.
    pub clamp_unit_gamma: bool,
}

impl StepRule {
    pub fn new(kind: StepKind, nu: f64) -> Result<Self, StepError> {
        StepRule {
            kind,
            nu,
            wolfe_tol: 1e-10,
            opt_tol: 1e-12,
            alpha_cap: 50.0,
            clamp_unit_gamma: false,
        }
        .validated()
    }

    pub fn validated(self) -> Result<Self, StepError> {
        if !(self.nu > 0.0 && self.nu <= 1.0) {
            return Err(StepError::InvalidRule(format!("nu = {} outside (0, 1]", self.nu)));
        }
        if !(self.wolfe_tol > 0.0 && self.opt_tol > 0.0 && self.alpha_cap > 0.0) {
            return Err(StepError::InvalidRule("tolerances and alpha_cap must be positive".into()));
        }
        Ok(self)
    }
}

/// State at `lambda_{t-1}` needed by every rule.
#[derive(Debug, Clone, PartialEq)]
pub struct StepContext {
    pub column: usize,
    /// `+1.0` or `-1.0`; the direction is `sign * e_column`.
    pub sign: f64,
    /// `|A^T grad L|_inf / |grad L|_1`.
    pub gamma_t: f64,
    /// Curvature envelope at `l^{-1}(m L(A lambda_{t-1}))`.
    pub c_t: f64,
    pub log_risk: f64,
    /// `A lambda_{t-1}`.
    pub margins: Vec<f64>,
    /// `grad L(A lambda_{t-1})` rescaled to unit l1 norm.
    pub gradient: Vec<f64>,
    /// `ln |grad L|_1`.
    pub ln_grad_norm: f64,
}

/// `ln sum_i exp(v_i)` and the shift used.
pub(crate) fn log_sum_exp(v: impl Iterator<Item = f64> + Clone) -> (f64, f64) {
    let shift = v.clone().fold(f64::NEG_INFINITY, f64::max);
    let s: f64 = v.map(|x| (x - shift).exp()).sum();
    (shift + s.ln(), shift)
}

/// `ln L(z)` for margins `z`.
pub fn log_risk<L: Loss + ?Sized>(loss: &L, z: &[f64]) -> f64 {
    let (lse, _) = log_sum_exp(z.iter().map(|&x| loss.ln_eval(x)));
    lse - (z.len() as f64).ln()
}

impl StepContext {
    pub fn new<L: Loss + ?Sized>(loss: &L, a: &BoostMatrix, lambda: &[f64]) -> Self {
        let margins = a.matvec(lambda);
        let m = margins.len() as f64;
        let log_risk = log_risk(loss, &margins);

        let ln_d: Vec<f64> = margins.iter().map(|&x| loss.ln_deriv(x)).collect();
        let (ln_sum, shift) = log_sum_exp(ln_d.iter().copied());
        let mut gradient: Vec<f64> = ln_d.iter().map(|&x| (x - shift).exp()).collect();
        let total: f64 = gradient.iter().sum();
        gradient.iter_mut().for_each(|g| *g /= total);

        let choice = select_column(a, &gradient);
        let c_t = loss.curvature_envelope(loss.inverse_ln(log_risk + m.ln()));
        StepContext {
            column: choice.column,
            sign: choice.sign,
            gamma_t: choice.gamma_t,
            c_t,
            log_risk,
            margins,
            gradient,
            ln_grad_norm: ln_sum - m.ln(),
        }
    }
}

/// `phi(alpha) / phi(0)` and `phi'(alpha) / phi(0)` along the chosen coordinate.
pub struct LineFunction<'a, L: Loss + ?Sized> {
    loss: &'a L,
    base: &'a [f64],
    dir: Vec<f64>,
    shift: f64,
    value0: f64,
}

impl<'a, L: Loss + ?Sized> LineFunction<'a, L> {
    pub fn new(loss: &'a L, a: &BoostMatrix, ctx: &'a StepContext) -> Self {
        let base = &ctx.margins[..];
        let dir: Vec<f64> = (0..a.rows()).map(|i| ctx.sign * a.get(i, ctx.column)).collect();
        let shift = base.iter().map(|&x| loss.ln_eval(x)).fold(f64::NEG_INFINITY, f64::max);
        let value0 = base.iter().map(|&x| (loss.ln_eval(x) - shift).exp()).sum();
        LineFunction {
            loss,
            base,
            dir,
            shift,
            value0,
        }
    }

    pub fn value_ratio(&self, alpha: f64) -> f64 {
        let s: f64 = self
            .base
            .iter()
            .zip(&self.dir)
            .map(|(&z, &d)| (self.loss.ln_eval(z + alpha * d) - self.shift).exp())
            .sum();
        s / self.value0
    }

    pub fn slope_ratio(&self, alpha: f64) -> f64 {
        let s: f64 = self
            .base
            .iter()
            .zip(&self.dir)
            .filter(|(_, &d)| d != 0.0)
            .map(|(&z, &d)| d * (self.loss.ln_deriv(z + alpha * d) - self.shift).exp())
            .sum();
        s / self.value0
    }

    /// `|A^T grad L|_inf / L`, i.e. `-phi'(0) / phi(0)`.
    pub fn initial_decrease(&self) -> f64 {
        -self.slope_ratio(0.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepOutcome {
    pub alpha: f64,
    pub flag: Option<StepFlag>,
}

impl StepOutcome {
    fn plain(alpha: f64) -> Self {
        StepOutcome { alpha, flag: None }
    }
}

pub fn step_qub(ctx: &StepContext, nu: f64) -> Result<f64, StepError> {
    if !(ctx.gamma_t > 0.0) {
        return Err(StepError::ZeroGamma);
    }
    let c2 = ctx.c_t * ctx.c_t;
    Ok(nu * ctx.gamma_t / (c2 * c2))
}

pub fn step_ada(ctx: &StepContext, nu: f64, clamp_unit_gamma: bool) -> Result<StepOutcome, StepError> {
    let mut gamma = ctx.gamma_t;
    let mut flag = None;
    if gamma >= 1.0 - UNIT_GAMMA_BAND {
        if !clamp_unit_gamma {
            return Err(StepError::DegenerateGamma(gamma));
        }
        gamma = CLAMPED_GAMMA;
        flag = Some(StepFlag::GammaClamped);
    }
    // (nu/2) ln((1+g)/(1-g)) = nu atanh(g)
    Ok(StepOutcome {
        alpha: nu * gamma.atanh(),
        flag,
    })
}

/// Sufficient decrease with factor `1 - nu/2`, curvature with `1 - nu/4`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WolfeCheck {
    pub decrease_lhs: f64,
    pub decrease_rhs: f64,
    pub curvature_lhs: f64,
    pub curvature_rhs: f64,
}

impl WolfeCheck {
    pub fn sufficient_decrease(&self) -> bool {
        self.decrease_lhs <= self.decrease_rhs
    }

    pub fn curvature(&self) -> bool {
        self.curvature_lhs >= self.curvature_rhs
    }

    pub fn holds(&self) -> bool {
        self.sufficient_decrease() && self.curvature()
    }
}

/// Both Wolfe inequalities at `alpha`, each side divided by `L(A lambda_{t-1})`.
pub fn wolfe_check<L: Loss + ?Sized>(line: &LineFunction<'_, L>, nu: f64, alpha: f64) -> WolfeCheck {
    let g = line.initial_decrease();
    WolfeCheck {
        decrease_lhs: line.value_ratio(alpha),
        decrease_rhs: 1.0 - alpha * (1.0 - nu / 2.0) * g,
        curvature_lhs: line.slope_ratio(alpha),
        curvature_rhs: -(1.0 - nu / 4.0) * g,
    }
}

pub fn step_wolfe<L: Loss + ?Sized>(
    loss: &L,
    a: &BoostMatrix,
    ctx: &StepContext,
    nu: f64,
    tol: f64,
    alpha_cap: f64,
) -> Result<StepOutcome, StepError> {
    let line = LineFunction::new(loss, a, ctx);
    if !(line.initial_decrease() > 0.0) {
        return Err(StepError::NotDescent);
    }
    let mut lo = 0.0;
    let mut hi: Option<f64> = None;
    let mut alpha = alpha_cap.min(1.0);
    for _ in 0..MAX_SEARCH_ITERS {
        let check = wolfe_check(&line, nu, alpha);
        if !check.sufficient_decrease() {
            hi = Some(alpha);
        } else if !check.curvature() {
            lo = alpha;
        } else {
            return Ok(StepOutcome::plain(alpha));
        }
        match hi {
            Some(h) => {
                if h - lo <= tol {
                    return Err(StepError::BisectionStall { lo, hi: h });
                }
                alpha = 0.5 * (lo + h);
            }
            None => {
                if alpha >= alpha_cap {
                    return Ok(StepOutcome {
                        alpha: alpha_cap,
                        flag: Some(StepFlag::BracketFailure),
                    });
                }
                alpha = (2.0 * alpha).min(alpha_cap);
            }
        }
    }
    Err(StepError::BisectionStall {
        lo,
        hi: hi.unwrap_or(f64::INFINITY),
    })
}

/// Unshrunk exact minimizer of `phi` by bisection on `phi'`.
pub fn line_minimizer<L: Loss + ?Sized>(
    loss: &L,
    a: &BoostMatrix,
    ctx: &StepContext,
    tol: f64,
    alpha_cap: f64,
) -> Result<StepOutcome, StepError> {
    let line = LineFunction::new(loss, a, ctx);
    let g = line.initial_decrease();
    if !(g > 0.0) {
        return Err(StepError::NotDescent);
    }
    let mut lo = 0.0;
    let mut hi = alpha_cap.min(1.0);
    while line.slope_ratio(hi) < 0.0 {
        if hi >= alpha_cap {
            return Ok(StepOutcome {
                alpha: alpha_cap,
                flag: Some(StepFlag::NoMinimizer),
            });
        }
        lo = hi;
        hi = (2.0 * hi).min(alpha_cap);
    }
    for _ in 0..MAX_SEARCH_ITERS {
        let mid = 0.5 * (lo + hi);
        let s = line.slope_ratio(mid);
        if s.abs() <= tol * g {
            return Ok(StepOutcome::plain(mid));
        }
        if s < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    Ok(StepOutcome::plain(0.5 * (lo + hi)))
}

pub fn step_opt<L: Loss + ?Sized>(
    loss: &L,
    a: &BoostMatrix,
    ctx: &StepContext,
    nu: f64,
    tol: f64,
    alpha_cap: f64,
) -> Result<StepOutcome, StepError> {
    let out = line_minimizer(loss, a, ctx, tol, alpha_cap)?;
    Ok(StepOutcome {
        alpha: nu * out.alpha,
        flag: out.flag,
    })
}

pub fn compute_step<L: Loss + ?Sized>(
    rule: &StepRule,
    loss: &L,
    a: &BoostMatrix,
    ctx: &StepContext,
) -> Result<StepOutcome, StepError> {
    match rule.kind {
        StepKind::Qub => step_qub(ctx, rule.nu).map(StepOutcome::plain),
        StepKind::Wolfe => step_wolfe(loss, a, ctx, rule.nu, rule.wolfe_tol, rule.alpha_cap),
        StepKind::Ada => step_ada(ctx, rule.nu, rule.clamp_unit_gamma),
        StepKind::Opt => step_opt(loss, a, ctx, rule.nu, rule.opt_tol, rule.alpha_cap),
    }
}

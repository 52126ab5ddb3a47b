//! Closed-form rate and margin bounds, evaluated against recorded traces.
//!
//! Risk bounds are compared as `ln L_t <= ln(bound) + SLACK`, so long
//! products never underflow. Margin bounds are compared as
//! `margin >= bound - SLACK`.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::BoostMatrix;
use crate::loss::Loss as _;
use crate::margins::margin_fraction_below;
use crate::steps::{StepFlag, StepKind, CLAMPED_GAMMA};
use crate::trace::IterateTrace;

pub const SLACK: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum TheoryError {
    #[error("argument out of domain: {0}")]
    Domain(String),
    #[error("bound requires a {expected} run, trace used {found}")]
    RuleMismatch { expected: String, found: StepKind },
    #[error("t0 = {t0} is past the end of a trace with {iterations} iterations")]
    InvalidT0 { t0: usize, iterations: usize },
}

fn domain(msg: impl Into<String>) -> TheoryError {
    TheoryError::Domain(msg.into())
}

/// `ln( (1/2)((1+g)^{1-nu} + (1-g)^{1-nu}) )` without cancellation for small `nu`.
fn ln_half_power_sum(nu: f64, g: f64) -> f64 {
    let up = (1.0 + g) * (-nu * g.ln_1p()).exp_m1();
    let down = (1.0 - g) * (-nu * (-g).ln_1p()).exp_m1();
    (0.5 * (up + down)).ln_1p()
}

/// `ln( (1/2)(1-g^2)^{nu/2}((1+g)^{1-nu} + (1-g)^{1-nu}) )`, the AdaBoost per-step risk factor.
pub fn ln_ada_factor(nu: f64, g: f64) -> f64 {
    0.5 * nu * (-g * g).ln_1p() + ln_half_power_sum(nu, g)
}

fn check_nu(nu: f64) -> Result<(), TheoryError> {
    if nu > 0.0 && nu <= 1.0 {
        Ok(())
    } else {
        Err(domain(format!("nu = {nu} outside (0, 1]")))
    }
}

fn check_open_unit(name: &str, v: f64) -> Result<(), TheoryError> {
    if v > 0.0 && v < 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} = {v} outside (0, 1)")))
    }
}

/// The margin threshold below which the AdaBoost product factor is `< 1`.
pub fn upsilon(nu: f64, gamma: f64) -> Result<f64, TheoryError> {
    check_nu(nu)?;
    check_open_unit("gamma", gamma)?;
    let num = -(-gamma * gamma).ln_1p() - (2.0 / nu) * ln_half_power_sum(nu, gamma);
    Ok(num / (2.0 * gamma.atanh()))
}

/// `ln` of `(1/2)((1+g)/(1-g))^{theta nu/2}(1-g^2)^{nu/2}((1+g)^{1-nu} + (1-g)^{1-nu})`.
pub fn ln_upsilon_product_factor(nu: f64, gamma: f64, theta: f64) -> Result<f64, TheoryError> {
    check_nu(nu)?;
    check_open_unit("gamma", gamma)?;
    if !(0.0..=1.0).contains(&theta) {
        return Err(domain(format!("theta = {theta} outside [0, 1]")));
    }
    Ok(theta * nu * gamma.atanh() + ln_ada_factor(nu, gamma))
}

pub fn upsilon_product_factor(nu: f64, gamma: f64, theta: f64) -> Result<f64, TheoryError> {
    ln_upsilon_product_factor(nu, gamma, theta).map(f64::exp)
}

/// `(r, (1/2) ln((1+r)/(1-r)), r/(1-r))`, increasing left to right.
pub fn log_odds_sandwich(r: f64) -> Result<(f64, f64, f64), TheoryError> {
    if !(0.0..1.0).contains(&r) {
        return Err(domain(format!("r = {r} outside [0, 1)")));
    }
    Ok((r, r.atanh(), r / (1.0 - r)))
}

/// Guaranteed risk ratio `exp(-nu(2-nu) gamma_t^2 / (2 C_t^6))` after one quadratic-bound step.
pub fn qub_single_step_factor(nu: f64, gamma_t: f64, c_t: f64) -> f64 {
    (-nu * (2.0 - nu) * gamma_t * gamma_t / (2.0 * c_t.powi(6))).exp()
}

/// Bound on the fraction of examples with margin below `theta` after `t`
/// AdaBoost steps under the exponential loss. `None` unless `theta < gamma/(1+gamma)`.
pub fn margin_fraction_bound_ada(gamma: f64, theta: f64, nu: f64, t: usize) -> Option<f64> {
    if !(theta < gamma / (1.0 + gamma)) {
        return None;
    }
    Some((-(t as f64) * nu * (gamma * gamma - theta * gamma * (2.0 + gamma)) / 2.0).exp())
}

/// Iteration count past which the AdaBoost margin is at least `theta`.
/// `None` unless `theta < gamma/(2+gamma)`.
pub fn ada_margin_iteration_threshold(gamma: f64, theta: f64, nu: f64, m: usize) -> Option<f64> {
    if !(theta < gamma / (2.0 + gamma)) {
        return None;
    }
    Some(2.0 * (m as f64).ln() / (nu * (gamma * gamma - theta * gamma * (2.0 + gamma))))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundStatus {
    Satisfied,
    Violated,
    /// No iteration met the preconditions.
    NotApplicable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundSense {
    /// `empirical <= theoretical`
    Upper,
    /// `empirical >= theoretical`
    Lower,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundPoint {
    pub t: usize,
    pub theoretical: f64,
    pub empirical: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub sense: BoundSense,
    /// Values are natural logs of the risk rather than the risk itself.
    pub log_scale: bool,
    pub t0: usize,
    pub points: Vec<BoundPoint>,
    pub status: BoundStatus,
    /// Largest amount by which the empirical value crossed the bound (0 if never).
    pub max_violation: f64,
}

impl BoundReport {
    fn build(name: &str, sense: BoundSense, log_scale: bool, t0: usize, points: Vec<BoundPoint>) -> Self {
        let excess = |p: &BoundPoint| match sense {
            BoundSense::Upper => p.empirical - p.theoretical,
            BoundSense::Lower => p.theoretical - p.empirical,
        };
        let max_violation = points.iter().map(excess).fold(0.0f64, f64::max);
        let status = if points.is_empty() {
            BoundStatus::NotApplicable
        } else if points.iter().all(|p| excess(p) <= SLACK) {
            BoundStatus::Satisfied
        } else {
            BoundStatus::Violated
        };
        BoundReport {
            name: name.to_string(),
            sense,
            log_scale,
            t0,
            points,
            status,
            max_violation,
        }
    }

    pub fn satisfied(&self) -> bool {
        self.status != BoundStatus::Violated
    }
}

fn require_rule(trace: &IterateTrace, allowed: &[StepKind], expected: &str) -> Result<(), TheoryError> {
    let found = trace.config.rule.kind;
    if allowed.contains(&found) {
        Ok(())
    } else {
        Err(TheoryError::RuleMismatch {
            expected: expected.to_string(),
            found,
        })
    }
}

fn require_t0(trace: &IterateTrace, t0: usize) -> Result<(), TheoryError> {
    if t0 > trace.iterations() {
        Err(TheoryError::InvalidT0 {
            t0,
            iterations: trace.iterations(),
        })
    } else {
        Ok(())
    }
}

fn gamma_at(trace: &IterateTrace, i: usize) -> f64 {
    trace.records[i].gamma_t.expect("gamma_t is recorded for t >= 1")
}

fn c_at(trace: &IterateTrace, i: usize) -> Option<f64> {
    trace.records.get(i).and_then(|r| r.c_t)
}

/// `L_t <= L_{t0} exp(-nu(2-nu)/(denom C_{t0+1}^6) sum gamma_i^2)`.
fn risk_bound_exp_form(trace: &IterateTrace, t0: usize, denom: f64, name: &str) -> BoundReport {
    let nu = trace.config.rule.nu;
    let base = trace.records[t0].log_risk;
    let mut points = vec![BoundPoint {
        t: t0,
        theoretical: base,
        empirical: base,
    }];
    if let Some(c) = c_at(trace, t0 + 1) {
        let rate = nu * (2.0 - nu) / (denom * c.powi(6));
        let mut sum = 0.0;
        for t in t0 + 1..trace.records.len() {
            sum += gamma_at(trace, t).powi(2);
            points.push(BoundPoint {
                t,
                theoretical: base - rate * sum,
                empirical: trace.records[t].log_risk,
            });
        }
    }
    BoundReport::build(name, BoundSense::Upper, true, t0, points)
}

/// Risk bound for steps between the quadratic-bound step and the exact minimizer.
pub fn risk_bound_qub(trace: &IterateTrace, t0: usize) -> Result<BoundReport, TheoryError> {
    require_rule(trace, &[StepKind::Qub, StepKind::Opt], "qub or opt")?;
    require_t0(trace, t0)?;
    Ok(risk_bound_exp_form(trace, t0, 2.0, "risk_qub"))
}

pub fn risk_bound_wolfe(trace: &IterateTrace, t0: usize) -> Result<BoundReport, TheoryError> {
    require_rule(trace, &[StepKind::Wolfe], "wolfe")?;
    require_t0(trace, t0)?;
    Ok(risk_bound_exp_form(trace, t0, 8.0, "risk_wolfe"))
}

/// Risk bound for steps within `tau` of the AdaBoost step:
/// `L_t <= L_{t0} prod e^tau C_i^4 (1/2)(1-g_i^2)^{nu/2}((1+g_i)^{1-nu} + (1-g_i)^{1-nu})`.
pub fn risk_bound_ada(trace: &IterateTrace, t0: usize, tau: f64) -> Result<BoundReport, TheoryError> {
    require_rule(trace, &[StepKind::Ada, StepKind::Opt], "ada or opt")?;
    require_t0(trace, t0)?;
    if !(tau >= 0.0) {
        return Err(domain(format!("tau = {tau} must be nonnegative")));
    }
    let nu = trace.config.rule.nu;
    let base = trace.records[t0].log_risk;
    let mut points = vec![BoundPoint {
        t: t0,
        theoretical: base,
        empirical: base,
    }];
    let mut acc = base;
    for t in t0 + 1..trace.records.len() {
        let rec = &trace.records[t];
        let mut g = gamma_at(trace, t);
        if rec.flag == Some(StepFlag::GammaClamped) {
            g = g.min(CLAMPED_GAMMA);
        }
        let c = rec.c_t.expect("c_t is recorded for t >= 1");
        acc += tau + 4.0 * c.ln() + ln_ada_factor(nu, g);
        points.push(BoundPoint {
            t,
            theoretical: acc,
            empirical: rec.log_risk,
        });
    }
    Ok(BoundReport::build("risk_ada", BoundSense::Upper, true, t0, points))
}

fn recorded_margin(trace: &IterateTrace, t: usize) -> Option<f64> {
    trace.records[t].margin
}

/// Margin lower bound for the quadratic-bound step, checked at every `t`
/// past `2 C_1^6 ln m / (gamma^2 nu (2-nu))`.
pub fn margin_bound_qub(trace: &IterateTrace, gamma: f64, t0: usize) -> Result<BoundReport, TheoryError> {
    require_rule(trace, &[StepKind::Qub], "qub")?;
    require_t0(trace, t0)?;
    let mut points = Vec::new();
    if let (Some(c1), Some(c), true) = (c_at(trace, 1), c_at(trace, t0 + 1), gamma > 0.0) {
        let nu = trace.config.rule.nu;
        let m = trace.m as f64;
        let floor = 2.0 * c1.powi(6) * m.ln() / (gamma * gamma * nu * (2.0 - nu));
        let c6 = c.powi(6);
        let head: f64 = (1..=t0).map(|i| gamma_at(trace, i).powi(2)).sum();
        let ln_c0 = (m.ln() + c.ln() + trace.records[t0].log_risk + nu * (2.0 - nu) / (2.0 * c6) * head).max(0.0);
        let lead = gamma * (2.0 - nu) / (2.0 * c6);
        for t in (t0 + 1)..trace.records.len() {
            if (t as f64) < floor {
                continue;
            }
            if let Some(mg) = recorded_margin(trace, t) {
                points.push(BoundPoint {
                    t,
                    theoretical: lead - ln_c0 / (t as f64 * nu * gamma),
                    empirical: mg,
                });
            }
        }
    }
    Ok(BoundReport::build("margin_qub", BoundSense::Lower, false, t0, points))
}

/// Margin lower bound for the Wolfe search, checked at every `t` past
/// `8 C_1^6 ln m / (gamma^2 nu (2-nu))`.
pub fn margin_bound_wolfe(trace: &IterateTrace, gamma: f64, t0: usize) -> Result<BoundReport, TheoryError> {
    require_rule(trace, &[StepKind::Wolfe], "wolfe")?;
    require_t0(trace, t0)?;
    let mut points = Vec::new();
    if let (Some(c1), Some(c), true) = (c_at(trace, 1), c_at(trace, t0 + 1), gamma > 0.0) {
        let nu = trace.config.rule.nu;
        let m = trace.m as f64;
        let floor = 8.0 * c1.powi(6) * m.ln() / (gamma * gamma * nu * (2.0 - nu));
        let c2 = c * c;
        let alpha_head: f64 = (1..=t0 + 1).map(|i| trace.records[i].alpha).sum();
        let ln_c0 =
            (m.ln() + c.ln() + trace.records[t0].log_risk + (2.0 - nu) * gamma / (2.0 * c2) * alpha_head).max(0.0);
        let lead = gamma * (2.0 - nu) / (2.0 * c2);
        let scale = 4.0 * c1.powi(4);
        for t in (t0 + 1)..trace.records.len() {
            if (t as f64) < floor {
                continue;
            }
            if let Some(mg) = recorded_margin(trace, t) {
                points.push(BoundPoint {
                    t,
                    theoretical: lead - scale * ln_c0 / (t as f64 * nu * gamma),
                    empirical: mg,
                });
            }
        }
    }
    Ok(BoundReport::build("margin_wolfe", BoundSense::Lower, false, t0, points))
}

/// Fraction of examples below margin `theta` against its AdaBoost bound, at every `t >= 1`.
pub fn margin_fraction_check(
    a: &BoostMatrix,
    trace: &IterateTrace,
    gamma: f64,
    theta: f64,
) -> Result<BoundReport, TheoryError> {
    require_rule(trace, &[StepKind::Ada], "ada")?;
    let nu = trace.config.rule.nu;
    let mut points = Vec::new();
    for (t, lambda) in trace.lambdas().enumerate().skip(1) {
        let Some(bound) = margin_fraction_bound_ada(gamma, theta, nu, t) else {
            break;
        };
        let frac = margin_fraction_below(a, &lambda, theta).map_err(|e| domain(e.to_string()))?;
        points.push(BoundPoint {
            t,
            theoretical: bound,
            empirical: frac,
        });
    }
    Ok(BoundReport::build("margin_fraction_ada", BoundSense::Upper, false, 0, points))
}

/// Every bound that applies to the trace's rule, with `t0 = 0`. Margin
/// bounds need `gamma`; the AdaBoost bounds need the exponential loss.
pub fn applicable_bounds(trace: &IterateTrace, gamma: Option<f64>) -> Vec<BoundReport> {
    let exp = trace.config.loss.is_exponential();
    let mut out = Vec::new();
    let mut push = |r: Result<BoundReport, TheoryError>| {
        if let Ok(r) = r {
            out.push(r);
        }
    };
    match trace.config.rule.kind {
        StepKind::Qub => {
            push(risk_bound_qub(trace, 0));
            if let Some(g) = gamma {
                push(margin_bound_qub(trace, g, 0));
            }
        }
        StepKind::Wolfe => {
            push(risk_bound_wolfe(trace, 0));
            if let Some(g) = gamma {
                push(margin_bound_wolfe(trace, g, 0));
            }
        }
        StepKind::Opt => push(risk_bound_qub(trace, 0)),
        StepKind::Ada => {
            if exp {
                push(risk_bound_ada(trace, 0, 0.0));
            }
        }
    }
    out
}

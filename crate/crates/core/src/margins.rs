//! l1 margins of a weighting and the optimal margin (weak-learning rate)
//! of an instance.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{BoostMatrix, LpBuilder, LpError, LpStatus, Relation, VarBound};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MarginError {
    #[error("margin is undefined for the zero weighting")]
    ZeroWeighting,
    #[error("optimal-margin LP failed: {0}")]
    Lp(#[from] LpError),
    #[error("optimal-margin LP returned {0:?}")]
    UnexpectedStatus(LpStatus),
}

pub fn l1_norm(lambda: &[f64]) -> f64 {
    lambda.iter().map(|v| v.abs()).sum()
}

/// Per-example normalized margins `-e_i^T A lambda / |lambda|_1`.
pub fn margin_vector(a: &BoostMatrix, lambda: &[f64]) -> Result<Vec<f64>, MarginError> {
    let norm = l1_norm(lambda);
    if norm == 0.0 {
        return Err(MarginError::ZeroWeighting);
    }
    Ok(a.matvec(lambda).into_iter().map(|z| -z / norm).collect())
}

pub fn min_margin(a: &BoostMatrix, lambda: &[f64]) -> Result<f64, MarginError> {
    Ok(margin_vector(a, lambda)?
        .into_iter()
        .fold(f64::INFINITY, f64::min))
}

/// Fraction of examples whose margin is strictly below `theta`.
pub fn margin_fraction_below(a: &BoostMatrix, lambda: &[f64], theta: f64) -> Result<f64, MarginError> {
    let margins = margin_vector(a, lambda)?;
    let below = margins.iter().filter(|&&v| v < theta).count();
    Ok(below as f64 / margins.len() as f64)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OptimalMargin {
    /// `min_{w in simplex} |A^T w|_inf`, equal to the best achievable margin.
    pub gamma: f64,
    /// A minimizing distribution over examples.
    pub witness: Vec<f64>,
}

/// Solves `min t  s.t.  -t <= (A^T w)_j <= t,  sum w = 1,  w >= 0`.
pub fn optimal_margin(a: &BoostMatrix) -> Result<OptimalMargin, MarginError> {
    let (m, n) = (a.rows(), a.cols());
    let mut lp = LpBuilder::new();
    for _ in 0..m {
        lp.add_var(VarBound::NonNegative, 0.0);
    }
    let t = lp.add_var(VarBound::NonNegative, 1.0);
    for j in 0..n {
        let col = a.column(j);
        let mut upper = col.clone();
        upper.push(-1.0);
        lp.add_constraint(upper, Relation::Le, 0.0);
        let mut lower: Vec<f64> = col.iter().map(|v| -v).collect();
        lower.push(-1.0);
        lp.add_constraint(lower, Relation::Le, 0.0);
    }
    let mut simplex = vec![1.0; m];
    simplex.push(0.0);
    lp.add_constraint(simplex, Relation::Eq, 1.0);

    let sol = lp.solve()?;
    if sol.status != LpStatus::Optimal {
        return Err(MarginError::UnexpectedStatus(sol.status));
    }
    let mut witness: Vec<f64> = sol.values[..t].iter().map(|v| v.max(0.0)).collect();
    let total: f64 = witness.iter().sum();
    witness.iter_mut().for_each(|w| *w /= total);
    // report the value attained by the witness itself
    let gamma = a
        .col_correlation(&witness)
        .into_iter()
        .fold(0.0f64, |acc, v| acc.max(v.abs()))
        .clamp(0.0, 1.0);
    Ok(OptimalMargin { gamma, witness })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MarginReport {
    pub min_margin: f64,
    pub margin_vector: Vec<f64>,
    pub l1_norm: f64,
    pub gamma: f64,
    pub witness_w: Vec<f64>,
}

pub fn margin_report(a: &BoostMatrix, lambda: &[f64]) -> Result<MarginReport, MarginError> {
    let margin_vector = margin_vector(a, lambda)?;
    let min_margin = margin_vector.iter().copied().fold(f64::INFINITY, f64::min);
    let opt = optimal_margin(a)?;
    Ok(MarginReport {
        min_margin,
        margin_vector,
        l1_norm: l1_norm(lambda),
        gamma: opt.gamma,
        witness_w: opt.witness,
    })
}

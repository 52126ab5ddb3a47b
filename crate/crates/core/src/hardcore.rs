//! Hard-core decomposition of a boosting instance.
//!
//! Row `i` is off the hard core exactly when some weighting keeps every row
//! nonpositive while pushing row `i` strictly negative. By positive
//! homogeneity that is the LP feasibility question
//!
//! ```text
//!     exists lambda:  A lambda <= 0,  e_i^T A lambda <= -1
//! ```
//!
//! Feasible rows form the easy set; the sum of their certificates is
//! strictly negative on every easy row and zero on the hard core.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{BoostMatrix, LpBuilder, LpError, LpStatus, Relation, VarBound};

/// Band inside which a certificate entry counts as zero.
pub const ZERO_TOL: f64 = 1e-9;

/// Default largest row count [`verify_hardcore`] accepts.
pub const DEFAULT_VERIFY_CAP: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HardcoreError {
    #[error("hard-core LP failed: {0}")]
    Lp(#[from] LpError),
    #[error("hard-core LP returned {0:?}")]
    UnexpectedStatus(LpStatus),
    #[error("verification limited to {cap} rows, matrix has {rows}")]
    VerificationTooLarge { rows: usize, cap: usize },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HardCore {
    /// Row indices (0-based) in the hard core, ascending.
    pub hard_rows: Vec<usize>,
    pub easy_rows: Vec<usize>,
    /// Weighting that is strictly negative on easy rows and zero on hard rows.
    pub certificate: Vec<f64>,
}

impl HardCore {
    /// Rows in the hard core (`None` when empty).
    pub fn hard_block(&self, a: &BoostMatrix) -> Option<BoostMatrix> {
        a.select_rows(&self.hard_rows)
    }

    /// Rows off the hard core (`None` when empty).
    pub fn easy_block(&self, a: &BoostMatrix) -> Option<BoostMatrix> {
        a.select_rows(&self.easy_rows)
    }

    pub fn is_separable(&self) -> bool {
        self.hard_rows.is_empty()
    }
}

/// Finds `lambda` with `A_S lambda <= 0` over `rows` and `e_target^T A lambda <= -1`,
/// minimizing `|lambda|_1`. `None` if infeasible.
fn negating_weighting(
    a: &BoostMatrix,
    rows: &[usize],
    target: usize,
) -> Result<Option<Vec<f64>>, HardcoreError> {
    let n = a.cols();
    let mut lp = LpBuilder::new();
    for _ in 0..n {
        lp.add_var(VarBound::Free, 0.0);
    }
    // |lambda_j| <= s_j, minimize sum s
    for _ in 0..n {
        lp.add_var(VarBound::NonNegative, 1.0);
    }
    for j in 0..n {
        let mut r = vec![0.0; 2 * n];
        r[j] = 1.0;
        r[n + j] = -1.0;
        lp.add_constraint(r.clone(), Relation::Le, 0.0);
        r[j] = -1.0;
        lp.add_constraint(r, Relation::Le, 0.0);
    }
    for &i in rows {
        lp.add_constraint(a.row(i).to_vec(), Relation::Le, 0.0);
    }
    lp.add_constraint(a.row(target).to_vec(), Relation::Le, -1.0);
    let sol = lp.solve()?;
    match sol.status {
        LpStatus::Optimal => Ok(Some(sol.values[..n].to_vec())),
        LpStatus::Infeasible => Ok(None),
        s => Err(HardcoreError::UnexpectedStatus(s)),
    }
}

pub fn compute_hardcore(a: &BoostMatrix) -> Result<HardCore, HardcoreError> {
    let all: Vec<usize> = (0..a.rows()).collect();
    let mut certificate = vec![0.0; a.cols()];
    let mut hard_rows = Vec::new();
    let mut easy_rows = Vec::new();
    for i in 0..a.rows() {
        match negating_weighting(a, &all, i)? {
            Some(lambda) => {
                certificate.iter_mut().zip(&lambda).for_each(|(c, l)| *c += l);
                easy_rows.push(i);
            }
            None => hard_rows.push(i),
        }
    }
    Ok(HardCore {
        hard_rows,
        easy_rows,
        certificate,
    })
}

/// Checks both defining properties of `hc` against `a`: the certificate
/// separates the easy rows while vanishing on the hard rows, and no
/// weighting can push a hard row negative while keeping the other hard
/// rows nonpositive.
pub fn verify_hardcore(a: &BoostMatrix, hc: &HardCore, cap: usize) -> Result<bool, HardcoreError> {
    let m = a.rows();
    if m > cap {
        return Err(HardcoreError::VerificationTooLarge { rows: m, cap });
    }
    let mut seen = vec![false; m];
    for &i in hc.hard_rows.iter().chain(&hc.easy_rows) {
        if i >= m || seen[i] {
            return Ok(false);
        }
        seen[i] = true;
    }
    if seen.iter().any(|s| !s) || hc.certificate.len() != a.cols() {
        return Ok(false);
    }

    let z = a.matvec(&hc.certificate);
    if hc.easy_rows.iter().any(|&i| !(z[i] < 0.0) || z[i] > -ZERO_TOL) {
        return Ok(false);
    }
    if hc.hard_rows.iter().any(|&i| z[i].abs() > ZERO_TOL) {
        return Ok(false);
    }

    for &i in &hc.hard_rows {
        if negating_weighting(a, &hc.hard_rows, i)?.is_some() {
            return Ok(false);
        }
    }
    Ok(true)
}

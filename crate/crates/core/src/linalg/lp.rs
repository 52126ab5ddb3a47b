//! Dense two-phase simplex with Bland's rule.
//!
//! Problems are taken in standard form
//!
//! ```text
//!     minimize  c.x   subject to  A x = b,  x >= 0
//! ```
//!
//! and [`LpBuilder`] lowers inequality rows and free variables to it. The
//! final basis is re-solved against the original data, so reported primal
//! and dual vectors do not carry tableau drift.

use serde::{Deserialize, Serialize};
use thiserror::Error;

const PIVOT_EPS: f64 = 1e-11;
const PHASE_ONE_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LpError {
    #[error("simplex exhausted its pivot budget ({pivots} pivots); input is numerically degenerate")]
    CycleDetected { pivots: usize },
    #[error("inconsistent LP dimensions: {0}")]
    Dimension(String),
    #[error("LP coefficients must be finite")]
    NonFinite,
    #[error("final basis is numerically singular")]
    SingularBasis,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct LpProblem {
    pub objective: Vec<f64>,
    /// Equality rows, each of length `objective.len()`.
    pub constraints: Vec<Vec<f64>>,
    pub rhs: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub status: LpStatus,
    /// Objective value; meaningful only when `Optimal`.
    pub value: f64,
    pub x: Vec<f64>,
    /// Dual multipliers `y`, one per equality row (`A^T y <= c` at optimum).
    pub dual: Vec<f64>,
    pub pivots: usize,
}

impl LpSolution {
    fn without_point(status: LpStatus, n: usize, m: usize, pivots: usize) -> Self {
        LpSolution {
            status,
            value: match status {
                LpStatus::Unbounded => f64::NEG_INFINITY,
                _ => f64::INFINITY,
            },
            x: vec![0.0; n],
            dual: vec![0.0; m],
            pivots,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SimplexOptions {
    /// Pivot budget across both phases; `None` uses `10 (m + n)^2`.
    pub max_pivots: Option<usize>,
}

impl Default for SimplexOptions {
    fn default() -> Self {
        SimplexOptions { max_pivots: None }
    }
}

pub fn solve_lp(p: &LpProblem) -> Result<LpSolution, LpError> {
    solve_lp_with(p, SimplexOptions::default())
}

pub fn solve_lp_with(p: &LpProblem, opts: SimplexOptions) -> Result<LpSolution, LpError> {
    let n = p.objective.len();
    let m = p.constraints.len();
    if p.rhs.len() != m {
        return Err(LpError::Dimension(format!("{m} rows but {} right-hand sides", p.rhs.len())));
    }
    if let Some((i, r)) = p.constraints.iter().enumerate().find(|(_, r)| r.len() != n) {
        return Err(LpError::Dimension(format!("row {i} has {} coefficients, expected {n}", r.len())));
    }
    let finite = p.objective.iter().chain(&p.rhs).all(|v| v.is_finite())
        && p.constraints.iter().flatten().all(|v| v.is_finite());
    if !finite {
        return Err(LpError::NonFinite);
    }
    let cap = opts.max_pivots.unwrap_or(10 * (m + n) * (m + n)).max(1);
    Tableau::new(p).run(p, cap)
}

struct Tableau {
    m: usize,
    n: usize,
    /// `m` rows of width `n + m + 1`: structural, artificial, rhs.
    t: Vec<Vec<f64>>,
    basis: Vec<usize>,
    flipped: Vec<bool>,
    active: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn new(p: &LpProblem) -> Self {
        let n = p.objective.len();
        let m = p.constraints.len();
        let mut t = Vec::with_capacity(m);
        let mut flipped = Vec::with_capacity(m);
        for (i, row) in p.constraints.iter().enumerate() {
            let flip = p.rhs[i] < 0.0;
            let s = if flip { -1.0 } else { 1.0 };
            let mut r: Vec<f64> = row.iter().map(|v| s * v).collect();
            r.extend((0..m).map(|k| if k == i { 1.0 } else { 0.0 }));
            r.push(s * p.rhs[i]);
            t.push(r);
            flipped.push(flip);
        }
        Tableau {
            m,
            n,
            t,
            basis: (n..n + m).collect(),
            flipped,
            active: vec![true; m],
            pivots: 0,
        }
    }

    fn rhs(&self, r: usize) -> f64 {
        self.t[r][self.n + self.m]
    }

    fn pivot(&mut self, r: usize, c: usize) {
        let width = self.n + self.m + 1;
        let p = self.t[r][c];
        for k in 0..width {
            self.t[r][k] /= p;
        }
        self.t[r][c] = 1.0;
        let pivot_row = self.t[r].clone();
        for (i, row) in self.t.iter_mut().enumerate() {
            if i == r {
                continue;
            }
            let f = row[c];
            if f != 0.0 {
                for k in 0..width {
                    row[k] -= f * pivot_row[k];
                }
                row[c] = 0.0;
            }
        }
        self.basis[r] = c;
        self.pivots += 1;
    }

    /// Runs simplex iterations for the given costs over columns `< limit`.
    /// Returns `false` when the problem is unbounded in this phase.
    fn optimize(&mut self, costs: &[f64], limit: usize, cap: usize) -> Result<bool, LpError> {
        loop {
            // Bland: lowest-index column with negative reduced cost
            let mut entering = None;
            for j in 0..limit {
                if self.basis.contains(&j) {
                    continue;
                }
                let mut d = costs[j];
                for r in 0..self.m {
                    if self.active[r] {
                        d -= costs[self.basis[r]] * self.t[r][j];
                    }
                }
                if d < -PIVOT_EPS {
                    entering = Some(j);
                    break;
                }
            }
            let Some(c) = entering else { return Ok(true) };

            let mut leaving: Option<(usize, f64)> = None;
            for r in 0..self.m {
                if !self.active[r] || self.t[r][c] <= PIVOT_EPS {
                    continue;
                }
                let ratio = self.rhs(r) / self.t[r][c];
                leaving = match leaving {
                    None => Some((r, ratio)),
                    Some((lr, lratio)) => {
                        if ratio < lratio - 1e-14
                            || (ratio <= lratio + 1e-14 && self.basis[r] < self.basis[lr])
                        {
                            Some((r, ratio))
                        } else {
                            Some((lr, lratio))
                        }
                    }
                };
            }
            let Some((r, _)) = leaving else { return Ok(false) };
            if self.pivots >= cap {
                return Err(LpError::CycleDetected { pivots: self.pivots });
            }
            self.pivot(r, c);
        }
    }

    fn run(mut self, p: &LpProblem, cap: usize) -> Result<LpSolution, LpError> {
        let (m, n) = (self.m, self.n);

        // phase one: drive artificials to zero
        let mut phase_one = vec![0.0; n + m];
        phase_one[n..].iter_mut().for_each(|c| *c = 1.0);
        self.optimize(&phase_one, n + m, cap)?;
        let infeas: f64 = (0..m).filter(|&r| self.basis[r] >= n).map(|r| self.rhs(r)).sum();
        let scale = 1.0 + p.rhs.iter().fold(0.0f64, |a, b| a.max(b.abs()));
        if infeas > PHASE_ONE_TOL * scale {
            return Ok(LpSolution::without_point(LpStatus::Infeasible, n, m, self.pivots));
        }
        for r in 0..m {
            if self.basis[r] < n {
                continue;
            }
            let col = (0..n)
                .filter(|j| !self.basis.contains(j))
                .max_by(|&a, &b| self.t[r][a].abs().total_cmp(&self.t[r][b].abs()))
                .filter(|&j| self.t[r][j].abs() > 1e-9);
            match col {
                Some(j) => self.pivot(r, j),
                None => self.active[r] = false, // redundant row
            }
        }

        // phase two over structural columns only
        let mut costs = p.objective.clone();
        costs.extend(std::iter::repeat(0.0).take(m));
        if !self.optimize(&costs, n, cap)? {
            return Ok(LpSolution::without_point(LpStatus::Unbounded, n, m, self.pivots));
        }

        let (x, dual) = self.refine(p)?;
        let value = p.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        Ok(LpSolution {
            status: LpStatus::Optimal,
            value,
            x,
            dual,
            pivots: self.pivots,
        })
    }

    /// Re-solves `B x_B = b` and `B^T y = c_B` against the original rows.
    fn refine(&self, p: &LpProblem) -> Result<(Vec<f64>, Vec<f64>), LpError> {
        let rows: Vec<usize> = (0..self.m).filter(|&r| self.active[r]).collect();
        let k = rows.len();
        let sign = |i: usize| if self.flipped[i] { -1.0 } else { 1.0 };
        // basis column for a tableau row; row i of B is original row rows[a]
        let bcol = |a: usize, r: usize| -> f64 {
            let j = self.basis[rows[r]];
            let i = rows[a];
            if j < self.n {
                sign(i) * p.constraints[i][j]
            } else if j - self.n == i {
                1.0
            } else {
                0.0
            }
        };
        let mut b = vec![vec![0.0; k]; k];
        for a in 0..k {
            for r in 0..k {
                b[a][r] = bcol(a, r);
            }
        }
        let rhs: Vec<f64> = rows.iter().map(|&i| sign(i) * p.rhs[i]).collect();
        let xb = gauss_solve(b.clone(), rhs).ok_or(LpError::SingularBasis)?;

        let mut x = vec![0.0; self.n];
        for (r, &v) in xb.iter().enumerate() {
            let j = self.basis[rows[r]];
            if j < self.n {
                x[j] = v.max(0.0);
            }
        }

        let bt: Vec<Vec<f64>> = (0..k).map(|r| (0..k).map(|a| b[a][r]).collect()).collect();
        let cb: Vec<f64> = (0..k)
            .map(|r| {
                let j = self.basis[rows[r]];
                if j < self.n {
                    p.objective[j]
                } else {
                    0.0
                }
            })
            .collect();
        let y = gauss_solve(bt, cb).ok_or(LpError::SingularBasis)?;
        let mut dual = vec![0.0; self.m];
        for (a, &i) in rows.iter().enumerate() {
            dual[i] = sign(i) * y[a];
        }
        Ok((x, dual))
    }
}

/// Gaussian elimination with partial pivoting. `None` if singular.
fn gauss_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&x, &y| a[x][col].abs().total_cmp(&a[y][col].abs()))?;
        if a[piv][col].abs() < 1e-13 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for k in col..n {
                    a[r][k] -= f * a[col][k];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|k| a[r][k] * x[k]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarBound {
    NonNegative,
    /// Split into positive and negative parts internally.
    Free,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Ge,
    Eq,
}

/// Lowers a general LP (inequalities, free variables) to standard form.
#[derive(Debug, Clone, Default)]
pub struct LpBuilder {
    vars: Vec<(VarBound, f64)>,
    rows: Vec<(Vec<f64>, Relation, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct BuiltSolution {
    pub status: LpStatus,
    pub value: f64,
    /// One value per variable added to the builder.
    pub values: Vec<f64>,
    /// One multiplier per constraint added to the builder.
    pub duals: Vec<f64>,
    pub standard: LpSolution,
}

impl LpBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add_var(&mut self, bound: VarBound, cost: f64) -> usize {
        self.vars.push((bound, cost));
        self.vars.len() - 1
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    /// `coeffs` is dense over the variables added so far (shorter rows are
    /// zero-padded).
    pub fn add_constraint(&mut self, coeffs: Vec<f64>, rel: Relation, rhs: f64) {
        assert!(coeffs.len() <= self.vars.len(), "constraint references unknown variables");
        self.rows.push((coeffs, rel, rhs));
    }

    pub fn to_standard(&self) -> LpProblem {
        let mut col_of = Vec::with_capacity(self.vars.len());
        let mut objective = Vec::new();
        for &(bound, cost) in &self.vars {
            col_of.push(objective.len());
            objective.push(cost);
            if bound == VarBound::Free {
                objective.push(-cost);
            }
        }
        let structural = objective.len();
        let slacks = self.rows.iter().filter(|r| r.1 != Relation::Eq).count();
        objective.extend(std::iter::repeat(0.0).take(slacks));
        let width = objective.len();

        let mut constraints = Vec::with_capacity(self.rows.len());
        let mut rhs = Vec::with_capacity(self.rows.len());
        let mut slack = structural;
        for (coeffs, rel, b) in &self.rows {
            let mut row = vec![0.0; width];
            for (v, &a) in coeffs.iter().enumerate() {
                row[col_of[v]] = a;
                if self.vars[v].0 == VarBound::Free {
                    row[col_of[v] + 1] = -a;
                }
            }
            match rel {
                Relation::Le => {
                    row[slack] = 1.0;
                    slack += 1;
                }
                Relation::Ge => {
                    row[slack] = -1.0;
                    slack += 1;
                }
                Relation::Eq => {}
            }
            constraints.push(row);
            rhs.push(*b);
        }
        LpProblem {
            objective,
            constraints,
            rhs,
        }
    }

    pub fn solve(&self) -> Result<BuiltSolution, LpError> {
        let std = self.to_standard();
        let sol = solve_lp(&std)?;
        let mut values = Vec::with_capacity(self.vars.len());
        let mut col = 0;
        for &(bound, _) in &self.vars {
            match bound {
                VarBound::NonNegative => {
                    values.push(sol.x[col]);
                    col += 1;
                }
                VarBound::Free => {
                    values.push(sol.x[col] - sol.x[col + 1]);
                    col += 2;
                }
            }
        }
        Ok(BuiltSolution {
            status: sol.status,
            value: sol.value,
            values,
            duals: sol.dual.clone(),
            standard: sol,
        })
    }
}

/// Max-norm residual `|A x - b|_inf` of a standard-form point.
pub fn feasibility_residual(p: &LpProblem, x: &[f64]) -> f64 {
    p.constraints
        .iter()
        .zip(&p.rhs)
        .map(|(row, b)| (row.iter().zip(x).map(|(a, v)| a * v).sum::<f64>() - b).abs())
        .fold(0.0, f64::max)
}

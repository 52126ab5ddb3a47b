//! Dense matrices and the simplex solver behind margin and hard-core
//! computations.

pub mod lp;
mod matrix;

pub use lp::{
    solve_lp, BuiltSolution, LpBuilder, LpError, LpProblem, LpSolution, LpStatus, Relation,
    SimplexOptions, VarBound,
};
pub use matrix::{BoostMatrix, MatrixError};

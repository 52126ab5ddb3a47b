//! Shrinkage boosting as coordinate descent over a fixed hypothesis matrix.
//!
//! The crate covers the loss class (exponential, logistic), four step-size
//! rules with shrinkage, the boosting loop and its trace, exact optimal
//! margins and hard-core decompositions via a dense simplex solver, and
//! evaluators for the rate and margin bounds the iterates must obey.

pub mod engine;
pub mod hardcore;
pub mod instances;
pub mod linalg;
pub mod loss;
pub mod margins;
pub mod steps;
pub mod theory;
pub mod trace;

pub use engine::{run, run_with_loss, select_column, RunConfig, Termination};
pub use hardcore::{compute_hardcore, verify_hardcore, HardCore};
pub use linalg::BoostMatrix;
pub use loss::{Loss, LossSpec};
pub use margins::{margin_fraction_below, margin_report, min_margin, optimal_margin, MarginReport};
pub use steps::{StepContext, StepKind, StepRule};
pub use theory::{upsilon, BoundReport, BoundStatus};
pub use trace::{IterRecord, IterateTrace};

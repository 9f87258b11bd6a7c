//! Best-response equilibrium verification, structural and empirical
//! stability detection, and the parameter-regime oracle.

mod nash;
mod regime;
mod stability;

pub use nash::{verify_nash, NashMode, NashVerdict, NashWitness};
pub use regime::{regime_oracle, Existence, RegimeAnswer};
pub use stability::{
    check_stability_consequences, check_structural_stability, empirical_stability,
    ConsequenceAudit, EmpiricalStability, StabilityVerdict,
};

use thiserror::Error;

#[derive(Error, Debug, PartialEq, Eq)]
pub enum AnalysisError {
    #[error("action budget exhausted after {actions_examined} candidate actions")]
    BudgetExceeded { actions_examined: u64 },
    #[error("edge history covers {have} rounds, the window needs {need}")]
    HistoryTooShort { have: usize, need: usize },
}

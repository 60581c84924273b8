//! Defender strategies for green security games with two kinds of patrol
//! resources: divisible ranger effort and indivisible villager patrols.
//!
//! The crate is `no_std` (it needs `alloc`). Solvers:
//!
//! * [`tdbs::solve_tdbs`]: per-target binary search over the attacked
//!   target's resources, with an additive error bound.
//! * [`waterfill::solve_hw`]: hybrid waterfilling, exact for the
//!   uniform-effectiveness model.
//! * [`oracle::solve_oracle`]: exhaustive reference solver for small
//!   instances.

#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod error;
pub mod feasibility;
pub mod model;
pub mod oracle;
pub mod tdbs;
pub mod waterfill;

pub use error::{Error, Result, Violation};
pub use feasibility::{
    check_consistent, check_consistent_ts, min_valid_coverage, total_wasted_coverage, FeasibilityAnswer,
    FeasibilityCheck, FeasibilityQuery, TargetSpecificInstance,
};
pub use model::{
    best_response, compute_coverage, evaluate_profile, target_utilities, validate_profile, BestResponse, Diagnostics,
    Game, Instance, Payoffs, SolveResult, StrategyProfile,
};
pub use oracle::{solve_oracle, solve_oracle_villager_specific, VillagerSpecificInstance, VillagerSpecificSolution};
pub use tdbs::{solve_tdbs, TdbsConfig};
pub use waterfill::{hw_subproblem, solve_hw, SwapCandidate, WaterfillState};

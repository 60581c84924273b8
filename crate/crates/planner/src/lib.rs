//! Batch planning on top of `patrol-core`: seeded instance generation and
//! runtime benchmarks, JSON instance and result files, the case-study
//! analyses (budget sweep, baseline comparison, terrain adjustment) and the
//! `patrol` command-line front end.

pub mod analysis;
pub mod bench;
pub mod cli;
pub mod error;
pub mod io;

pub use analysis::{
    budget_sweep, compare_settings, compare_with_baseline, effectiveness_grid, tally_changes, terrain_adjust,
    BudgetSweepRow, Comparison, Costs, SettingComparison, TargetTally,
};
pub use bench::{generate_instance, run_benchmark, Algorithm, BenchConfig, BenchReport, BenchRow, GenParams};
pub use error::{PlannerError, Result};
pub use io::{
    load_instance, load_result, save_instance, save_result, PlannerGame, ResultFile, ScenarioInstance, SlopeClass,
};

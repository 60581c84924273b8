//! Case-study analyses: spending an extra recruiting budget, comparing the
//! optimum against a current patrol plan, and terrain-dependent
//! effectiveness.

use patrol_core::{compute_coverage, evaluate_profile, SolveResult, TargetSpecificInstance};
use serde::{Deserialize, Serialize};

use crate::bench::Algorithm;
use crate::error::{PlannerError, Result};
use crate::io::{ScenarioInstance, SlopeClass};

/// Coverage changes smaller than this count as unchanged in tallies.
pub const CHANGE_TOLERANCE: f64 = 1e-9;
pub const TERRAIN_SHIFT: f64 = 0.1;
pub const TERRAIN_CLAMP: (f64, f64) = (0.01, 0.99);

/// Recruiting cost of one ranger and one villager, in budget units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Costs {
    pub ranger: f64,
    pub villager: f64,
}

impl Default for Costs {
    fn default() -> Self {
        Costs { ranger: 3.0, villager: 1.0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetSweepRow {
    pub extra_budget: u32,
    pub rangers_added: u32,
    pub villagers_added: u32,
    pub defender_utility: f64,
}

/// Every way to spend `budget` on whole rangers and villagers, leaving less
/// than one villager's cost unspent.
pub fn splits(budget: u32, costs: Costs) -> Vec<(u32, u32)> {
    let b = f64::from(budget);
    (0u32..)
        .map_while(|k| {
            let left = b - costs.ranger * f64::from(k);
            (left >= 0.0).then(|| (k, (left / costs.villager).floor() as u32))
        })
        .collect()
}

/// For each extra budget `0..=max_extra`, the best split into new rangers
/// and villagers. Ties go to the split with fewer rangers.
pub fn budget_sweep(
    scenario: &ScenarioInstance,
    costs: Costs,
    max_extra: u32,
    algorithm: Algorithm,
    epsilon: f64,
) -> Result<Vec<BudgetSweepRow>> {
    if !(costs.ranger > 0.0 && costs.villager > 0.0 && costs.ranger.is_finite() && costs.villager.is_finite()) {
        return Err(PlannerError::invalid("recruiting costs must be positive and finite"));
    }
    let base = &scenario.instance;
    let mut rows = Vec::with_capacity(max_extra as usize + 1);
    for budget in 0..=max_extra {
        let mut best: Option<BudgetSweepRow> = None;
        for (rangers, villagers) in splits(budget, costs) {
            let grown = ScenarioInstance {
                instance: base
                    .with_budgets(base.ranger_budget() + f64::from(rangers), base.villager_budget() + villagers)?,
                ..scenario.clone()
            };
            let utility = grown.game()?.solve(algorithm, epsilon)?.defender_utility;
            if best.map_or(true, |b| utility > b.defender_utility) {
                best = Some(BudgetSweepRow {
                    extra_budget: budget,
                    rangers_added: rangers,
                    villagers_added: villagers,
                    defender_utility: utility,
                });
            }
        }
        rows.push(best.expect("the empty split is always available"));
    }
    Ok(rows)
}

/// The optimum against the scenario's baseline profile.
#[derive(Debug, Clone, PartialEq)]
pub struct Comparison {
    pub optimal: SolveResult,
    pub baseline: SolveResult,
    pub optimal_coverage: Vec<f64>,
    pub baseline_coverage: Vec<f64>,
    /// Optimal minus baseline coverage, per target.
    pub coverage_delta: Vec<f64>,
    /// Gain relative to `|u_base|`, or the absolute gain when `u_base = 0`.
    pub improvement: f64,
    pub relative: bool,
}

pub fn compare_with_baseline(scenario: &ScenarioInstance, algorithm: Algorithm, epsilon: f64) -> Result<Comparison> {
    let profile = scenario.baseline.as_ref().ok_or(PlannerError::MissingBaseline)?;
    let game = scenario.game()?;
    let baseline = evaluate_profile(&game, profile)?;
    let optimal = game.solve(algorithm, epsilon)?;
    let optimal_coverage = compute_coverage(&game, &optimal.profile)?;
    let baseline_coverage = compute_coverage(&game, profile)?;
    let coverage_delta = optimal_coverage.iter().zip(&baseline_coverage).map(|(o, b)| o - b).collect();
    let gain = optimal.defender_utility - baseline.defender_utility;
    let relative = baseline.defender_utility != 0.0;
    let improvement = if relative { gain / baseline.defender_utility.abs() } else { gain };
    Ok(Comparison { optimal, baseline, optimal_coverage, baseline_coverage, coverage_delta, improvement, relative })
}

/// All `(e_p, e_v)` in `{0.1, ..., 0.9}^2` with `e_p >= e_v`.
pub fn effectiveness_grid() -> Vec<(f64, f64)> {
    (1..=9u32).flat_map(|p| (1..=p).map(move |v| (f64::from(p) / 10.0, f64::from(v) / 10.0))).collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SettingComparison {
    pub e_p: f64,
    pub e_v: f64,
    pub comparison: Comparison,
}

/// Compares against the baseline at every listed setting, optionally with
/// the terrain shifts applied on top.
pub fn compare_settings(
    scenario: &ScenarioInstance,
    settings: &[(f64, f64)],
    terrain: bool,
    algorithm: Algorithm,
    epsilon: f64,
) -> Result<Vec<SettingComparison>> {
    settings
        .iter()
        .map(|&(e_p, e_v)| {
            let adjusted =
                if terrain { terrain_scenario(scenario, e_p, e_v)? } else { scenario.with_effectiveness(e_p, e_v)? };
            let comparison = compare_with_baseline(&adjusted, algorithm, epsilon)?;
            Ok(SettingComparison { e_p, e_v, comparison })
        })
        .collect()
}

/// How many settings raise, lower or keep the coverage of one target.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetTally {
    pub target: usize,
    pub increase: usize,
    pub decrease: usize,
    pub unchanged: usize,
}

pub fn tally_changes(settings: &[SettingComparison]) -> Vec<TargetTally> {
    let n = settings.first().map_or(0, |s| s.comparison.coverage_delta.len());
    (0..n)
        .map(|target| {
            let mut tally = TargetTally { target, increase: 0, decrease: 0, unchanged: 0 };
            for s in settings {
                let d = s.comparison.coverage_delta[target];
                if d > CHANGE_TOLERANCE {
                    tally.increase += 1;
                } else if d < -CHANGE_TOLERANCE {
                    tally.decrease += 1;
                } else {
                    tally.unchanged += 1;
                }
            }
            tally
        })
        .collect()
}

/// Effectiveness on a target of the given slope class.
pub fn shifted(effectiveness: f64, class: SlopeClass) -> f64 {
    let shift = match class {
        SlopeClass::High => TERRAIN_SHIFT,
        SlopeClass::Average => 0.0,
        SlopeClass::Low => -TERRAIN_SHIFT,
    };
    (effectiveness + shift).clamp(TERRAIN_CLAMP.0, TERRAIN_CLAMP.1)
}

/// The scenario with `(e_p, e_v)` shifted per target by slope class.
pub fn terrain_scenario(scenario: &ScenarioInstance, e_p: f64, e_v: f64) -> Result<ScenarioInstance> {
    let classes = scenario.slope_class.as_ref().ok_or(PlannerError::MissingSlopeClasses)?;
    let ranger: Vec<f64> = classes.iter().map(|&c| shifted(e_p, c)).collect();
    let villager: Vec<f64> = classes.iter().map(|&c| shifted(e_v, c)).collect();
    let top = |v: &[f64]| v.iter().copied().fold(f64::NAN, f64::max);
    Ok(ScenarioInstance {
        instance: scenario.instance.with_effectiveness(top(&ranger), top(&villager))?,
        ranger_effectiveness: Some(ranger),
        villager_effectiveness: Some(villager),
        ..scenario.clone()
    })
}

/// Target-specific game for `(e_p, e_v)` shifted by slope class.
pub fn terrain_adjust(scenario: &ScenarioInstance, e_p: f64, e_v: f64) -> Result<TargetSpecificInstance> {
    let adjusted = terrain_scenario(scenario, e_p, e_v)?;
    let villager = adjusted.villager_effectiveness.expect("set above");
    let ranger = adjusted.ranger_effectiveness.expect("set above");
    Ok(TargetSpecificInstance::new(adjusted.instance, villager)?.with_ranger_effectiveness(ranger)?)
}

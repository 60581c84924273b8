use std::path::PathBuf;

use patrol_core::{solve_oracle, Game, StrategyProfile};
use patrol_planner::analysis::{
    budget_sweep, compare_settings, compare_with_baseline, effectiveness_grid, splits, tally_changes, terrain_adjust,
    Costs,
};
use patrol_planner::bench::{generate_instance, Algorithm, GenParams};
use patrol_planner::io::{load_instance, ScenarioInstance};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn table1() -> ScenarioInstance {
    load_instance(PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/table1_scenario.json")).unwrap()
}

/// Random profile within the budgets.
fn random_baseline(s: &ScenarioInstance, seed: u64) -> StrategyProfile {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n = s.n();
    let weights: Vec<f64> = (0..n).map(|_| rng.gen::<f64>()).collect();
    let total: f64 = weights.iter().sum::<f64>().max(1e-12);
    let spend = rng.gen::<f64>() * s.instance.ranger_budget() * 0.999;
    let mut villagers = vec![0; n];
    for _ in 0..rng.gen_range(0..=s.instance.villager_budget()) {
        villagers[rng.gen_range(0..n)] += 1;
    }
    StrategyProfile::new(weights.iter().map(|w| w / total * spend).collect(), villagers)
}

#[test]
fn sweep_matches_brute_force_over_splits() {
    let s = ScenarioInstance::plain(generate_instance(&GenParams::new(4, 1.0, 1, 9)).unwrap());
    let rows = budget_sweep(&s, Costs::default(), 7, Algorithm::Hw, 1e-3).unwrap();
    assert_eq!(rows.len(), 8);
    for row in &rows {
        let best = splits(row.extra_budget, Costs::default())
            .into_iter()
            .map(|(k, v)| {
                let inst = s.instance.with_budgets(1.0 + f64::from(k), 1 + v).unwrap();
                solve_oracle(&inst).unwrap().defender_utility
            })
            .fold(f64::NEG_INFINITY, f64::max);
        assert!(
            (row.defender_utility - best).abs() < 1e-6,
            "budget {}: {} vs {best}",
            row.extra_budget,
            row.defender_utility
        );
        assert!(3 * row.rangers_added + row.villagers_added <= row.extra_budget);
    }
}

#[test]
fn case_study_sweep_is_monotone_with_terrain() {
    let s = table1();
    let adjusted = patrol_planner::analysis::terrain_scenario(&s, 0.6, 0.4).unwrap();
    let rows = budget_sweep(&adjusted, Costs::default(), 12, Algorithm::Tdbs, 1e-6).unwrap();
    let bound = patrol_core::TdbsConfig::for_instance(&adjusted.instance).with_epsilon(1e-6).error_bound(1.0);
    for w in rows.windows(2) {
        assert!(w[1].defender_utility >= w[0].defender_utility - bound, "{w:?}");
    }
}

#[test]
fn terrain_game_follows_slope_classes() {
    let s = table1();
    let ts = terrain_adjust(&s, 0.5, 0.3).unwrap();
    let classes = s.slope_class.as_ref().unwrap();
    for (i, class) in classes.iter().enumerate() {
        let expected = patrol_planner::analysis::shifted(0.3, *class);
        assert_eq!(ts.villager_effectiveness_at(i), expected);
        assert_eq!(ts.ranger_effectiveness_at(i), patrol_planner::analysis::shifted(0.5, *class));
    }
}

#[test]
fn tally_counts_every_setting() {
    let s = table1();
    let grid = effectiveness_grid();
    let compared = compare_settings(&s, &grid[..6], false, Algorithm::Hw, 1e-3).unwrap();
    let tally = tally_changes(&compared);
    assert_eq!(tally.len(), 21);
    assert!(tally.iter().all(|t| t.increase + t.decrease + t.unchanged == 6));
    let terrain = compare_settings(&s, &grid[..3], true, Algorithm::Tdbs, 1e-3).unwrap();
    assert!(terrain
        .iter()
        .all(|c| c.comparison.optimal.defender_utility + 1e-2 >= c.comparison.baseline.defender_utility));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn optimum_dominates_any_baseline(n in 1usize..7, rp in 0.0..4.0f64, rv in 0u32..4, seed in any::<u64>()) {
        let mut s = ScenarioInstance::plain(generate_instance(&GenParams::new(n, rp, rv, seed)).unwrap());
        s.baseline = Some(random_baseline(&s, seed ^ 0x5eed));
        let c = compare_with_baseline(&s, Algorithm::Hw, 1e-3).unwrap();
        prop_assert!(c.improvement >= 0.0, "improvement {}", c.improvement);
        prop_assert!(c.optimal.defender_utility >= c.baseline.defender_utility);
        for i in 0..n {
            prop_assert_eq!(c.coverage_delta[i], c.optimal_coverage[i] - c.baseline_coverage[i]);
        }
    }

    #[test]
    fn sweep_is_nondecreasing(n in 1usize..8, rp in 0.0..3.0f64, rv in 0u32..3, seed in any::<u64>(), cr in 1u32..5) {
        let s = ScenarioInstance::plain(generate_instance(&GenParams::new(n, rp, rv, seed)).unwrap());
        let costs = Costs { ranger: f64::from(cr), villager: 1.0 };
        let rows = budget_sweep(&s, costs, 8, Algorithm::Hw, 1e-3).unwrap();
        // Equal optima reached through different placements may differ in
        // the last bits.
        for w in rows.windows(2) {
            prop_assert!(w[1].defender_utility >= w[0].defender_utility - 1e-9, "{:?}", w);
        }
    }
}

mod common;

use common::{arb_instance, arb_mixed_instance, for_each_placement};
use patrol_core::model::TIE_TOLERANCE;
use patrol_core::{
    check_consistent, check_consistent_ts, compute_coverage, target_utilities, validate_profile, FeasibilityAnswer,
    FeasibilityQuery, Game, Instance, TargetSpecificInstance,
};
use proptest::prelude::*;

const MARGIN: f64 = 1e-9;

/// Exhaustive answer: over all placements of the spare villagers, the
/// smallest excess of required ranger effort over what is left. Negative
/// means feasible. `None` when some penalty already exceeds the level.
fn brute_slack<G: Game>(game: &G, q: &FeasibilityQuery) -> Option<f64> {
    let inst = game.instance();
    let n = inst.n();
    let c = game.coverage_at(q.target, q.effort, q.villagers);
    let (_, level) = target_utilities(inst, c, q.target).unwrap();
    let mut penalty_gap = f64::NEG_INFINITY;
    for j in 0..n {
        penalty_gap = penalty_gap.max(inst.attacker_penalty(j) - level);
    }
    if penalty_gap > MARGIN {
        return None;
    }
    let available = inst.ranger_budget() - q.effort;
    let mut best = f64::INFINITY;
    for_each_placement(n, inst.villager_budget() - q.villagers, Some(q.target), &mut |v| {
        let mut need = 0.0;
        for j in (0..n).filter(|&j| j != q.target) {
            let spread = inst.attacker_reward(j) - inst.attacker_penalty(j);
            let cmin = if spread > 0.0 { ((inst.attacker_reward(j) - level) / spread).clamp(0.0, 1.0) } else { 0.0 };
            let gap = cmin - game.villager_effectiveness_at(j) * f64::from(v[j]);
            need += gap.max(0.0) / game.ranger_effectiveness_at(j);
        }
        best = best.min(need - available);
    });
    Some(best.max(penalty_gap))
}

fn assert_agrees(answer: &FeasibilityAnswer, slack: Option<f64>) -> Result<(), TestCaseError> {
    match slack {
        None => prop_assert!(!answer.feasible),
        Some(s) if s < -MARGIN => prop_assert!(answer.feasible, "slack {s}"),
        Some(s) if s > MARGIN => prop_assert!(!answer.feasible, "slack {s}"),
        Some(_) => {}
    }
    Ok(())
}

fn assert_sound<G: Game>(game: &G, q: &FeasibilityQuery, answer: &FeasibilityAnswer) -> Result<(), TestCaseError> {
    let inst = game.instance();
    prop_assert_eq!(answer.feasible, answer.witness.is_some());
    let Some(w) = &answer.witness else { return Ok(()) };
    prop_assert!(validate_profile(inst, w).is_empty(), "{:?}", validate_profile(inst, w));
    prop_assert_eq!(w.efforts[q.target], q.effort);
    prop_assert_eq!(w.villagers[q.target], q.villagers);
    let c = compute_coverage(game, w).unwrap();
    let ua: Vec<f64> = (0..inst.n()).map(|i| target_utilities(inst, c[i], i).unwrap().1).collect();
    let top = ua.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    prop_assert!(ua[q.target] >= top - TIE_TOLERANCE, "target {} at {} below {}", q.target, ua[q.target], top);
    Ok(())
}

fn query_for(inst: &Instance, target: usize, effort_frac: f64, villager_frac: f64) -> FeasibilityQuery {
    let target = target % inst.n();
    let villagers = (villager_frac * f64::from(inst.villager_budget())).round() as u32;
    FeasibilityQuery::new(target, effort_frac * inst.ranger_budget(), villagers)
}

fn arb_ts() -> impl Strategy<Value = TargetSpecificInstance> {
    arb_instance(3, 3.0, 3).prop_flat_map(|inst| {
        let n = inst.n();
        (Just(inst), prop::collection::vec(0.05..=1.0f64, n))
            .prop_map(|(inst, ev)| TargetSpecificInstance::new(inst, ev).unwrap())
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(400))]

    #[test]
    fn witness_is_valid_and_attacked(inst in arb_mixed_instance(5, 4.0, 4), t in 0usize..5, pf in 0.0..=1.0f64, vf in 0.0..=1.0f64) {
        let q = query_for(&inst, t, pf, vf);
        let answer = check_consistent(&inst, &q).unwrap();
        assert_sound(&inst, &q, &answer)?;
    }

    #[test]
    fn agrees_with_exhaustive_search(inst in arb_mixed_instance(3, 3.0, 2), t in 0usize..3, k in 0u32..=4, vf in 0.0..=1.0f64) {
        let q = query_for(&inst, t, f64::from(k) / 4.0, vf);
        let answer = check_consistent(&inst, &q).unwrap();
        assert_agrees(&answer, brute_slack(&inst, &q))?;
    }

    #[test]
    fn fewer_resources_stay_feasible(inst in arb_mixed_instance(5, 4.0, 4), t in 0usize..5, pf in 0.0..=1.0f64, vf in 0.0..=1.0f64) {
        let q = query_for(&inst, t, pf, vf);
        if check_consistent(&inst, &q).unwrap().feasible {
            for v in 0..=q.villagers {
                for scale in [0.0, 0.5, 0.9, 1.0] {
                    let smaller = FeasibilityQuery::new(q.target, q.effort * scale, v);
                    prop_assert!(check_consistent(&inst, &smaller).unwrap().feasible, "{:?} -> {:?}", q, smaller);
                }
            }
        }
    }

    #[test]
    fn effort_converts_to_villagers(inst in arb_mixed_instance(5, 4.0, 4), t in 0usize..5, pf in 0.0..=1.0f64, vf in 0.0..=1.0f64) {
        let q = query_for(&inst, t, pf, vf);
        if check_consistent(&inst, &q).unwrap().feasible {
            let per_villager = inst.villager_effectiveness() / inst.ranger_effectiveness();
            for k in 1..=(inst.villager_budget() - q.villagers) {
                let effort = q.effort - f64::from(k) * per_villager;
                if effort < 0.0 {
                    break;
                }
                let swapped = FeasibilityQuery::new(q.target, effort, q.villagers + k);
                prop_assert!(check_consistent(&inst, &swapped).unwrap().feasible, "{:?} -> {:?}", q, swapped);
            }
        }
    }

    #[test]
    fn target_specific_reduces_to_uniform(inst in arb_mixed_instance(5, 4.0, 4), t in 0usize..5, pf in 0.0..=1.0f64, vf in 0.0..=1.0f64) {
        let q = query_for(&inst, t, pf, vf);
        let ts = TargetSpecificInstance::uniform(inst.clone());
        let base = check_consistent(&inst, &q).unwrap();
        let general = check_consistent_ts(&ts, &q).unwrap();
        if base.feasible != general.feasible {
            // Only allowed right at the boundary.
            let slack = brute_slack(&inst, &q);
            prop_assert!(slack.is_some_and(|s| s.abs() <= MARGIN), "slack {:?}", slack);
        }
    }

    #[test]
    fn target_specific_is_sound(ts in arb_ts(), t in 0usize..3, pf in 0.0..=1.0f64, vf in 0.0..=1.0f64) {
        let q = query_for(ts.base(), t, pf, vf);
        let answer = check_consistent_ts(&ts, &q).unwrap();
        assert_sound(&ts, &q, &answer)?;
    }

    #[test]
    fn target_specific_agrees_with_exhaustive_search(ts in arb_ts(), t in 0usize..3, k in 0u32..=4, vf in 0.0..=1.0f64) {
        let q = query_for(ts.base(), t, f64::from(k) / 4.0, vf);
        let answer = check_consistent_ts(&ts, &q).unwrap();
        assert_agrees(&answer, brute_slack(&ts, &q))?;
    }

    #[test]
    fn target_specific_with_ranger_vector_agrees(ts in arb_ts(), ep in prop::collection::vec(0.05..=1.0f64, 3), t in 0usize..3, k in 0u32..=4, vf in 0.0..=1.0f64) {
        let n = ts.base().n();
        let ts = ts.with_ranger_effectiveness(ep[..n].to_vec()).unwrap();
        let q = query_for(ts.base(), t, f64::from(k) / 4.0, vf);
        let answer = check_consistent_ts(&ts, &q).unwrap();
        assert_sound(&ts, &q, &answer)?;
        assert_agrees(&answer, brute_slack(&ts, &q))?;
    }
}

#[test]
fn symmetric_queries_match_enumeration() {
    let inst = Instance::new(patrol_core::Payoffs::uniform(2, (1.0, -1.0), (1.0, -1.0)), 1.0, 1, 0.5, 0.5).unwrap();
    for (effort, feasible) in [(0.0, true), (1.0, false)] {
        let q = FeasibilityQuery::new(0, effort, 1);
        let slack = brute_slack(&inst, &q).unwrap();
        assert_eq!(slack < 0.0 || slack.abs() < MARGIN, feasible);
        assert_eq!(check_consistent(&inst, &q).unwrap().feasible, feasible);
    }
}

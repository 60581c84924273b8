mod common;

use common::{arb_mixed_instance, for_each_placement};
use patrol_core::waterfill::{Step, LEVEL_TOLERANCE};
use patrol_core::{check_consistent, total_wasted_coverage, FeasibilityQuery, Instance, WaterfillState};
use proptest::prelude::*;

const TOL: f64 = 1e-9;

fn max_villagers(inst: &Instance, target: usize) -> Option<u32> {
    (0..=inst.villager_budget())
        .take_while(|&v| check_consistent(inst, &FeasibilityQuery::new(target, 0.0, v)).unwrap().feasible)
        .last()
}

/// Runs the subproblem for every attackable target, handing each state
/// snapshot (and the step that produced it) to `inspect`.
fn for_each_run(
    inst: &Instance,
    mut inspect: impl FnMut(&WaterfillState, &WaterfillState, Step) -> Result<(), TestCaseError>,
    mut finish: impl FnMut(&WaterfillState) -> Result<(), TestCaseError>,
) -> Result<(), TestCaseError> {
    for target in 0..inst.n() {
        let Some(v) = max_villagers(inst, target) else { continue };
        let mut state = WaterfillState::new(inst, target, v).unwrap();
        state.greedy_villagers();
        let mut guard = 0;
        loop {
            let before = state.clone();
            let step = state.step().unwrap();
            inspect(&before, &state, step)?;
            if matches!(step, Step::Done | Step::Blocked) {
                break;
            }
            guard += 1;
            prop_assert!(guard < 10_000, "runaway waterfilling");
        }
        finish(&state)?;
    }
    Ok(())
}

fn check_snapshot(inst: &Instance, s: &WaterfillState) -> Result<(), TestCaseError> {
    let n = inst.n();
    let ua = s.attacker_utility();
    let uav = s.villager_only_utility();
    for i in 0..n {
        prop_assert!(uav[i] >= ua[i] - TOL, "target {i}: villager-only {} below {}", uav[i], ua[i]);
    }
    let Some(sea) = s.sea_level() else { return Ok(()) };
    for i in (0..n).filter(|&i| s.efforts()[i] > 0.0 && !s.is_pinned(i)) {
        prop_assert!((ua[i] - sea).abs() <= TOL, "target {i} holds effort at {} off the sea {sea}", ua[i]);
    }
    // At most one wasted villager per target below the highest level
    // among the other targets.
    let star = s.target();
    let top_other = (0..n).filter(|&i| i != star && !s.is_pinned(i)).map(|i| ua[i]).fold(f64::NEG_INFINITY, f64::max);
    for i in (0..n).filter(|&i| i != star && s.villagers()[i] > 0 && ua[i] < top_other - LEVEL_TOLERANCE) {
        let spread = inst.attacker_spread(i);
        let without_last =
            inst.attacker_reward(i) - spread * inst.villager_effectiveness() * f64::from(s.villagers()[i] - 1);
        prop_assert!(without_last >= top_other - TOL, "target {i}: {without_last} < {top_other}");
    }
    let used: f64 = s.efforts().iter().sum();
    prop_assert!((used + s.rangers_remaining() - inst.ranger_budget()).abs() <= TOL);
    let villagers: u32 = s.villagers().iter().sum();
    prop_assert!(villagers + s.villagers_remaining() <= inst.villager_budget());
    Ok(())
}

fn check_swap(
    inst: &Instance,
    before: &WaterfillState,
    after: &WaterfillState,
    step: Step,
) -> Result<(), TestCaseError> {
    let Step::Swapped { level, swap } = step else { return Ok(()) };
    let (i, j) = (swap.outp, swap.outv);
    prop_assert!(inst.attacker_spread(j) > inst.attacker_spread(i));
    prop_assert!(before.villagers()[j] >= 1);
    prop_assert_eq!(before.efforts()[j], 0.0);
    prop_assert_eq!(after.villagers()[j], before.villagers()[j] - 1);
    prop_assert_eq!(after.villagers()[i], before.villagers()[i] + 1);
    prop_assert!((after.attacker_utility()[j] - level).abs() <= TOL);
    prop_assert_eq!(after.attacker_utility()[i], after.villager_only_utility()[i]);
    let critical = before.critical_set();
    for k in (0..inst.n()).filter(|&k| k != i && k != j) {
        let expected = if critical.contains(&k) { level } else { before.attacker_utility()[k] };
        prop_assert!((after.attacker_utility()[k] - expected).abs() <= TOL);
    }
    // The donor may land exactly on its penalty, which takes it out of the sea.
    let sea = (0..inst.n())
        .filter(|&k| k == j || !after.is_pinned(k))
        .map(|k| after.attacker_utility()[k])
        .fold(f64::NEG_INFINITY, f64::max);
    prop_assert!((sea - level).abs() <= TOL, "swap moved the sea from {level} to {sea}");
    Ok(())
}

fn check_waste(inst: &Instance, s: &WaterfillState) -> Result<(), TestCaseError> {
    let star = s.target();
    let level = s.attacker_utility()[star];
    if (0..inst.n()).any(|j| inst.attacker_penalty(j) > level) {
        return Ok(());
    }
    let v = s.villagers().to_vec();
    let waste = total_wasted_coverage(inst, &v, level, star).unwrap();

    // No single villager move reduces the waste.
    for a in (0..inst.n()).filter(|&a| a != star && v[a] > 0) {
        for b in (0..inst.n()).filter(|&b| b != star && b != a) {
            let mut moved = v.clone();
            moved[a] -= 1;
            moved[b] += 1;
            let other = total_wasted_coverage(inst, &moved, level, star).unwrap();
            prop_assert!(other >= waste - TOL, "moving {a}->{b} cuts waste {waste} to {other}");
        }
    }

    // Nor does any placement of the same number of villagers.
    let placed: u32 = v.iter().enumerate().filter(|&(i, _)| i != star).map(|(_, &k)| k).sum();
    let mut best = f64::INFINITY;
    for_each_placement(inst.n(), placed, Some(star), &mut |p| {
        if p.iter().sum::<u32>() == placed {
            let mut full = p.to_vec();
            full[star] = v[star];
            best = best.min(total_wasted_coverage(inst, &full, level, star).unwrap());
        }
    });
    prop_assert!(waste <= best + TOL, "waste {waste} above the minimum {best}");
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn snapshots_keep_invariants(inst in arb_mixed_instance(6, 6.0, 5)) {
        let n = inst.n() as u64;
        for_each_run(
            &inst,
            |before, after, step| {
                check_snapshot(&inst, after)?;
                check_swap(&inst, before, after, step)
            },
            |state| {
                prop_assert!(state.swaps() <= n * n, "{} swaps", state.swaps());
                Ok(())
            },
        )?;
    }

    #[test]
    fn final_placement_minimizes_waste(inst in arb_mixed_instance(4, 4.0, 3)) {
        for_each_run(&inst, |_, _, _| Ok(()), |state| check_waste(&inst, state))?;
    }
}

#[test]
fn seeded_instances_swap_and_keep_invariants() {
    // Larger seeded instances with plenty of villagers; at least some of
    // them must exercise swaps for the checks above to mean anything.
    let mut swaps = 0;
    for seed in 0..60 {
        let inst = common::random_instance(seed, 12, 4.0, 10);
        let outcome = for_each_run(
            &inst,
            |before, after, step| {
                check_snapshot(&inst, after)?;
                check_swap(&inst, before, after, step)
            },
            |state| {
                swaps += state.swaps();
                Ok(())
            },
        );
        if let Err(e) = outcome {
            panic!("seed {seed}: {e}");
        }
    }
    assert!(swaps > 0);
}

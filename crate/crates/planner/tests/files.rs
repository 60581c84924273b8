use std::path::PathBuf;

use patrol_core::{Game, StrategyProfile};
use patrol_planner::bench::{generate_instance, Algorithm, GenParams};
use patrol_planner::io::{
    load_instance, load_result, save_instance, save_result, ResultFile, ScenarioInstance, SlopeClass,
};
use patrol_planner::PlannerError;
use proptest::prelude::*;

fn table1() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/table1_scenario.json")
}

#[test]
fn bundled_case_study_parses() {
    let s = load_instance(table1()).unwrap();
    assert_eq!(s.n(), 21);
    let p = s.instance.payoffs();
    assert_eq!(p.attacker_reward[0], 6.83);
    assert_eq!(p.attacker_reward[12], 6.93);
    assert_eq!(p.attacker_reward[20], 5.70);
    for i in 0..21 {
        assert_eq!(p.defender_reward[i], 10.0);
        assert_eq!(p.attacker_penalty[i], -10.0);
        assert_eq!(p.defender_penalty[i], -p.attacker_reward[i]);
    }
    let baseline = s.baseline.as_ref().unwrap();
    assert!(baseline.total_effort() <= s.instance.ranger_budget());
    assert_eq!(baseline.total_villagers(), u64::from(s.instance.villager_budget()));
    assert_eq!(s.slope_class.as_ref().unwrap().len(), 21);
}

#[test]
fn solved_results_revalidate_on_load() {
    let dir = tempfile::tempdir().unwrap();
    let scenario = load_instance(table1()).unwrap();
    let game = scenario.game().unwrap();
    for algorithm in [Algorithm::Hw, Algorithm::Tdbs] {
        let result = game.solve(algorithm, 1e-3).unwrap();
        let path = dir.path().join(format!("{algorithm}.json"));
        save_result(&path, &ResultFile::new(&game, algorithm, &result).unwrap()).unwrap();
        let back = load_result(&path).unwrap();
        back.verify(&game).unwrap();
        assert_eq!(back.profile(), result.profile);
        assert_eq!(back.defender_utility, result.defender_utility);
    }
}

#[test]
fn tampered_result_is_rejected() {
    let scenario = load_instance(table1()).unwrap();
    let game = scenario.game().unwrap();
    let result = game.solve(Algorithm::Hw, 1e-3).unwrap();
    let mut file = ResultFile::new(&game, Algorithm::Hw, &result).unwrap();
    file.defender_utility += 1e-9;
    assert!(file.verify(&game).is_err());
    let mut file = ResultFile::new(&game, Algorithm::Hw, &result).unwrap();
    file.v[0] += 100;
    assert!(matches!(file.verify(&game), Err(PlannerError::Core(_))));
}

#[test]
fn missing_file_is_an_io_error() {
    assert!(matches!(load_instance("/nonexistent/instance.json"), Err(PlannerError::Io { .. })));
}

fn arb_scenario() -> impl Strategy<Value = ScenarioInstance> {
    (1usize..8, 0.0..20.0f64, 0u32..10, any::<u64>(), any::<bool>(), any::<bool>()).prop_map(
        |(n, rp, rv, seed, per_target, with_meta)| {
            let instance = generate_instance(&GenParams::new(n, rp, rv, seed)).unwrap();
            let mut s = ScenarioInstance::plain(instance);
            if per_target {
                let ev: Vec<f64> = (0..n).map(|i| (i as f64 + 1.0) / (n as f64 + 1.7)).collect();
                let top = ev.iter().copied().fold(0.0, f64::max);
                s.instance = s.instance.with_effectiveness(s.instance.ranger_effectiveness(), top).unwrap();
                s.villager_effectiveness = Some(ev);
            }
            if with_meta {
                let classes = [SlopeClass::High, SlopeClass::Average, SlopeClass::Low];
                s.slope_class = Some((0..n).map(|i| classes[i % 3]).collect());
                s.labels = Some((0..n).map(|i| format!("t{i}")).collect());
                s.baseline = Some(StrategyProfile::new(vec![rp / n as f64 / 3.0; n], vec![0; n]));
            }
            s
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn instances_round_trip_bit_exactly(s in arb_scenario()) {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("instance.json");
        save_instance(&path, &s).unwrap();
        let back = load_instance(&path).unwrap();
        let bits = |v: &[f64]| v.iter().map(|x| x.to_bits()).collect::<Vec<_>>();
        let (a, b) = (s.instance.payoffs(), back.instance.payoffs());
        prop_assert_eq!(bits(&a.attacker_reward), bits(&b.attacker_reward));
        prop_assert_eq!(bits(&a.defender_penalty), bits(&b.defender_penalty));
        prop_assert_eq!(s.instance.ranger_budget().to_bits(), back.instance.ranger_budget().to_bits());
        prop_assert_eq!(back, s);
    }

    #[test]
    fn results_round_trip_and_revalidate(s in arb_scenario()) {
        let dir = tempfile::tempdir().unwrap();
        let game = s.game().unwrap();
        let algorithm = if s.is_target_specific() { Algorithm::Tdbs } else { Algorithm::Hw };
        let result = game.solve(algorithm, 1e-3).unwrap();
        let path = dir.path().join("result.json");
        let file = ResultFile::new(&game, algorithm, &result).unwrap();
        save_result(&path, &file).unwrap();
        let back = load_result(&path).unwrap();
        prop_assert_eq!(&back, &file);
        back.verify(&game).unwrap();
        prop_assert_eq!(back.coverage.len(), game.instance().n());
    }
}

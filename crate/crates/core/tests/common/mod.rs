#![allow(dead_code)]

use patrol_core::{Instance, Payoffs};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Uniform payoffs in [0, 10) and (-10, 0], ranger effectiveness at least
/// villager effectiveness.
pub fn random_instance(seed: u64, n: usize, ranger_budget: f64, villager_budget: u32) -> Instance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |n: usize, sign: f64| -> Vec<f64> { (0..n).map(|_| sign * rng.gen_range(0.0..10.0)).collect() };
    let payoffs = Payoffs {
        defender_reward: draw(n, 1.0),
        defender_penalty: draw(n, -1.0),
        attacker_reward: draw(n, 1.0),
        attacker_penalty: draw(n, -1.0),
    };
    let (a, b): (f64, f64) = (rng.gen_range(0.05..1.0), rng.gen_range(0.05..1.0));
    Instance::new(payoffs, ranger_budget, villager_budget, a.max(b), a.min(b)).unwrap()
}

fn build(targets: Vec<(f64, f64, f64, f64)>, rp: f64, rv: u32, a: f64, b: f64) -> Instance {
    let payoffs = Payoffs {
        defender_reward: targets.iter().map(|t| t.0).collect(),
        defender_penalty: targets.iter().map(|t| t.1).collect(),
        attacker_reward: targets.iter().map(|t| t.2).collect(),
        attacker_penalty: targets.iter().map(|t| t.3).collect(),
    };
    Instance::new(payoffs, rp, rv, a.max(b), a.min(b)).unwrap()
}

/// Continuous payoffs and effectiveness.
pub fn arb_instance(max_n: usize, max_rp: f64, max_rv: u32) -> impl Strategy<Value = Instance> {
    (1..=max_n)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec((0.0..10.0f64, -10.0..=0.0f64, 0.0..10.0f64, -10.0..=0.0f64), n),
                0.0..=max_rp,
                0..=max_rv,
                0.05..=1.0f64,
                0.05..=1.0f64,
            )
        })
        .prop_map(|(t, rp, rv, a, b)| build(t, rp, rv, a, b))
}

/// Small integer payoffs and dyadic effectiveness, so that utilities tie
/// exactly and levels coincide far more often than with continuous draws.
pub fn arb_grid_instance(max_n: usize, max_rv: u32) -> impl Strategy<Value = Instance> {
    let payoff = || (0..=4i32).prop_map(f64::from);
    let effectiveness = prop::sample::select(vec![0.25, 0.5, 0.75, 1.0]);
    (1..=max_n)
        .prop_flat_map(move |n| {
            (
                prop::collection::vec((payoff(), payoff(), payoff(), payoff()), n),
                (0..=8u32).prop_map(|k| f64::from(k) * 0.25),
                0..=max_rv,
                effectiveness.clone(),
                effectiveness.clone(),
            )
        })
        .prop_map(|(t, rp, rv, a, b)| {
            let t = t.into_iter().map(|(rd, pd, ra, pa)| (rd, -pd, ra, -pa)).collect();
            build(t, rp, rv, a, b)
        })
}

/// Either kind of instance.
pub fn arb_mixed_instance(max_n: usize, max_rp: f64, max_rv: u32) -> impl Strategy<Value = Instance> {
    prop_oneof![arb_instance(max_n, max_rp, max_rv), arb_grid_instance(max_n, max_rv)]
}

/// Calls `visit` with every placement of at most `budget` villagers on
/// `n` targets, skipping target `skip` (left at zero).
pub fn for_each_placement(n: usize, budget: u32, skip: Option<usize>, visit: &mut dyn FnMut(&[u32])) {
    fn rec(v: &mut Vec<u32>, pos: usize, left: u32, skip: Option<usize>, visit: &mut dyn FnMut(&[u32])) {
        if pos == v.len() {
            visit(v);
            return;
        }
        let top = if Some(pos) == skip { 0 } else { left };
        for k in 0..=top {
            v[pos] = k;
            rec(v, pos + 1, left - k, skip, visit);
        }
        v[pos] = 0;
    }
    rec(&mut vec![0; n], 0, budget, skip, visit);
}

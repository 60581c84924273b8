//! Exact reference solvers by exhaustive enumeration of villager placements.
//!
//! Once villagers are fixed, ranger effort is divisible and the best effort
//! on the attacked target can be found by bisection: every other target only
//! needs enough effort to bring it down to the attacked target's level.
//! This is exponential in the villager budget and meant for small instances.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::model::{
    attacker_utility_at, best_response, check_effectiveness, evaluate_profile, Diagnostics, Game, Instance,
    SolveResult, StrategyProfile,
};

/// Largest number of candidates an exhaustive solver will visit.
pub const ENUMERATION_CAP: u64 = 1_000_000;

const EFFORT_RESOLUTION: f64 = 1e-12;
const SLACK: f64 = 1e-12;

/// Number of placements of at most `budget` identical villagers on `n`
/// targets, or `None` once it exceeds `cap`.
pub fn placement_count(n: usize, budget: u32, cap: u64) -> Option<u64> {
    // C(n + budget, budget), built incrementally so it stays exact.
    let mut count: u128 = 1;
    for k in 1..=u128::from(budget) {
        count = count * (n as u128 + k) / k;
        if count > u128::from(cap) {
            return None;
        }
    }
    Some(count as u64)
}

pub fn solve_oracle<G: Game + ?Sized>(game: &G) -> Result<SolveResult> {
    solve_oracle_with_cap(game, ENUMERATION_CAP)
}

pub fn solve_oracle_with_cap<G: Game + ?Sized>(game: &G, cap: u64) -> Result<SolveResult> {
    let instance = game.instance();
    let n = instance.n();
    let budget = instance.villager_budget();
    placement_count(n, budget, cap).ok_or_else(|| Error::EnumerationCapExceeded {
        required: binomial(n as u128 + u128::from(budget), u128::from(budget)),
        cap,
    })?;

    let ranger_eff: Vec<f64> = (0..n).map(|i| game.ranger_effectiveness_at(i)).collect();
    let villager_eff: Vec<f64> = (0..n).map(|i| game.villager_effectiveness_at(i)).collect();
    let mut diagnostics = Diagnostics::new();
    let mut best: Option<SolveResult> = None;
    let mut placement = vec![0u32; n];
    let mut visit = |placement: &[u32]| -> Result<()> {
        diagnostics.bump("placements");
        let villager_cov: Vec<f64> = placement.iter().zip(&villager_eff).map(|(&v, e)| f64::from(v) * e).collect();
        for target in 0..n {
            let Some(efforts) = best_efforts(instance, &ranger_eff, &villager_cov, target) else { continue };
            let candidate = evaluate_profile(game, &StrategyProfile::new(efforts, placement.to_vec()))?;
            if best.as_ref().map_or(true, |b| candidate.defender_utility > b.defender_utility) {
                best = Some(candidate);
            }
        }
        Ok(())
    };
    for_each_placement(&mut placement, 0, budget, &mut visit)?;

    let mut result = best.ok_or(Error::NoFeasibleTarget)?;
    result.diagnostics = diagnostics;
    Ok(result)
}

fn for_each_placement(
    placement: &mut [u32],
    pos: usize,
    remaining: u32,
    visit: &mut dyn FnMut(&[u32]) -> Result<()>,
) -> Result<()> {
    if pos == placement.len() {
        return visit(placement);
    }
    for v in 0..=remaining {
        placement[pos] = v;
        for_each_placement(placement, pos + 1, remaining - v, visit)?;
    }
    placement[pos] = 0;
    Ok(())
}

fn binomial(n: u128, k: u128) -> u128 {
    (1..=k).fold(1u128, |acc, i| acc.saturating_mul(n + 1 - i) / i)
}

/// Ranger effort on every target other than `target` that holds each of
/// them at or below the attacked target's level, given effort `effort` on
/// it; `None` when some target cannot be held there at all.
fn fill(instance: &Instance, ranger_eff: &[f64], villager_cov: &[f64], target: usize, effort: f64) -> Option<Vec<f64>> {
    let coverage = (villager_cov[target] + ranger_eff[target] * effort).min(1.0);
    let level = attacker_utility_at(instance, target, coverage);
    let mut efforts = vec![0.0; instance.n()];
    efforts[target] = effort;
    for j in (0..instance.n()).filter(|&j| j != target) {
        let (reward, penalty) = (instance.attacker_reward(j), instance.attacker_penalty(j));
        if penalty > level + SLACK {
            return None;
        }
        let spread = reward - penalty;
        let needed = if spread > 0.0 { ((reward - level) / spread).clamp(0.0, 1.0) } else { 0.0 };
        efforts[j] = (needed - villager_cov[j]).max(0.0) / ranger_eff[j];
    }
    Some(efforts)
}

/// Profile with the most ranger effort on `target` that keeps it attacked.
fn best_efforts(instance: &Instance, ranger_eff: &[f64], villager_cov: &[f64], target: usize) -> Option<Vec<f64>> {
    let budget = instance.ranger_budget();
    let within = |effort: f64| {
        fill(instance, ranger_eff, villager_cov, target, effort).filter(|e| e.iter().sum::<f64>() <= budget + SLACK)
    };
    if let Some(full) = within(budget) {
        return Some(full);
    }
    let mut best = within(0.0)?;
    let (mut lo, mut hi) = (0.0f64, budget);
    while hi - lo > EFFORT_RESOLUTION {
        let mid = lo + (hi - lo) / 2.0;
        if mid <= lo || mid >= hi {
            break;
        }
        match within(mid) {
            Some(efforts) => {
                lo = mid;
                best = efforts;
            }
            None => hi = mid,
        }
    }
    Some(best)
}

/// Base instance whose villagers each have their own effectiveness, the
/// same on every target.
#[derive(Debug, Clone, PartialEq)]
pub struct VillagerSpecificInstance {
    base: Instance,
    villager_effectiveness: Vec<f64>,
}

impl VillagerSpecificInstance {
    /// One effectiveness per villager; the base villager budget must match.
    pub fn new(base: Instance, villager_effectiveness: Vec<f64>) -> Result<Self> {
        let budget = base.villager_budget() as usize;
        if villager_effectiveness.len() != budget {
            return Err(Error::DimensionMismatch {
                field: "villager_effectiveness",
                expected: budget,
                found: villager_effectiveness.len(),
            });
        }
        villager_effectiveness.iter().try_for_each(|&e| check_effectiveness("villager_effectiveness", e))?;
        Ok(VillagerSpecificInstance { base, villager_effectiveness })
    }

    pub fn base(&self) -> &Instance {
        &self.base
    }

    pub fn villager_effectiveness(&self) -> &[f64] {
        &self.villager_effectiveness
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VillagerSpecificSolution {
    /// Villager counts in the profile are per target.
    pub result: SolveResult,
    /// Target of each villager.
    pub assignment: Vec<usize>,
}

pub fn solve_oracle_villager_specific(vs: &VillagerSpecificInstance) -> Result<VillagerSpecificSolution> {
    solve_oracle_villager_specific_with_cap(vs, ENUMERATION_CAP)
}

pub fn solve_oracle_villager_specific_with_cap(
    vs: &VillagerSpecificInstance,
    cap: u64,
) -> Result<VillagerSpecificSolution> {
    let instance = &vs.base;
    let n = instance.n();
    let k = vs.villager_effectiveness.len();
    let required = (n as u128).checked_pow(k as u32).unwrap_or(u128::MAX);
    if required > u128::from(cap) {
        return Err(Error::EnumerationCapExceeded { required, cap });
    }

    let ranger_eff = vec![instance.ranger_effectiveness(); n];
    let mut diagnostics = Diagnostics::new();
    let mut best: Option<VillagerSpecificSolution> = None;
    let mut assignment = vec![0usize; k];
    loop {
        diagnostics.bump("assignments");
        let mut villager_cov = vec![0.0; n];
        let mut counts = vec![0u32; n];
        for (&t, e) in assignment.iter().zip(&vs.villager_effectiveness) {
            villager_cov[t] += e;
            counts[t] += 1;
        }
        for target in 0..n {
            let Some(efforts) = best_efforts(instance, &ranger_eff, &villager_cov, target) else { continue };
            let coverage: Vec<f64> = efforts
                .iter()
                .zip(&villager_cov)
                .map(|(p, c)| (c + instance.ranger_effectiveness() * p).min(1.0))
                .collect();
            let response = best_response(instance, &coverage)?;
            if best.as_ref().map_or(true, |b| response.defender_utility > b.result.defender_utility) {
                best = Some(VillagerSpecificSolution {
                    result: SolveResult {
                        profile: StrategyProfile::new(efforts, counts.clone()),
                        attacked: response.target,
                        defender_utility: response.defender_utility,
                        attacker_utility: response.attacker_utility,
                        diagnostics: Diagnostics::new(),
                    },
                    assignment: assignment.clone(),
                });
            }
        }
        // Odometer over assignments in base n.
        let mut pos = 0;
        while pos < k && assignment[pos] + 1 == n {
            assignment[pos] = 0;
            pos += 1;
        }
        if pos == k {
            break;
        }
        assignment[pos] += 1;
    }

    let mut solution = best.ok_or(Error::NoFeasibleTarget)?;
    solution.result.diagnostics = diagnostics;
    Ok(solution)
}

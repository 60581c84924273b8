//! Can a given target be made the attacker's best response once the
//! defender's effort and villagers on it are fixed?
//!
//! Both checks fill the other targets greedily: villagers first, where their
//! coverage is fully used, then the leftover villagers where they save the
//! most ranger effort, and finally divisible ranger effort for whatever
//! coverage is still missing. A successful check always carries the profile
//! it built.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use crate::error::{Error, Result};
use crate::model::{attacker_utility_at, check_effectiveness, Game, Instance, StrategyProfile, BUDGET_TOLERANCE};

/// Slack on coverage comparisons at feasibility boundaries.
pub const FEASIBILITY_TOLERANCE: f64 = 1e-12;

/// Fixed effort and villagers on the target that should be attacked.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FeasibilityQuery {
    pub target: usize,
    pub effort: f64,
    pub villagers: u32,
}

impl FeasibilityQuery {
    pub fn new(target: usize, effort: f64, villagers: u32) -> Self {
        FeasibilityQuery { target, effort, villagers }
    }

    fn validate(&self, instance: &Instance) -> Result<()> {
        instance.check_target(self.target)?;
        if !self.effort.is_finite() || self.effort < 0.0 {
            return Err(Error::InvalidQuery("effort must be finite and nonnegative"));
        }
        if self.effort > instance.ranger_budget() + BUDGET_TOLERANCE {
            return Err(Error::InvalidQuery("effort exceeds the ranger budget"));
        }
        if self.villagers > instance.villager_budget() {
            return Err(Error::InvalidQuery("villagers exceed the villager budget"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeasibilityAnswer {
    pub feasible: bool,
    /// A valid profile attacking the queried target; present iff feasible.
    pub witness: Option<StrategyProfile>,
}

impl FeasibilityAnswer {
    fn infeasible() -> Self {
        FeasibilityAnswer { feasible: false, witness: None }
    }
}

/// Games whose consistency question has a polynomial greedy answer.
pub trait FeasibilityCheck: Game {
    fn check(&self, query: &FeasibilityQuery) -> Result<FeasibilityAnswer>;

    /// Whether swapping ranger effort on `target` for villagers covering the
    /// same amount can never make a feasible query infeasible. Holds when a
    /// villager on `target` is worth at least as much ranger effort as a
    /// villager anywhere else.
    fn villagers_substitute_effort(&self, target: usize) -> bool {
        let ratio = |i| self.villager_effectiveness_at(i) / self.ranger_effectiveness_at(i);
        let own = ratio(target);
        (0..self.instance().n()).all(|j| ratio(j) <= own)
    }
}

impl FeasibilityCheck for Instance {
    fn check(&self, query: &FeasibilityQuery) -> Result<FeasibilityAnswer> {
        check_consistent(self, query)
    }
}

/// Smallest coverage on target `i` that keeps its attacker utility at or
/// below `level`; `None` when even full coverage is not enough.
pub fn min_valid_coverage(instance: &Instance, i: usize, level: f64) -> Option<f64> {
    if level < instance.attacker_penalty(i) {
        return None;
    }
    Some(required_coverage(instance, i, level))
}

// Clamped form used once the penalty floor has been checked with tolerance.
#[inline]
pub(crate) fn required_coverage(instance: &Instance, i: usize, level: f64) -> f64 {
    let spread = instance.attacker_spread(i);
    if spread == 0.0 {
        // Reward and penalty are both zero: any coverage gives utility 0.
        return 0.0;
    }
    ((instance.attacker_reward(i) - level) / spread).clamp(0.0, 1.0)
}

/// Villager coverage beyond what the other targets need at `level`.
pub fn total_wasted_coverage(instance: &Instance, villagers: &[u32], level: f64, attacked: usize) -> Result<f64> {
    let n = instance.n();
    if villagers.len() != n {
        return Err(Error::DimensionMismatch { field: "villagers", expected: n, found: villagers.len() });
    }
    instance.check_target(attacked)?;
    let ev = instance.villager_effectiveness();
    let mut waste = 0.0;
    for (i, &v) in villagers.iter().enumerate() {
        if i == attacked {
            continue;
        }
        let needed = min_valid_coverage(instance, i, level).ok_or(Error::InfeasibleLevel { target: i, level })?;
        waste += (f64::from(v) * ev - needed).max(0.0);
    }
    Ok(waste)
}

/// Attacker utility on the queried target, or `None` when some target's
/// penalty already sits above it.
fn attacked_level<G: Game + ?Sized>(game: &G, query: &FeasibilityQuery) -> Option<f64> {
    let instance = game.instance();
    let coverage = game.coverage_at(query.target, query.effort, query.villagers);
    let level = attacker_utility_at(instance, query.target, coverage);
    let blocked = (0..instance.n()).any(|j| instance.attacker_penalty(j) > level + FEASIBILITY_TOLERANCE);
    (!blocked).then_some(level)
}

/// Greedy consistency check for uniform villager effectiveness.
pub fn check_consistent(instance: &Instance, query: &FeasibilityQuery) -> Result<FeasibilityAnswer> {
    query.validate(instance)?;
    let Some(level) = attacked_level(instance, query) else {
        return Ok(FeasibilityAnswer::infeasible());
    };

    let n = instance.n();
    let ev = instance.villager_effectiveness();
    let mut spare = instance.villager_budget() - query.villagers;
    let mut villagers = vec![0u32; n];
    let mut residual = vec![0.0f64; n];

    for j in (0..n).filter(|&j| j != query.target) {
        let needed = required_coverage(instance, j, level);
        let whole = libm::floor((needed + FEASIBILITY_TOLERANCE) / ev);
        let count = if whole >= f64::from(spare) { spare } else { whole as u32 };
        spare -= count;
        villagers[j] = count;
        residual[j] = (needed - f64::from(count) * ev).max(0.0);
    }

    if spare > 0 {
        let mut open: Vec<usize> = (0..n).filter(|&j| residual[j] > 0.0).collect();
        let take = open.len().min(spare as usize);
        if take > 0 {
            let by_residual = |a: &usize, b: &usize| residual[*b].total_cmp(&residual[*a]).then(a.cmp(b));
            if take < open.len() {
                open.select_nth_unstable_by(take - 1, by_residual);
            }
            for &j in &open[..take] {
                residual[j] = 0.0;
                villagers[j] += 1;
            }
        }
    }

    let needed: f64 = residual.iter().sum();
    let available = (instance.ranger_budget() - query.effort).max(0.0) * instance.ranger_effectiveness();
    if needed > available + FEASIBILITY_TOLERANCE {
        return Ok(FeasibilityAnswer::infeasible());
    }

    let ep = instance.ranger_effectiveness();
    let mut efforts: Vec<f64> = residual.iter().map(|r| r / ep).collect();
    efforts[query.target] = query.effort;
    villagers[query.target] = query.villagers;
    Ok(FeasibilityAnswer { feasible: true, witness: Some(StrategyProfile::new(efforts, villagers)) })
}

/// An instance whose villager (and optionally ranger) effectiveness depends
/// on the target.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetSpecificInstance {
    base: Instance,
    villager_effectiveness: Vec<f64>,
    ranger_effectiveness: Option<Vec<f64>>,
}

impl TargetSpecificInstance {
    pub fn new(base: Instance, villager_effectiveness: Vec<f64>) -> Result<Self> {
        check_vector(&base, "villager_effectiveness", &villager_effectiveness)?;
        Ok(TargetSpecificInstance { base, villager_effectiveness, ranger_effectiveness: None })
    }

    /// Replaces the scalar ranger effectiveness with a per-target vector.
    pub fn with_ranger_effectiveness(mut self, ranger_effectiveness: Vec<f64>) -> Result<Self> {
        check_vector(&self.base, "ranger_effectiveness", &ranger_effectiveness)?;
        self.ranger_effectiveness = Some(ranger_effectiveness);
        Ok(self)
    }

    /// Every target uses the base instance's scalar effectiveness.
    pub fn uniform(base: Instance) -> Self {
        let villager_effectiveness = vec![base.villager_effectiveness(); base.n()];
        TargetSpecificInstance { base, villager_effectiveness, ranger_effectiveness: None }
    }

    pub fn base(&self) -> &Instance {
        &self.base
    }

    pub fn villager_effectiveness(&self) -> &[f64] {
        &self.villager_effectiveness
    }

    pub fn ranger_effectiveness(&self) -> Option<&[f64]> {
        self.ranger_effectiveness.as_deref()
    }
}

fn check_vector(base: &Instance, field: &'static str, values: &[f64]) -> Result<()> {
    if values.len() != base.n() {
        return Err(Error::DimensionMismatch { field, expected: base.n(), found: values.len() });
    }
    values.iter().try_for_each(|&v| check_effectiveness(field, v))
}

impl Game for TargetSpecificInstance {
    fn instance(&self) -> &Instance {
        &self.base
    }

    fn ranger_effectiveness_at(&self, target: usize) -> f64 {
        match &self.ranger_effectiveness {
            Some(values) => values[target],
            None => self.base.ranger_effectiveness(),
        }
    }

    fn villager_effectiveness_at(&self, target: usize) -> f64 {
        self.villager_effectiveness[target]
    }
}

impl FeasibilityCheck for TargetSpecificInstance {
    fn check(&self, query: &FeasibilityQuery) -> Result<FeasibilityAnswer> {
        check_consistent_ts(self, query)
    }
}

// Heap entry: ranger effort one more villager would save on `target`.
#[derive(Debug, Clone, Copy)]
struct Saving {
    effort: f64,
    target: usize,
}

impl PartialEq for Saving {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Saving {}

impl PartialOrd for Saving {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Saving {
    fn cmp(&self, other: &Self) -> Ordering {
        // Max-heap on saving; lower index wins ties.
        self.effort.total_cmp(&other.effort).then(other.target.cmp(&self.target))
    }
}

/// Greedy consistency check when villager effectiveness varies by target.
///
/// Each spare villager goes to the target where it covers the most of the
/// still-missing coverage (measured in ranger effort it replaces); the rest
/// is left to rangers.
pub fn check_consistent_ts(game: &TargetSpecificInstance, query: &FeasibilityQuery) -> Result<FeasibilityAnswer> {
    let instance = game.instance();
    query.validate(instance)?;
    let Some(level) = attacked_level(game, query) else {
        return Ok(FeasibilityAnswer::infeasible());
    };

    let n = instance.n();
    let mut remaining = vec![0.0f64; n];
    let mut villagers = vec![0u32; n];
    let mut heap = BinaryHeap::with_capacity(n);
    let saving =
        |j: usize, remaining: f64| remaining.min(game.villager_effectiveness_at(j)) / game.ranger_effectiveness_at(j);
    for j in (0..n).filter(|&j| j != query.target) {
        remaining[j] = required_coverage(instance, j, level);
        let effort = saving(j, remaining[j]);
        if effort > 0.0 {
            heap.push(Saving { effort, target: j });
        }
    }

    let mut spare = instance.villager_budget() - query.villagers;
    while spare > 0 {
        let Some(Saving { target: j, .. }) = heap.pop() else { break };
        let covered = remaining[j].min(game.villager_effectiveness_at(j));
        remaining[j] -= covered;
        if remaining[j] < FEASIBILITY_TOLERANCE {
            remaining[j] = 0.0;
        }
        villagers[j] += 1;
        spare -= 1;
        let effort = saving(j, remaining[j]);
        if effort > 0.0 {
            heap.push(Saving { effort, target: j });
        }
    }

    let budget = (instance.ranger_budget() - query.effort).max(0.0);
    let feasible = match game.ranger_effectiveness() {
        None => {
            let needed: f64 = remaining.iter().sum();
            needed <= budget * instance.ranger_effectiveness() + FEASIBILITY_TOLERANCE
        }
        Some(ep) => {
            let needed: f64 = remaining.iter().zip(ep).map(|(r, e)| r / e).sum();
            needed <= budget + FEASIBILITY_TOLERANCE
        }
    };
    if !feasible {
        return Ok(FeasibilityAnswer::infeasible());
    }

    let mut efforts: Vec<f64> =
        remaining.iter().enumerate().map(|(j, r)| r / game.ranger_effectiveness_at(j)).collect();
    efforts[query.target] = query.effort;
    villagers[query.target] = query.villagers;
    Ok(FeasibilityAnswer { feasible: true, witness: Some(StrategyProfile::new(efforts, villagers)) })
}

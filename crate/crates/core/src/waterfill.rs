//! Hybrid waterfilling: the exact solver for uniform effectiveness.
//!
//! With the attacked target `i*` and its villagers fixed, the remaining
//! villagers are first placed greedily on whichever target the attacker
//! likes most. Ranger effort is then poured into the targets at the current
//! utility sea level, lowering it continuously. Whenever the ranger coverage
//! on a sea-level target equals the useful part of the last villager on a
//! narrower target below the sea, that villager and the ranger effort trade
//! places, which shrinks the total width of the sea and makes every further
//! unit of drop cheaper.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::feasibility::{check_consistent, FeasibilityQuery};
use crate::model::{
    attacker_utility_at, defender_utility_at, evaluate_profile, validate_profile, Diagnostics, Game, Instance,
    SolveResult, StrategyProfile,
};
use crate::tdbs::max_villagers;

/// Tolerance for sea-level membership and for a target sitting at its penalty.
pub const LEVEL_TOLERANCE: f64 = 1e-9;

/// A villager and some ranger effort that can trade places without moving
/// the sea level.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwapCandidate {
    /// Sea-level drop until the trade becomes neutral.
    pub u_change: f64,
    /// Sea-level target that hands over its ranger effort and gains a villager.
    pub outp: usize,
    /// Target below the sea that hands over its last villager.
    pub outv: usize,
}

/// What a single waterfilling step did.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Step {
    /// Rangers are used up or every target sits at its penalty.
    Done,
    /// The attacked target is at the sea level and some target already
    /// pinned at its penalty prevents any further drop.
    Blocked,
    Poured {
        level: f64,
    },
    Swapped {
        level: f64,
        swap: SwapCandidate,
    },
}

struct Levels {
    sea: f64,
    next: Option<f64>,
    critical: Vec<usize>,
}

/// Mutable state of one waterfilling subproblem.
#[derive(Debug, Clone)]
pub struct WaterfillState<'a> {
    instance: &'a Instance,
    target: usize,
    attacker_utility: Vec<f64>,
    villager_only_utility: Vec<f64>,
    efforts: Vec<f64>,
    villagers: Vec<u32>,
    width: Vec<f64>,
    rangers_remaining: f64,
    villagers_remaining: u32,
    swaps: u64,
    iterations: u64,
}

impl<'a> WaterfillState<'a> {
    /// Fresh state: `villagers` on the attacked target, nothing elsewhere.
    pub fn new(instance: &'a Instance, target: usize, villagers: u32) -> Result<Self> {
        instance.check_target(target)?;
        if villagers > instance.villager_budget() {
            return Err(Error::InvalidQuery("villagers exceed the villager budget"));
        }
        let n = instance.n();
        let mut placement = vec![0; n];
        placement[target] = villagers;
        Ok(Self::build(instance, target, vec![0.0; n], placement))
    }

    /// State resumed from an arbitrary valid profile; what the profile does
    /// not use is left as remaining budget.
    pub fn from_profile(instance: &'a Instance, target: usize, profile: &StrategyProfile) -> Result<Self> {
        instance.check_target(target)?;
        let violations = validate_profile(instance, profile);
        if !violations.is_empty() {
            return Err(Error::InvalidProfile(violations));
        }
        Ok(Self::build(instance, target, profile.efforts.clone(), profile.villagers.clone()))
    }

    fn build(instance: &'a Instance, target: usize, efforts: Vec<f64>, villagers: Vec<u32>) -> Self {
        let n = instance.n();
        let width = (0..n).map(|i| 1.0 / instance.attacker_spread(i)).collect();
        let rangers_remaining = (instance.ranger_budget() - efforts.iter().sum::<f64>()).max(0.0);
        let used: u64 = villagers.iter().map(|&v| u64::from(v)).sum();
        let villagers_remaining = u64::from(instance.villager_budget()).saturating_sub(used) as u32;
        let mut state = WaterfillState {
            instance,
            target,
            attacker_utility: vec![0.0; n],
            villager_only_utility: vec![0.0; n],
            efforts,
            villagers,
            width,
            rangers_remaining,
            villagers_remaining,
            swaps: 0,
            iterations: 0,
        };
        for i in 0..n {
            state.refresh(i);
        }
        state
    }

    fn refresh(&mut self, i: usize) {
        let inst = self.instance;
        let v = self.villagers[i];
        self.attacker_utility[i] = attacker_utility_at(inst, i, inst.coverage_at(i, self.efforts[i], v));
        self.villager_only_utility[i] = attacker_utility_at(inst, i, inst.coverage_at(i, 0.0, v));
    }

    pub fn target(&self) -> usize {
        self.target
    }

    pub fn attacker_utility(&self) -> &[f64] {
        &self.attacker_utility
    }

    /// Attacker utility each target would have with its villagers alone.
    pub fn villager_only_utility(&self) -> &[f64] {
        &self.villager_only_utility
    }

    pub fn efforts(&self) -> &[f64] {
        &self.efforts
    }

    pub fn villagers(&self) -> &[u32] {
        &self.villagers
    }

    pub fn width(&self) -> &[f64] {
        &self.width
    }

    pub fn rangers_remaining(&self) -> f64 {
        self.rangers_remaining
    }

    pub fn villagers_remaining(&self) -> u32 {
        self.villagers_remaining
    }

    pub fn swaps(&self) -> u64 {
        self.swaps
    }

    pub fn iterations(&self) -> u64 {
        self.iterations
    }

    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile::new(self.efforts.clone(), self.villagers.clone())
    }

    pub fn into_profile(self) -> StrategyProfile {
        StrategyProfile::new(self.efforts, self.villagers)
    }

    /// The target is fully covered: its attacker utility equals its penalty.
    pub fn is_pinned(&self, i: usize) -> bool {
        self.attacker_utility[i] <= self.instance.attacker_penalty(i) + LEVEL_TOLERANCE
    }

    fn levels(&self) -> Option<Levels> {
        let n = self.instance.n();
        let sea = (0..n)
            .filter(|&i| !self.is_pinned(i))
            .map(|i| self.attacker_utility[i])
            .fold(None, |m: Option<f64>, u| Some(m.map_or(u, |m| m.max(u))))?;
        let mut critical = Vec::new();
        let mut next: Option<f64> = None;
        for i in (0..n).filter(|&i| !self.is_pinned(i)) {
            let u = self.attacker_utility[i];
            if u >= sea - LEVEL_TOLERANCE {
                critical.push(i);
            } else {
                next = Some(next.map_or(u, |m| m.max(u)));
            }
        }
        Some(Levels { sea, next, critical })
    }

    /// Highest attacker utility among targets not pinned at their penalty.
    pub fn sea_level(&self) -> Option<f64> {
        self.levels().map(|l| l.sea)
    }

    /// Highest level strictly below the sea.
    pub fn next_level(&self) -> Option<f64> {
        self.levels().and_then(|l| l.next)
    }

    /// Targets at the sea level.
    pub fn critical_set(&self) -> Vec<usize> {
        self.levels().map(|l| l.critical).unwrap_or_default()
    }

    /// Sea-level drop from target `i`'s current utility until its ranger
    /// coverage equals the above-sea coverage of the last villager on `j`.
    /// `None` when `j` has no villager or the two spreads coincide.
    pub fn min_drop_before_swap(&self, i: usize, j: usize) -> Option<f64> {
        let inst = self.instance;
        let (spread_i, spread_j) = (inst.attacker_spread(i), inst.attacker_spread(j));
        if spread_i == spread_j || self.villagers[j] == 0 {
            return None;
        }
        let without_last =
            inst.attacker_reward(j) - spread_j * inst.villager_effectiveness() * f64::from(self.villagers[j] - 1);
        let (ua, uav) = (self.attacker_utility[i], self.villager_only_utility[i]);
        Some(ua - uav + (without_last - uav) * spread_i / (spread_j - spread_i))
    }

    /// Nearest swap over all sea-level targets and all eligible donors.
    pub fn get_swap_line(&self) -> Option<SwapCandidate> {
        self.levels().and_then(|levels| self.swap_line(&levels))
    }

    fn swap_line(&self, levels: &Levels) -> Option<SwapCandidate> {
        let inst = self.instance;
        let n = inst.n();
        let mut critical = vec![false; n];
        for &i in &levels.critical {
            critical[i] = true;
        }
        let donors: Vec<usize> = (0..n)
            .filter(|&j| j != self.target && !critical[j] && self.villagers[j] > 0 && self.efforts[j] <= 0.0)
            .collect();
        if donors.is_empty() {
            return None;
        }
        let mut best: Option<SwapCandidate> = None;
        for &i in levels.critical.iter().filter(|&&i| i != self.target) {
            let spread_i = inst.attacker_spread(i);
            for &j in &donors {
                if inst.attacker_spread(j) <= spread_i {
                    continue;
                }
                let Some(drop) = self.min_drop_before_swap(i, j) else { continue };
                let drop = drop.max(0.0);
                if levels.sea - drop < inst.attacker_penalty(j) - LEVEL_TOLERANCE {
                    continue;
                }
                if best.map_or(true, |b| drop < b.u_change) {
                    best = Some(SwapCandidate { u_change: drop, outp: i, outv: j });
                }
            }
        }
        best
    }

    /// Places every remaining villager, one at a time, on the target with
    /// the highest attacker utility. Pinned targets and the attacked target
    /// are skipped; villagers with nowhere useful to go stay unassigned.
    pub fn greedy_villagers(&mut self) {
        let n = self.instance.n();
        while self.villagers_remaining > 0 {
            let mut best: Option<usize> = None;
            for i in (0..n).filter(|&i| i != self.target && !self.is_pinned(i)) {
                if best.map_or(true, |b| self.attacker_utility[i] > self.attacker_utility[b]) {
                    best = Some(i);
                }
            }
            let Some(j) = best else { break };
            self.villagers[j] += 1;
            self.villagers_remaining -= 1;
            self.refresh(j);
        }
    }

    /// Pours ranger effort down to the nearest event: a swap, the next
    /// level, a penalty floor, or the end of the ranger budget.
    pub fn step(&mut self) -> Result<Step> {
        if self.rangers_remaining <= 0.0 {
            return Ok(Step::Done);
        }
        let Some(levels) = self.levels() else {
            return Ok(Step::Done);
        };
        let inst = self.instance;
        let n = inst.n();
        let star = self.target;
        let star_level = self.attacker_utility[star];

        if star_level >= levels.sea - LEVEL_TOLERANCE
            && (0..n).any(|k| self.is_pinned(k) && inst.attacker_penalty(k) >= levels.sea - LEVEL_TOLERANCE)
        {
            return Ok(Step::Blocked);
        }

        let star_critical = levels.critical.contains(&star);
        let floor = if star_critical {
            (0..n).map(|k| inst.attacker_penalty(k)).fold(f64::NEG_INFINITY, f64::max)
        } else {
            levels.critical.iter().map(|&k| inst.attacker_penalty(k)).fold(f64::NEG_INFINITY, f64::max)
        };

        let mut swap = self.swap_line(&levels);
        let mut drop = swap.map_or(f64::INFINITY, |s| s.u_change);
        if levels.sea - drop < floor {
            drop = levels.sea - floor;
            swap = None;
        }
        if let Some(next) = levels.next {
            if levels.sea - drop < next {
                drop = levels.sea - next;
                swap = None;
            }
        }
        // A pinned attacked target is not part of any level; stop on it.
        if !star_critical && self.is_pinned(star) && levels.sea - drop < star_level {
            drop = levels.sea - star_level;
            swap = None;
        }

        let ep = inst.ranger_effectiveness();
        let total_width: f64 = levels.critical.iter().map(|&i| self.width[i]).sum();
        let need = total_width * drop / ep;
        if need > self.rangers_remaining {
            drop = self.rangers_remaining * ep / total_width;
            swap = None;
            self.rangers_remaining = 0.0;
        } else {
            self.rangers_remaining = (self.rangers_remaining - need).max(0.0);
        }

        let level = levels.sea - drop;
        for &i in &levels.critical {
            self.efforts[i] += self.width[i] * drop / ep;
            self.attacker_utility[i] = level;
        }
        self.iterations += 1;

        match swap {
            Some(s) => {
                self.execute_swap(s, level);
                Ok(Step::Swapped { level, swap: s })
            }
            None => Ok(Step::Poured { level }),
        }
    }

    fn execute_swap(&mut self, swap: SwapCandidate, level: f64) {
        let SwapCandidate { outp, outv, .. } = swap;
        self.villagers[outv] -= 1;
        self.villagers[outp] += 1;
        self.efforts[outv] = self.efforts[outp];
        self.efforts[outp] = 0.0;
        self.refresh(outp);
        self.refresh(outv);
        if (self.attacker_utility[outv] - level).abs() <= LEVEL_TOLERANCE {
            self.attacker_utility[outv] = level;
        }
        self.swaps += 1;
    }

    // At its penalty the attacked target's utility no longer moves, but more
    // coverage still raises the defender's payoff.
    fn top_up_target(&mut self) {
        let star = self.target;
        if self.rangers_remaining <= 0.0 || !self.is_pinned(star) {
            return;
        }
        let inst = self.instance;
        let coverage = inst.coverage_at(star, self.efforts[star], self.villagers[star]);
        let extra = ((1.0 - coverage) / inst.ranger_effectiveness()).min(self.rangers_remaining);
        if extra > 0.0 {
            self.efforts[star] += extra;
            self.rangers_remaining -= extra;
            self.refresh(star);
        }
    }

    /// Steps until done or blocked, then spends leftover effort on a
    /// pinned attacked target.
    pub fn run(&mut self) -> Result<()> {
        let n = self.instance.n() as u64;
        let cap = 4 * n * n + 4 * n + 16;
        loop {
            if matches!(self.step()?, Step::Done | Step::Blocked) {
                self.top_up_target();
                return Ok(());
            }
            if self.iterations > cap {
                return Err(Error::IterationLimit { target: self.target, iterations: self.iterations });
            }
        }
    }
}

/// Best profile attacking `target` with exactly `villagers` on it.
pub fn hw_subproblem(instance: &Instance, target: usize, villagers: u32) -> Result<StrategyProfile> {
    let query = FeasibilityQuery::new(target, 0.0, villagers);
    if !check_consistent(instance, &query)?.feasible {
        return Err(Error::InvalidQuery("target cannot be attacked with these villagers on it"));
    }
    let mut state = WaterfillState::new(instance, target, villagers)?;
    state.greedy_villagers();
    state.run()?;
    Ok(state.into_profile())
}

/// Exact optimum over all valid profiles.
pub fn solve_hw(instance: &Instance) -> Result<SolveResult> {
    let mut diagnostics = Diagnostics::new();
    let mut best: Option<SolveResult> = None;

    for target in 0..instance.n() {
        let mut check = |villagers| {
            diagnostics.bump("feasibility_checks");
            check_consistent(instance, &FeasibilityQuery::new(target, 0.0, villagers))
        };
        let start = check(0)?;
        if !start.feasible {
            continue;
        }
        let (villagers, _) = max_villagers(instance.villager_budget(), start, &mut check)?;

        if let Some(b) = &best {
            let reach = instance.villager_effectiveness() * f64::from(villagers)
                + instance.ranger_effectiveness() * instance.ranger_budget();
            if defender_utility_at(instance, target, reach.min(1.0)) <= b.defender_utility {
                diagnostics.bump("pruned");
                continue;
            }
        }

        let mut state = WaterfillState::new(instance, target, villagers)?;
        state.greedy_villagers();
        state.run()?;
        diagnostics.bump("subproblems");
        diagnostics.add("swaps", state.swaps());
        diagnostics.add("iterations", state.iterations());
        let candidate = evaluate_profile(instance, &state.into_profile())?;
        if best.as_ref().map_or(true, |b| candidate.defender_utility > b.defender_utility) {
            best = Some(candidate);
        }
    }

    let mut result = best.ok_or(Error::NoFeasibleTarget)?;
    result.diagnostics = diagnostics;
    Ok(result)
}

//! Game definition, coverage and utility arithmetic, and the attacker's
//! best response.
//!
//! A defender splits divisible ranger effort `p[i]` and indivisible villager
//! counts `v[i]` over `n` targets. Coverage on target `i` is
//! `min(e_p * p[i] + e_v * v[i], 1)`; the attacker observes the coverage and
//! attacks the target with the highest expected utility, breaking ties in
//! the defender's favor and then by lowest index.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::error::{Error, Result, Violation};

/// Width of the band in which two attacker utilities count as tied.
pub const TIE_TOLERANCE: f64 = 1e-9;

/// Slack allowed on `sum(p) <= r_p` when validating profiles.
pub const BUDGET_TOLERANCE: f64 = 1e-9;

/// Reward and penalty vectors for both players, one entry per target.
#[derive(Debug, Clone, PartialEq)]
pub struct Payoffs {
    pub defender_reward: Vec<f64>,
    pub defender_penalty: Vec<f64>,
    pub attacker_reward: Vec<f64>,
    pub attacker_penalty: Vec<f64>,
}

impl Payoffs {
    /// Payoffs where every target shares the same four values.
    pub fn uniform(n: usize, defender: (f64, f64), attacker: (f64, f64)) -> Self {
        Payoffs {
            defender_reward: alloc::vec![defender.0; n],
            defender_penalty: alloc::vec![defender.1; n],
            attacker_reward: alloc::vec![attacker.0; n],
            attacker_penalty: alloc::vec![attacker.1; n],
        }
    }

    fn validate(&self) -> Result<usize> {
        let n = self.defender_reward.len();
        if n == 0 {
            return Err(Error::EmptyInstance);
        }
        let fields: [(&'static str, &Vec<f64>, bool); 4] = [
            ("defender_reward", &self.defender_reward, true),
            ("defender_penalty", &self.defender_penalty, false),
            ("attacker_reward", &self.attacker_reward, true),
            ("attacker_penalty", &self.attacker_penalty, false),
        ];
        for (field, values, is_reward) in fields {
            if values.len() != n {
                return Err(Error::DimensionMismatch { field, expected: n, found: values.len() });
            }
            for (target, &value) in values.iter().enumerate() {
                let signed_ok = if is_reward { value >= 0.0 } else { value <= 0.0 };
                if !value.is_finite() || !signed_ok {
                    return Err(Error::InvalidPayoff { field, target, value });
                }
            }
        }
        Ok(n)
    }
}

/// A complete game: targets, payoffs, budgets and resource effectiveness.
///
/// Fields are private so every `Instance` in circulation satisfies the sign
/// and range invariants checked by [`Instance::new`].
#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    payoffs: Payoffs,
    ranger_budget: f64,
    villager_budget: u32,
    ranger_effectiveness: f64,
    villager_effectiveness: f64,
}

pub(crate) fn check_effectiveness(field: &'static str, value: f64) -> Result<()> {
    if value.is_finite() && value > 0.0 && value <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidEffectiveness { field, value })
    }
}

impl Instance {
    pub fn new(
        payoffs: Payoffs,
        ranger_budget: f64,
        villager_budget: u32,
        ranger_effectiveness: f64,
        villager_effectiveness: f64,
    ) -> Result<Self> {
        payoffs.validate()?;
        if !ranger_budget.is_finite() || ranger_budget < 0.0 {
            return Err(Error::InvalidBudget { value: ranger_budget });
        }
        check_effectiveness("ranger_effectiveness", ranger_effectiveness)?;
        check_effectiveness("villager_effectiveness", villager_effectiveness)?;
        Ok(Instance { payoffs, ranger_budget, villager_budget, ranger_effectiveness, villager_effectiveness })
    }

    /// Same game with different resource budgets.
    pub fn with_budgets(&self, ranger_budget: f64, villager_budget: u32) -> Result<Self> {
        Instance::new(
            self.payoffs.clone(),
            ranger_budget,
            villager_budget,
            self.ranger_effectiveness,
            self.villager_effectiveness,
        )
    }

    /// Same game with different resource effectiveness.
    pub fn with_effectiveness(&self, ranger: f64, villager: f64) -> Result<Self> {
        Instance::new(self.payoffs.clone(), self.ranger_budget, self.villager_budget, ranger, villager)
    }

    pub fn n(&self) -> usize {
        self.payoffs.defender_reward.len()
    }

    pub fn payoffs(&self) -> &Payoffs {
        &self.payoffs
    }

    pub fn ranger_budget(&self) -> f64 {
        self.ranger_budget
    }

    pub fn villager_budget(&self) -> u32 {
        self.villager_budget
    }

    pub fn ranger_effectiveness(&self) -> f64 {
        self.ranger_effectiveness
    }

    pub fn villager_effectiveness(&self) -> f64 {
        self.villager_effectiveness
    }

    pub fn defender_reward(&self, i: usize) -> f64 {
        self.payoffs.defender_reward[i]
    }

    pub fn defender_penalty(&self, i: usize) -> f64 {
        self.payoffs.defender_penalty[i]
    }

    pub fn attacker_reward(&self, i: usize) -> f64 {
        self.payoffs.attacker_reward[i]
    }

    pub fn attacker_penalty(&self, i: usize) -> f64 {
        self.payoffs.attacker_penalty[i]
    }

    /// `R_a[i] - P_a[i]`: how far full coverage moves the attacker utility.
    pub fn attacker_spread(&self, i: usize) -> f64 {
        self.attacker_reward(i) - self.attacker_penalty(i)
    }

    /// Largest absolute input value, floored at 1.
    pub fn value_bound(&self) -> f64 {
        let p = &self.payoffs;
        p.defender_reward
            .iter()
            .chain(&p.defender_penalty)
            .chain(&p.attacker_reward)
            .chain(&p.attacker_penalty)
            .map(|x| x.abs())
            .chain([self.ranger_budget, f64::from(self.villager_budget), 1.0])
            .fold(0.0, f64::max)
    }

    pub(crate) fn check_target(&self, target: usize) -> Result<()> {
        if target < self.n() {
            Ok(())
        } else {
            Err(Error::TargetOutOfRange { target, n: self.n() })
        }
    }
}

/// Anything that prices coverage the way an [`Instance`] does, possibly with
/// effectiveness that varies by target.
pub trait Game {
    fn instance(&self) -> &Instance;

    fn ranger_effectiveness_at(&self, target: usize) -> f64 {
        let _ = target;
        self.instance().ranger_effectiveness()
    }

    fn villager_effectiveness_at(&self, target: usize) -> f64 {
        let _ = target;
        self.instance().villager_effectiveness()
    }

    /// Clamped coverage on one target.
    fn coverage_at(&self, target: usize, effort: f64, villagers: u32) -> f64 {
        let raw = self.ranger_effectiveness_at(target) * effort
            + self.villager_effectiveness_at(target) * f64::from(villagers);
        raw.min(1.0)
    }
}

impl Game for Instance {
    fn instance(&self) -> &Instance {
        self
    }
}

/// Ranger effort and villager count per target.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct StrategyProfile {
    pub efforts: Vec<f64>,
    pub villagers: Vec<u32>,
}

impl StrategyProfile {
    pub fn new(efforts: Vec<f64>, villagers: Vec<u32>) -> Self {
        StrategyProfile { efforts, villagers }
    }

    /// All-zero profile over `n` targets.
    pub fn zeros(n: usize) -> Self {
        StrategyProfile { efforts: alloc::vec![0.0; n], villagers: alloc::vec![0; n] }
    }

    /// Builds a profile from untyped villager counts, reporting negative or
    /// fractional entries instead of truncating them.
    pub fn from_raw(efforts: Vec<f64>, villagers: &[f64]) -> core::result::Result<Self, Vec<Violation>> {
        let mut violations = Vec::new();
        let mut counts = Vec::with_capacity(villagers.len());
        for (target, &v) in villagers.iter().enumerate() {
            if v < 0.0 {
                violations.push(Violation::NegativeVillagerCount { target });
            } else if !v.is_finite() || libm::floor(v) != v || v > f64::from(u32::MAX) {
                violations.push(Violation::NonIntegralVillagerCount { target });
            } else {
                counts.push(v as u32);
            }
        }
        if violations.is_empty() {
            Ok(StrategyProfile { efforts, villagers: counts })
        } else {
            Err(violations)
        }
    }

    pub fn total_effort(&self) -> f64 {
        self.efforts.iter().sum()
    }

    pub fn total_villagers(&self) -> u64 {
        self.villagers.iter().map(|&v| u64::from(v)).sum()
    }
}

/// The attacked target together with both players' utilities on it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BestResponse {
    pub target: usize,
    pub attacker_utility: f64,
    pub defender_utility: f64,
}

/// Named solver counters (feasibility checks, swaps, iterations, ...).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Diagnostics(BTreeMap<&'static str, u64>);

impl Diagnostics {
    pub fn new() -> Self {
        Diagnostics::default()
    }

    pub fn add(&mut self, counter: &'static str, amount: u64) {
        *self.0.entry(counter).or_insert(0) += amount;
    }

    pub fn bump(&mut self, counter: &'static str) {
        self.add(counter, 1);
    }

    /// Current value of a counter; unknown counters read as zero.
    pub fn get(&self, counter: &str) -> u64 {
        self.0.get(counter).copied().unwrap_or(0)
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&'static str, u64)> + '_ {
        self.0.iter().map(|(k, v)| (*k, *v))
    }

    pub fn merge(&mut self, other: &Diagnostics) {
        for (k, v) in other.iter() {
            self.add(k, v);
        }
    }
}

/// A profile together with the attacker's response to it.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub profile: StrategyProfile,
    pub attacked: usize,
    pub defender_utility: f64,
    pub attacker_utility: f64,
    pub diagnostics: Diagnostics,
}

/// Per-target coverage `min(e_p * p[i] + e_v * v[i], 1)`.
pub fn compute_coverage<G: Game + ?Sized>(game: &G, profile: &StrategyProfile) -> Result<Vec<f64>> {
    let n = game.instance().n();
    check_dimensions(n, profile).map_err(|v| match v {
        Violation::Dimension { field, expected, found } => Error::DimensionMismatch { field, expected, found },
        _ => unreachable!(),
    })?;
    Ok(profile
        .efforts
        .iter()
        .zip(&profile.villagers)
        .enumerate()
        .map(|(i, (&p, &v))| game.coverage_at(i, p, v))
        .collect())
}

/// Defender and attacker expected utility on target `i` at coverage `c`.
pub fn target_utilities(instance: &Instance, coverage: f64, i: usize) -> Result<(f64, f64)> {
    instance.check_target(i)?;
    if !(0.0..=1.0).contains(&coverage) {
        return Err(Error::CoverageOutOfRange { value: coverage });
    }
    Ok((defender_utility_at(instance, i, coverage), attacker_utility_at(instance, i, coverage)))
}

#[inline]
pub(crate) fn defender_utility_at(instance: &Instance, i: usize, coverage: f64) -> f64 {
    instance.defender_reward(i) * coverage + instance.defender_penalty(i) * (1.0 - coverage)
}

#[inline]
pub(crate) fn attacker_utility_at(instance: &Instance, i: usize, coverage: f64) -> f64 {
    instance.attacker_reward(i) * (1.0 - coverage) + instance.attacker_penalty(i) * coverage
}

/// The attacker's best response to a coverage vector.
///
/// Targets whose attacker utility is within [`TIE_TOLERANCE`] of the maximum
/// are tied; among them the defender's utility decides, then the lowest
/// index.
pub fn best_response(instance: &Instance, coverage: &[f64]) -> Result<BestResponse> {
    let n = instance.n();
    if coverage.len() != n {
        return Err(Error::DimensionMismatch { field: "coverage", expected: n, found: coverage.len() });
    }
    let mut attacker = Vec::with_capacity(n);
    for (i, &c) in coverage.iter().enumerate() {
        let (_, ua) = target_utilities(instance, c, i)?;
        attacker.push(ua);
    }
    let top = attacker.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut best: Option<BestResponse> = None;
    for (i, &ua) in attacker.iter().enumerate() {
        if ua < top - TIE_TOLERANCE {
            continue;
        }
        let ud = defender_utility_at(instance, i, coverage[i]);
        if best.map_or(true, |b| ud > b.defender_utility + TIE_TOLERANCE) {
            best = Some(BestResponse { target: i, attacker_utility: ua, defender_utility: ud });
        }
    }
    // n >= 1 is an instance invariant, so at least the maximizer survives.
    Ok(best.expect("instance has at least one target"))
}

fn check_dimensions(n: usize, profile: &StrategyProfile) -> core::result::Result<(), Violation> {
    if profile.efforts.len() != n {
        return Err(Violation::Dimension { field: "efforts", expected: n, found: profile.efforts.len() });
    }
    if profile.villagers.len() != n {
        return Err(Violation::Dimension { field: "villagers", expected: n, found: profile.villagers.len() });
    }
    Ok(())
}

/// Every constraint the profile breaks; empty when the profile is valid.
pub fn validate_profile(instance: &Instance, profile: &StrategyProfile) -> Vec<Violation> {
    let mut violations = Vec::new();
    if let Err(v) = check_dimensions(instance.n(), profile) {
        violations.push(v);
        return violations;
    }
    for (target, &p) in profile.efforts.iter().enumerate() {
        if !p.is_finite() {
            violations.push(Violation::NonFiniteRangerEffort { target });
        } else if p < 0.0 {
            violations.push(Violation::NegativeRangerEffort { target });
        }
    }
    let total = profile.total_effort();
    if total > instance.ranger_budget() + BUDGET_TOLERANCE {
        violations.push(Violation::RangerBudgetExceeded { total, budget: instance.ranger_budget() });
    }
    let villagers = profile.total_villagers();
    if villagers > u64::from(instance.villager_budget()) {
        violations.push(Violation::VillagerBudgetExceeded { total: villagers, budget: instance.villager_budget() });
    }
    violations
}

/// Validates the profile and resolves the attacker's response to it.
pub fn evaluate_profile<G: Game + ?Sized>(game: &G, profile: &StrategyProfile) -> Result<SolveResult> {
    let violations = validate_profile(game.instance(), profile);
    if !violations.is_empty() {
        return Err(Error::InvalidProfile(violations));
    }
    let coverage = compute_coverage(game, profile)?;
    let response = best_response(game.instance(), &coverage)?;
    Ok(SolveResult {
        profile: profile.clone(),
        attacked: response.target,
        defender_utility: response.defender_utility,
        attacker_utility: response.attacker_utility,
        diagnostics: Diagnostics::new(),
    })
}

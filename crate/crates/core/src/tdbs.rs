//! Two-dimensional binary search.
//!
//! For every target that can be attacked at all, find the most villagers it
//! can hold with no ranger effort, then the most ranger effort on top of
//! that, to within `epsilon`. The best of these candidates is returned.
//!
//! Maximizing villagers first is only safe when a villager on the attacked
//! target is worth at least as much ranger effort as one anywhere else,
//! which always holds for uniform effectiveness. For target-specific games
//! where it does not, every feasible villager count gets its own effort
//! search.

use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::feasibility::{FeasibilityAnswer, FeasibilityCheck, FeasibilityQuery};
use crate::model::{evaluate_profile, Diagnostics, SolveResult};

pub const DEFAULT_EPSILON: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TdbsConfig {
    /// Resolution of the ranger-effort search.
    pub epsilon: f64,
    /// Upper bound on the absolute value of every payoff and budget.
    pub value_bound: f64,
}

impl TdbsConfig {
    pub fn for_instance<G: FeasibilityCheck + ?Sized>(game: &G) -> Self {
        TdbsConfig { epsilon: DEFAULT_EPSILON, value_bound: game.instance().value_bound() }
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Worst-case shortfall of the returned utility against the optimum.
    pub fn error_bound(&self, ranger_effectiveness: f64) -> f64 {
        ranger_effectiveness * 2.0 * self.value_bound * self.epsilon
    }

    fn validate<G: FeasibilityCheck + ?Sized>(&self, game: &G) -> Result<()> {
        if !(self.epsilon.is_finite() && self.epsilon > 0.0) {
            return Err(Error::InvalidConfig("epsilon must be positive and finite"));
        }
        #[allow(clippy::neg_cmp_op_on_partial_ord)]
        if !(self.value_bound >= game.instance().value_bound()) {
            return Err(Error::InvalidConfig("value bound is below the instance's largest value"));
        }
        Ok(())
    }
}

/// Which search a probe belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Phase {
    Start,
    Villagers,
    Rangers,
}

/// One feasibility check issued by the search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Probe {
    pub phase: Phase,
    pub query: FeasibilityQuery,
    pub feasible: bool,
}

pub fn solve_tdbs<G: FeasibilityCheck + ?Sized>(game: &G, config: &TdbsConfig) -> Result<SolveResult> {
    search(game, config, &mut |_| {})
}

/// Like [`solve_tdbs`], also returning every probe in issue order.
pub fn solve_tdbs_with_trace<G: FeasibilityCheck + ?Sized>(
    game: &G,
    config: &TdbsConfig,
) -> Result<(SolveResult, Vec<Probe>)> {
    let mut probes = Vec::new();
    let result = search(game, config, &mut |p| probes.push(p))?;
    Ok((result, probes))
}

fn search<G: FeasibilityCheck + ?Sized>(
    game: &G,
    config: &TdbsConfig,
    record: &mut dyn FnMut(Probe),
) -> Result<SolveResult> {
    config.validate(game)?;
    let instance = game.instance();
    let mut diagnostics = Diagnostics::new();
    let mut best: Option<SolveResult> = None;

    for target in 0..instance.n() {
        let mut probe = |phase, effort, villagers| -> Result<FeasibilityAnswer> {
            let query = FeasibilityQuery::new(target, effort, villagers);
            let answer = game.check(&query)?;
            diagnostics.bump("feasibility_checks");
            record(Probe { phase, query, feasible: answer.feasible });
            Ok(answer)
        };

        let start = probe(Phase::Start, 0.0, 0)?;
        if !start.feasible {
            continue;
        }
        let (most, at_most) = max_villagers(instance.villager_budget(), start, |v| probe(Phase::Villagers, 0.0, v))?;

        // Unless villagers on this target are at least as effective as
        // anywhere else, fewer of them plus more effort can do better.
        let counts = if game.villagers_substitute_effort(target) { most..=most } else { 0..=most };
        for villagers in counts {
            let floor = if villagers == most { at_most.clone() } else { probe(Phase::Rangers, 0.0, villagers)? };
            let witness =
                max_effort(instance.ranger_budget(), config.epsilon, floor, |p| probe(Phase::Rangers, p, villagers))?;
            let profile = witness.witness.expect("feasible answers carry a witness");
            let candidate = evaluate_profile(game, &profile)?;
            if best.as_ref().map_or(true, |b| candidate.defender_utility > b.defender_utility) {
                best = Some(candidate);
            }
        }
    }

    let mut result = best.ok_or(Error::NoFeasibleTarget)?;
    result.diagnostics = diagnostics;
    Ok(result)
}

/// Feasible answer with the most effort, to within `epsilon`, given the
/// feasible answer `zero` at no effort. The full budget is tried first.
fn max_effort<F>(budget: f64, epsilon: f64, zero: FeasibilityAnswer, mut probe: F) -> Result<FeasibilityAnswer>
where
    F: FnMut(f64) -> Result<FeasibilityAnswer>,
{
    if budget <= 0.0 {
        return Ok(zero);
    }
    let full = probe(budget)?;
    if full.feasible {
        return Ok(full);
    }
    let mut best = zero;
    let (mut lo, mut hi) = (0.0f64, budget);
    while hi - lo > epsilon {
        let mid = lo + (hi - lo) / 2.0;
        let answer = probe(mid)?;
        if answer.feasible {
            lo = mid;
            best = answer;
        } else {
            hi = mid;
        }
    }
    Ok(best)
}

/// Largest villager count in `0..=budget` accepted by `probe`, given that
/// zero is accepted with answer `zero`. Feasibility is monotone in the
/// count, so an ordinary bisection on integers applies.
pub(crate) fn max_villagers<F>(budget: u32, zero: FeasibilityAnswer, mut probe: F) -> Result<(u32, FeasibilityAnswer)>
where
    F: FnMut(u32) -> Result<FeasibilityAnswer>,
{
    let (mut lo, mut hi) = (0u32, budget);
    let mut best = zero;
    while lo < hi {
        let mid = lo + (hi - lo).div_ceil(2);
        let answer = probe(mid)?;
        if answer.feasible {
            lo = mid;
            best = answer;
        } else {
            hi = mid - 1;
        }
    }
    Ok((lo, best))
}

//! JSON instance and result files.
//!
//! An instance file is one JSON object:
//!
//! ```json
//! {
//!   "n": 2,
//!   "ranger_budget": 1.0,
//!   "villager_budget": 1,
//!   "e_p": 0.5,
//!   "e_v": [0.4, 0.3],
//!   "reward_defender": [1.0, 1.0],
//!   "penalty_defender": [-1.0, -1.0],
//!   "reward_attacker": [1.0, 1.0],
//!   "penalty_attacker": [-1.0, -1.0],
//!   "slope_class": ["high", "low"],
//!   "baseline": { "p": [0.5, 0.5], "v": [1, 0] }
//! }
//! ```
//!
//! `e_p` and `e_v` take a scalar or one value per target. Any per-target
//! array turns the scenario into a target-specific game. `labels`,
//! `slope_class`, `baseline` and `notes` are optional.
//!
//! Floats are written in their shortest round-trip form, so saving and
//! loading reproduces every value bit for bit.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use patrol_core::{
    compute_coverage, evaluate_profile, solve_hw, solve_oracle, solve_tdbs, validate_profile, Game, Instance, Payoffs,
    SolveResult, StrategyProfile, TargetSpecificInstance, TdbsConfig,
};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::bench::Algorithm;
use crate::error::{PlannerError, Result};

/// Agreement required between stored and recomputed utilities.
pub const RESULT_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlopeClass {
    High,
    Average,
    Low,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
enum Effectiveness {
    Uniform(f64),
    PerTarget(Vec<f64>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct BaselineFile {
    p: Vec<f64>,
    v: Vec<u32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    n: usize,
    ranger_budget: f64,
    villager_budget: u32,
    e_p: Effectiveness,
    e_v: Effectiveness,
    reward_defender: Vec<f64>,
    penalty_defender: Vec<f64>,
    reward_attacker: Vec<f64>,
    penalty_attacker: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    labels: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    slope_class: Option<Vec<SlopeClass>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    baseline: Option<BaselineFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    notes: Option<String>,
}

/// An instance plus the optional metadata a scenario file may carry.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioInstance {
    /// For per-target effectiveness the scalar fields hold the largest entry.
    pub instance: Instance,
    pub ranger_effectiveness: Option<Vec<f64>>,
    pub villager_effectiveness: Option<Vec<f64>>,
    pub labels: Option<Vec<String>>,
    pub slope_class: Option<Vec<SlopeClass>>,
    pub baseline: Option<StrategyProfile>,
    pub notes: Option<String>,
}

impl ScenarioInstance {
    /// A scenario with no metadata.
    pub fn plain(instance: Instance) -> Self {
        ScenarioInstance {
            instance,
            ranger_effectiveness: None,
            villager_effectiveness: None,
            labels: None,
            slope_class: None,
            baseline: None,
            notes: None,
        }
    }

    pub fn n(&self) -> usize {
        self.instance.n()
    }

    pub fn is_target_specific(&self) -> bool {
        self.ranger_effectiveness.is_some() || self.villager_effectiveness.is_some()
    }

    /// Same scenario with uniform effectiveness `(e_p, e_v)`.
    pub fn with_effectiveness(&self, ranger: f64, villager: f64) -> Result<Self> {
        Ok(ScenarioInstance {
            instance: self.instance.with_effectiveness(ranger, villager)?,
            ranger_effectiveness: None,
            villager_effectiveness: None,
            ..self.clone()
        })
    }

    pub fn game(&self) -> Result<PlannerGame> {
        if !self.is_target_specific() {
            return Ok(PlannerGame::Uniform(self.instance.clone()));
        }
        let n = self.n();
        let villager =
            self.villager_effectiveness.clone().unwrap_or_else(|| vec![self.instance.villager_effectiveness(); n]);
        let mut ts = TargetSpecificInstance::new(self.instance.clone(), villager)?;
        if let Some(ranger) = &self.ranger_effectiveness {
            ts = ts.with_ranger_effectiveness(ranger.clone())?;
        }
        Ok(PlannerGame::TargetSpecific(ts))
    }

    fn from_file(file: InstanceFile) -> Result<Self> {
        let n = file.n;
        let (ep, ranger_vec) = split_effectiveness("e_p", file.e_p, n)?;
        let (ev, villager_vec) = split_effectiveness("e_v", file.e_v, n)?;
        let payoffs = Payoffs {
            defender_reward: file.reward_defender,
            defender_penalty: file.penalty_defender,
            attacker_reward: file.reward_attacker,
            attacker_penalty: file.penalty_attacker,
        };
        for (field, len) in [
            ("reward_defender", payoffs.defender_reward.len()),
            ("penalty_defender", payoffs.defender_penalty.len()),
            ("reward_attacker", payoffs.attacker_reward.len()),
            ("penalty_attacker", payoffs.attacker_penalty.len()),
        ] {
            check_len(field, len, n)?;
        }
        let instance = Instance::new(payoffs, file.ranger_budget, file.villager_budget, ep, ev)?;
        if let Some(labels) = &file.labels {
            check_len("labels", labels.len(), n)?;
        }
        if let Some(classes) = &file.slope_class {
            check_len("slope_class", classes.len(), n)?;
        }
        let baseline = match file.baseline {
            None => None,
            Some(b) => {
                check_len("baseline.p", b.p.len(), n)?;
                check_len("baseline.v", b.v.len(), n)?;
                let profile = StrategyProfile::new(b.p, b.v);
                let violations = validate_profile(&instance, &profile);
                if !violations.is_empty() {
                    return Err(patrol_core::Error::InvalidProfile(violations).into());
                }
                Some(profile)
            }
        };
        let scenario = ScenarioInstance {
            instance,
            ranger_effectiveness: ranger_vec,
            villager_effectiveness: villager_vec,
            labels: file.labels,
            slope_class: file.slope_class,
            baseline,
            notes: file.notes,
        };
        scenario.game()?;
        Ok(scenario)
    }

    fn to_file(&self) -> InstanceFile {
        let inst = &self.instance;
        let p = inst.payoffs();
        let scalar_or = |vec: &Option<Vec<f64>>, scalar: f64| match vec {
            Some(v) => Effectiveness::PerTarget(v.clone()),
            None => Effectiveness::Uniform(scalar),
        };
        InstanceFile {
            n: inst.n(),
            ranger_budget: inst.ranger_budget(),
            villager_budget: inst.villager_budget(),
            e_p: scalar_or(&self.ranger_effectiveness, inst.ranger_effectiveness()),
            e_v: scalar_or(&self.villager_effectiveness, inst.villager_effectiveness()),
            reward_defender: p.defender_reward.clone(),
            penalty_defender: p.defender_penalty.clone(),
            reward_attacker: p.attacker_reward.clone(),
            penalty_attacker: p.attacker_penalty.clone(),
            labels: self.labels.clone(),
            slope_class: self.slope_class.clone(),
            baseline: self.baseline.as_ref().map(|b| BaselineFile { p: b.efforts.clone(), v: b.villagers.clone() }),
            notes: self.notes.clone(),
        }
    }
}

fn check_len(field: &str, found: usize, n: usize) -> Result<()> {
    if found == n {
        Ok(())
    } else {
        Err(PlannerError::invalid(format!("{field} has {found} entries, expected n = {n}")))
    }
}

fn split_effectiveness(field: &str, value: Effectiveness, n: usize) -> Result<(f64, Option<Vec<f64>>)> {
    match value {
        Effectiveness::Uniform(e) => Ok((e, None)),
        Effectiveness::PerTarget(values) => {
            check_len(field, values.len(), n)?;
            let top = values.iter().copied().fold(f64::NAN, f64::max);
            Ok((top, Some(values)))
        }
    }
}

/// The game a scenario describes, with uniform or per-target effectiveness.
#[derive(Debug, Clone, PartialEq)]
pub enum PlannerGame {
    Uniform(Instance),
    TargetSpecific(TargetSpecificInstance),
}

impl Game for PlannerGame {
    fn instance(&self) -> &Instance {
        match self {
            PlannerGame::Uniform(inst) => inst,
            PlannerGame::TargetSpecific(ts) => ts.base(),
        }
    }

    fn ranger_effectiveness_at(&self, target: usize) -> f64 {
        match self {
            PlannerGame::Uniform(inst) => inst.ranger_effectiveness_at(target),
            PlannerGame::TargetSpecific(ts) => ts.ranger_effectiveness_at(target),
        }
    }

    fn villager_effectiveness_at(&self, target: usize) -> f64 {
        match self {
            PlannerGame::Uniform(inst) => inst.villager_effectiveness_at(target),
            PlannerGame::TargetSpecific(ts) => ts.villager_effectiveness_at(target),
        }
    }
}

impl PlannerGame {
    /// Solves with `algorithm`; `epsilon` is the TDBS resolution.
    pub fn solve(&self, algorithm: Algorithm, epsilon: f64) -> Result<SolveResult> {
        let result = match (algorithm, self) {
            (Algorithm::Hw, PlannerGame::Uniform(inst)) => solve_hw(inst)?,
            (Algorithm::Hw, PlannerGame::TargetSpecific(_)) => return Err(PlannerError::UnsupportedAlgorithm),
            (Algorithm::Tdbs, PlannerGame::Uniform(inst)) => {
                solve_tdbs(inst, &TdbsConfig::for_instance(inst).with_epsilon(epsilon))?
            }
            (Algorithm::Tdbs, PlannerGame::TargetSpecific(ts)) => {
                solve_tdbs(ts, &TdbsConfig::for_instance(ts).with_epsilon(epsilon))?
            }
            (Algorithm::Oracle, game) => solve_oracle(game)?,
        };
        Ok(result)
    }
}

/// A solve result as stored on disk.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResultFile {
    pub algorithm: String,
    pub attacked: usize,
    pub defender_utility: f64,
    pub attacker_utility: f64,
    pub p: Vec<f64>,
    pub v: Vec<u32>,
    pub coverage: Vec<f64>,
    #[serde(default)]
    pub diagnostics: BTreeMap<String, u64>,
}

impl ResultFile {
    pub fn new(game: &PlannerGame, algorithm: Algorithm, result: &SolveResult) -> Result<Self> {
        Ok(ResultFile {
            algorithm: algorithm.to_string(),
            attacked: result.attacked,
            defender_utility: result.defender_utility,
            attacker_utility: result.attacker_utility,
            p: result.profile.efforts.clone(),
            v: result.profile.villagers.clone(),
            coverage: compute_coverage(game, &result.profile)?,
            diagnostics: result.diagnostics.iter().map(|(k, v)| (k.to_string(), v)).collect(),
        })
    }

    pub fn profile(&self) -> StrategyProfile {
        StrategyProfile::new(self.p.clone(), self.v.clone())
    }

    /// Checks the stored profile against `game` and recomputes its outcome.
    pub fn verify(&self, game: &PlannerGame) -> Result<()> {
        let profile = self.profile();
        let violations = validate_profile(game.instance(), &profile);
        if !violations.is_empty() {
            return Err(patrol_core::Error::InvalidProfile(violations).into());
        }
        let again = evaluate_profile(game, &profile)?;
        let close = |a: f64, b: f64| (a - b).abs() <= RESULT_TOLERANCE;
        if again.attacked != self.attacked
            || !close(again.defender_utility, self.defender_utility)
            || !close(again.attacker_utility, self.attacker_utility)
        {
            return Err(PlannerError::invalid(format!(
                "stored outcome (target {}, utility {}) disagrees with the profile (target {}, utility {})",
                self.attacked, self.defender_utility, again.attacked, again.defender_utility
            )));
        }
        let coverage = compute_coverage(game, &profile)?;
        if coverage.iter().zip(&self.coverage).any(|(a, b)| !close(*a, *b)) || coverage.len() != self.coverage.len() {
            return Err(PlannerError::invalid("stored coverage disagrees with the profile"));
        }
        Ok(())
    }
}

pub fn load_instance(path: impl AsRef<Path>) -> Result<ScenarioInstance> {
    ScenarioInstance::from_file(read_json(path.as_ref())?)
}

pub fn save_instance(path: impl AsRef<Path>, scenario: &ScenarioInstance) -> Result<()> {
    write_json(path.as_ref(), &scenario.to_file())
}

pub fn parse_instance(text: &str) -> Result<ScenarioInstance> {
    ScenarioInstance::from_file(parse_json(Path::new("<input>"), text)?)
}

pub fn instance_to_string(scenario: &ScenarioInstance) -> String {
    serde_json::to_string_pretty(&scenario.to_file()).expect("instance files always serialize")
}

pub fn load_result(path: impl AsRef<Path>) -> Result<ResultFile> {
    read_json(path.as_ref())
}

pub fn save_result(path: impl AsRef<Path>, result: &ResultFile) -> Result<()> {
    write_json(path.as_ref(), result)
}

pub(crate) fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| PlannerError::invalid(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|source| PlannerError::Io { path: path.to_path_buf(), source })
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| PlannerError::Io { path: path.to_path_buf(), source })?;
    parse_json(path, &text)
}

fn parse_json<T: DeserializeOwned>(path: &Path, text: &str) -> Result<T> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de).map_err(|e| PlannerError::Parse {
        path: PathBuf::from(path),
        field: e.path().to_string(),
        message: e.inner().to_string(),
    })
}

use alloc::vec::Vec;
use core::fmt;

/// A single broken constraint of a defender strategy profile.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// The effort or villager vector does not have one entry per target.
    Dimension {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    NegativeRangerEffort {
        target: usize,
    },
    NonFiniteRangerEffort {
        target: usize,
    },
    NegativeVillagerCount {
        target: usize,
    },
    NonIntegralVillagerCount {
        target: usize,
    },
    RangerBudgetExceeded {
        total: f64,
        budget: f64,
    },
    VillagerBudgetExceeded {
        total: u64,
        budget: u32,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Dimension { field, expected, found } => {
                write!(f, "{field} has {found} entries, expected {expected}")
            }
            Violation::NegativeRangerEffort { target } => {
                write!(f, "negative ranger effort on target {target}")
            }
            Violation::NonFiniteRangerEffort { target } => {
                write!(f, "non-finite ranger effort on target {target}")
            }
            Violation::NegativeVillagerCount { target } => {
                write!(f, "negative villager count on target {target}")
            }
            Violation::NonIntegralVillagerCount { target } => {
                write!(f, "non-integral villager count on target {target}")
            }
            Violation::RangerBudgetExceeded { total, budget } => {
                write!(f, "ranger budget exceeded ({total} > {budget})")
            }
            Violation::VillagerBudgetExceeded { total, budget } => {
                write!(f, "villager budget exceeded ({total} > {budget})")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    EmptyInstance,
    /// A per-target vector does not have one entry per target.
    DimensionMismatch {
        field: &'static str,
        expected: usize,
        found: usize,
    },
    /// A reward is negative, a penalty is positive, or a value is not finite.
    InvalidPayoff {
        field: &'static str,
        target: usize,
        value: f64,
    },
    InvalidEffectiveness {
        field: &'static str,
        value: f64,
    },
    InvalidBudget {
        value: f64,
    },
    CoverageOutOfRange {
        value: f64,
    },
    TargetOutOfRange {
        target: usize,
        n: usize,
    },
    /// No coverage on the target can push the attacker utility down to the level.
    InfeasibleLevel {
        target: usize,
        level: f64,
    },
    InvalidProfile(Vec<Violation>),
    InvalidQuery(&'static str),
    InvalidConfig(&'static str),
    /// Exhaustive enumeration would visit more than `cap` candidates.
    EnumerationCapExceeded {
        required: u128,
        cap: u64,
    },
    NoFeasibleTarget,
    /// The waterfilling loop ran past its theoretical iteration bound.
    IterationLimit {
        target: usize,
        iterations: u64,
    },
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::EmptyInstance => f.write_str("instance has no targets"),
            Error::DimensionMismatch { field, expected, found } => {
                write!(f, "{field} has {found} entries, expected {expected}")
            }
            Error::InvalidPayoff { field, target, value } => {
                write!(f, "{field}[{target}] = {value} has the wrong sign or is not finite")
            }
            Error::InvalidEffectiveness { field, value } => {
                write!(f, "{field} = {value} must lie in (0, 1]")
            }
            Error::InvalidBudget { value } => {
                write!(f, "ranger budget {value} must be finite and nonnegative")
            }
            Error::CoverageOutOfRange { value } => write!(f, "coverage {value} outside [0, 1]"),
            Error::TargetOutOfRange { target, n } => {
                write!(f, "target {target} out of range for {n} targets")
            }
            Error::InfeasibleLevel { target, level } => {
                write!(f, "attacker utility on target {target} cannot be pushed down to {level}")
            }
            Error::InvalidProfile(violations) => {
                f.write_str("invalid strategy profile: ")?;
                for (k, v) in violations.iter().enumerate() {
                    if k > 0 {
                        f.write_str("; ")?;
                    }
                    write!(f, "{v}")?;
                }
                Ok(())
            }
            Error::InvalidQuery(msg) => write!(f, "invalid feasibility query: {msg}"),
            Error::InvalidConfig(msg) => write!(f, "invalid solver configuration: {msg}"),
            Error::EnumerationCapExceeded { required, cap } => {
                write!(f, "exhaustive search needs {required} candidates, cap is {cap}; use the waterfilling solver")
            }
            Error::NoFeasibleTarget => f.write_str("no target can be made the attacker's best response"),
            Error::IterationLimit { target, iterations } => {
                write!(f, "waterfilling for target {target} did not settle after {iterations} iterations")
            }
        }
    }
}

impl core::error::Error for Error {}

pub type Result<T> = core::result::Result<T, Error>;

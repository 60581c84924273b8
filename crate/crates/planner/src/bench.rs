//! Seeded instance generation and solver runtime benchmarks.

use std::fmt;
use std::io::Write;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::sync::Mutex;
use std::thread;
use std::time::{Duration, Instant};

use patrol_core::tdbs::DEFAULT_EPSILON;
use patrol_core::{solve_hw, solve_oracle, solve_tdbs, Instance, Payoffs, TdbsConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PlannerError, Result};

pub const DEFAULT_RUNS: usize = 30;
pub const DEFAULT_TIMEOUT: Duration = Duration::from_secs(7200);
pub const CSV_HEADER: &str = "algorithm,n,rp,rv,runs,mean_s,std_s,min_s,p97_s,timeouts";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Tdbs,
    Hw,
    Oracle,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Tdbs => "tdbs",
            Algorithm::Hw => "hw",
            Algorithm::Oracle => "oracle",
        })
    }
}

impl FromStr for Algorithm {
    type Err = PlannerError;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "tdbs" => Ok(Algorithm::Tdbs),
            "hw" => Ok(Algorithm::Hw),
            "oracle" => Ok(Algorithm::Oracle),
            _ => Err(PlannerError::UnknownAlgorithm(s.to_string())),
        }
    }
}

/// One benchmark cell: instance size, budgets and the seed of its first run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub n: usize,
    pub ranger_budget: f64,
    pub villager_budget: u32,
    pub seed: u64,
    /// Half-open range for both players' rewards.
    pub reward_range: (f64, f64),
    /// Half-open range for both players' penalties.
    pub penalty_range: (f64, f64),
}

impl GenParams {
    pub fn new(n: usize, ranger_budget: f64, villager_budget: u32, seed: u64) -> Self {
        GenParams { n, ranger_budget, villager_budget, seed, reward_range: (0.0, 10.0), penalty_range: (-10.0, 0.0) }
    }

    pub fn with_seed(self, seed: u64) -> Self {
        GenParams { seed, ..self }
    }

    fn validate(&self) -> Result<()> {
        let (rlo, rhi) = self.reward_range;
        let (plo, phi) = self.penalty_range;
        if self.n == 0 {
            return Err(PlannerError::invalid("n must be positive"));
        }
        if !(rlo.is_finite() && rhi.is_finite() && 0.0 <= rlo && rlo < rhi) {
            return Err(PlannerError::invalid(format!(
                "reward range [{rlo}, {rhi}) must be a nonempty subset of [0, inf)"
            )));
        }
        if !(plo.is_finite() && phi.is_finite() && plo < phi && phi <= 0.0) {
            return Err(PlannerError::invalid(format!(
                "penalty range [{plo}, {phi}) must be a nonempty subset of (-inf, 0]"
            )));
        }
        if !(self.ranger_budget.is_finite() && self.ranger_budget >= 0.0) {
            return Err(PlannerError::invalid("ranger budget must be finite and nonnegative"));
        }
        Ok(())
    }
}

/// Random instance determined by `params.seed`. Payoffs are uniform on
/// their ranges and `0 < e_v < e_p < 1`.
pub fn generate_instance(params: &GenParams) -> Result<Instance> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.n;
    let (rlo, rhi) = params.reward_range;
    let (plo, phi) = params.penalty_range;
    let mut draw = |lo: f64, hi: f64| -> Vec<f64> { (0..n).map(|_| rng.gen_range(lo..hi)).collect() };
    let payoffs = Payoffs {
        defender_reward: draw(rlo, rhi),
        defender_penalty: draw(plo, phi),
        attacker_reward: draw(rlo, rhi),
        attacker_penalty: draw(plo, phi),
    };
    let (ev, ep) = loop {
        let a: f64 = rng.gen();
        let b: f64 = rng.gen();
        if a > 0.0 && b > 0.0 && a != b {
            break if a < b { (a, b) } else { (b, a) };
        }
    };
    Ok(Instance::new(payoffs, params.ranger_budget, params.villager_budget, ep, ev)?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchConfig {
    pub algorithms: Vec<Algorithm>,
    pub runs: usize,
    /// Runs longer than this are recorded at the cap.
    pub timeout: Duration,
    pub epsilon: f64,
    /// Workers sharing the cells; runs inside a cell stay sequential.
    pub threads: usize,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            algorithms: vec![Algorithm::Tdbs, Algorithm::Hw],
            runs: DEFAULT_RUNS,
            timeout: DEFAULT_TIMEOUT,
            epsilon: DEFAULT_EPSILON,
            threads: 1,
        }
    }
}

impl BenchConfig {
    /// Config with algorithms given by name.
    pub fn with_algorithm_names<S: AsRef<str>>(names: &[S]) -> Result<Self> {
        let algorithms = names.iter().map(|s| s.as_ref().parse()).collect::<Result<Vec<_>>>()?;
        Ok(BenchConfig { algorithms, ..BenchConfig::default() })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub algorithm: Algorithm,
    pub n: usize,
    pub rp: f64,
    pub rv: u32,
    pub runs: usize,
    pub mean_s: f64,
    pub std_s: f64,
    pub min_s: f64,
    pub p97_s: f64,
    pub timeouts: usize,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
}

impl BenchReport {
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut writer = csv::Writer::from_writer(out);
        for row in &self.rows {
            writer.serialize(row)?;
        }
        writer.flush().map_err(csv::Error::from)?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn row(&self, algorithm: Algorithm, n: usize) -> Option<&BenchRow> {
        self.rows.iter().find(|r| r.algorithm == algorithm && r.n == n)
    }
}

/// Times every algorithm on `runs` fresh instances per cell. Run `k` of a
/// cell uses seed `cell.seed + k`. Rows come out cell by cell, in the order
/// of `config.algorithms` within a cell.
pub fn run_benchmark(grid: &[GenParams], config: &BenchConfig) -> Result<BenchReport> {
    if config.runs == 0 {
        return Err(PlannerError::invalid("runs must be positive"));
    }
    for cell in grid {
        cell.validate()?;
    }
    let jobs: Vec<(GenParams, Algorithm)> =
        grid.iter().flat_map(|cell| config.algorithms.iter().map(move |&a| (*cell, a))).collect();
    let slots: Vec<Mutex<Option<Result<BenchRow>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = AtomicUsize::new(0);
    thread::scope(|scope| {
        for _ in 0..config.threads.clamp(1, jobs.len().max(1)) {
            scope.spawn(|| loop {
                let k = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(cell, algorithm)) = jobs.get(k) else { break };
                *slots[k].lock().unwrap() = Some(time_cell(&cell, algorithm, config));
            });
        }
    });
    let rows = slots.into_iter().map(|s| s.into_inner().unwrap().expect("every job ran")).collect::<Result<_>>()?;
    Ok(BenchReport { rows })
}

fn time_cell(cell: &GenParams, algorithm: Algorithm, config: &BenchConfig) -> Result<BenchRow> {
    let cap = config.timeout.as_secs_f64();
    let mut times = Vec::with_capacity(config.runs);
    let mut timeouts = 0;
    for run in 0..config.runs {
        // A run that hit the cap is still computing in the background; the
        // rest of the cell is recorded at the cap rather than timed against it.
        if timeouts > 0 {
            times.push(cap);
            timeouts += 1;
            continue;
        }
        let instance = generate_instance(&cell.with_seed(cell.seed.wrapping_add(run as u64)))?;
        match time_solve(instance, algorithm, config.epsilon, config.timeout)? {
            Some(seconds) => times.push(seconds),
            None => {
                times.push(cap);
                timeouts += 1;
            }
        }
    }
    let (mean_s, std_s, min_s, p97_s) = summarize(&times);
    Ok(BenchRow {
        algorithm,
        n: cell.n,
        rp: cell.ranger_budget,
        rv: cell.villager_budget,
        runs: config.runs,
        mean_s,
        std_s,
        min_s,
        p97_s,
        timeouts,
    })
}

/// Wall-clock seconds of one solve, or `None` past the timeout.
fn time_solve(instance: Instance, algorithm: Algorithm, epsilon: f64, timeout: Duration) -> Result<Option<f64>> {
    let (tx, rx) = mpsc::channel();
    thread::spawn(move || {
        let start = Instant::now();
        let outcome = match algorithm {
            Algorithm::Tdbs => solve_tdbs(&instance, &TdbsConfig::for_instance(&instance).with_epsilon(epsilon)),
            Algorithm::Hw => solve_hw(&instance),
            Algorithm::Oracle => solve_oracle(&instance),
        };
        let elapsed = start.elapsed().as_secs_f64();
        let _ = tx.send(outcome.map(|_| elapsed));
    });
    match rx.recv_timeout(timeout) {
        Ok(outcome) => Ok(Some(outcome?)),
        Err(mpsc::RecvTimeoutError::Timeout) => Ok(None),
        Err(mpsc::RecvTimeoutError::Disconnected) => Err(PlannerError::invalid("solver thread panicked")),
    }
}

/// Mean, sample standard deviation, minimum and 97th percentile
/// (nearest rank).
pub fn summarize(times: &[f64]) -> (f64, f64, f64, f64) {
    let n = times.len();
    if n == 0 {
        return (0.0, 0.0, 0.0, 0.0);
    }
    let mean = times.iter().sum::<f64>() / n as f64;
    let var = if n > 1 { times.iter().map(|t| (t - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
    let mut sorted = times.to_vec();
    sorted.sort_by(f64::total_cmp);
    let rank = ((0.97 * n as f64).ceil() as usize).clamp(1, n);
    (mean, var.sqrt(), sorted[0], sorted[rank - 1])
}

//! The `patrol` command line.
//!
//! Exit codes: 0 on success, 1 when an input fails to load or validate, 2
//! on a usage error.

use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::Duration;

use anyhow::Context;
use clap::{Args, CommandFactory, Parser, Subcommand};
use patrol_core::tdbs::DEFAULT_EPSILON;
use serde::Serialize;

use crate::analysis::{budget_sweep, compare_settings, effectiveness_grid, tally_changes, terrain_scenario, Costs};
use crate::bench::{generate_instance, run_benchmark, Algorithm, BenchConfig, GenParams, DEFAULT_RUNS};
use crate::io::{load_instance, save_instance, save_result, ResultFile, ScenarioInstance};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INVALID: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "patrol", version, about = "Plan ranger and villager patrols against a strategic poacher")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Solve one instance file and write the result as JSON.
    Solve {
        #[arg(long, value_enum, default_value_t = Algorithm::Hw)]
        algorithm: Algorithm,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        output: PathBuf,
    },
    /// Write a random instance file.
    Gen {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.0)]
        rp: f64,
        #[arg(long, default_value_t = 0)]
        rv: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        output: PathBuf,
    },
    /// Time solvers over a grid of instance sizes and budgets, writing CSV.
    Bench {
        #[arg(long, value_enum, value_delimiter = ',', default_values_t = [Algorithm::Tdbs, Algorithm::Hw])]
        algorithm: Vec<Algorithm>,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_values_t = [0.0])]
        rp: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_values_t = [0])]
        rv: Vec<u32>,
        #[arg(long, default_value_t = DEFAULT_RUNS)]
        runs: usize,
        /// Per-run cap in seconds.
        #[arg(long, default_value_t = 7200.0)]
        timeout: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = DEFAULT_EPSILON)]
        epsilon: f64,
        #[arg(long, default_value_t = 1)]
        threads: usize,
        #[arg(long)]
        output: PathBuf,
    },
    /// Best split of each extra budget between new rangers and villagers.
    Sweep {
        #[command(flatten)]
        scenario: ScenarioArgs,
        #[arg(long, default_value_t = 30)]
        budget_max: u32,
        #[arg(long, default_value_t = 3.0)]
        cost_ranger: f64,
        #[arg(long, default_value_t = 1.0)]
        cost_villager: f64,
        /// CSV with one row per extra budget.
        #[arg(long)]
        output: PathBuf,
    },
    /// Compare the optimum with the scenario's baseline profile.
    Compare {
        #[command(flatten)]
        scenario: ScenarioArgs,
        /// CSV with one row per effectiveness setting.
        #[arg(long)]
        output: PathBuf,
        /// CSV counting, per target, the settings that raise or lower coverage.
        #[arg(long)]
        tally: Option<PathBuf>,
        /// CSV with per-target coverage for every setting.
        #[arg(long)]
        deltas: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct ScenarioArgs {
    #[arg(long)]
    input: PathBuf,
    #[arg(long, value_enum, default_value_t = Algorithm::Hw)]
    algorithm: Algorithm,
    #[arg(long, default_value_t = DEFAULT_EPSILON)]
    epsilon: f64,
    /// Ranger effectiveness; with --e-v, replaces the file's values.
    #[arg(long, requires = "e_v")]
    e_p: Option<f64>,
    #[arg(long, requires = "e_p")]
    e_v: Option<f64>,
    /// Shift effectiveness per target by the file's slope classes.
    #[arg(long)]
    terrain: bool,
}

impl ScenarioArgs {
    fn setting(&self) -> Option<(f64, f64)> {
        self.e_p.zip(self.e_v)
    }

    /// The input scenario at the requested setting.
    fn load(&self) -> anyhow::Result<ScenarioInstance> {
        let scenario = load_instance(&self.input)?;
        let (e_p, e_v) = self
            .setting()
            .unwrap_or((scenario.instance.ranger_effectiveness(), scenario.instance.villager_effectiveness()));
        Ok(match (self.terrain, self.setting()) {
            (true, _) => terrain_scenario(&scenario, e_p, e_v)?,
            (false, Some(_)) => scenario.with_effectiveness(e_p, e_v)?,
            (false, None) => scenario,
        })
    }
}

#[derive(Debug, Serialize)]
struct SettingRow {
    e_p: f64,
    e_v: f64,
    optimal_utility: f64,
    baseline_utility: f64,
    improvement: f64,
    relative: bool,
    attacked: usize,
}

#[derive(Debug, Serialize)]
struct DeltaRow {
    e_p: f64,
    e_v: f64,
    target: usize,
    optimal_coverage: f64,
    baseline_coverage: f64,
    delta: f64,
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return EXIT_OK;
            }
            let _ = e.print();
            eprintln!();
            eprintln!("{}", flag_table(&args));
            return EXIT_USAGE;
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_INVALID
        }
    }
}

/// Help for the subcommand named in `args`, or for the whole program.
fn flag_table(args: &[OsString]) -> String {
    let mut command = Cli::command();
    let name = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| command.get_subcommands().any(|s| s.get_name() == *a))
        .map(str::to_owned);
    match name.and_then(|n| command.find_subcommand_mut(&n).cloned()) {
        Some(mut sub) => sub.render_long_help().to_string(),
        None => command.render_long_help().to_string(),
    }
}

fn execute(command: Command) -> anyhow::Result<()> {
    match command {
        Command::Solve { algorithm, epsilon, input, output } => {
            let scenario = load_instance(&input)?;
            let game = scenario.game()?;
            let result = game.solve(algorithm, epsilon)?;
            let file = ResultFile::new(&game, algorithm, &result)?;
            save_result(&output, &file)?;
            println!(
                "{algorithm}: defender utility {} (attacker {} on target {})",
                result.defender_utility, result.attacker_utility, result.attacked
            );
        }
        Command::Gen { n, rp, rv, seed, output } => {
            let instance = generate_instance(&GenParams::new(n, rp, rv, seed))?;
            save_instance(&output, &ScenarioInstance::plain(instance))?;
            println!("wrote {}", output.display());
        }
        Command::Bench { algorithm, n, rp, rv, runs, timeout, seed, epsilon, threads, output } => {
            if !(timeout.is_finite() && timeout > 0.0) {
                anyhow::bail!("timeout must be a positive number of seconds");
            }
            let mut grid = Vec::new();
            for &n in &n {
                for &rp in &rp {
                    for &rv in &rv {
                        grid.push(GenParams::new(n, rp, rv, seed));
                    }
                }
            }
            let config = BenchConfig {
                algorithms: algorithm,
                runs,
                timeout: Duration::from_secs_f64(timeout),
                epsilon,
                threads,
            };
            let report = run_benchmark(&grid, &config)?;
            let file = std::fs::File::create(&output).with_context(|| format!("creating {}", output.display()))?;
            report.write_csv(file)?;
            for row in &report.rows {
                println!(
                    "{:>6} n={:<5} rp={:<6} rv={:<5} mean {:.6}s std {:.6}s timeouts {}",
                    row.algorithm.to_string(),
                    row.n,
                    row.rp,
                    row.rv,
                    row.mean_s,
                    row.std_s,
                    row.timeouts
                );
            }
        }
        Command::Sweep { scenario, budget_max, cost_ranger, cost_villager, output } => {
            let loaded = scenario.load()?;
            let costs = Costs { ranger: cost_ranger, villager: cost_villager };
            let rows = budget_sweep(&loaded, costs, budget_max, scenario.algorithm, scenario.epsilon)?;
            write_csv(&output, &rows)?;
            for row in &rows {
                println!(
                    "budget {:>3}: +{} rangers +{} villagers -> {}",
                    row.extra_budget, row.rangers_added, row.villagers_added, row.defender_utility
                );
            }
        }
        Command::Compare { scenario, output, tally, deltas } => {
            let base = load_instance(&scenario.input)?;
            let settings = match scenario.setting() {
                Some(s) => vec![s],
                None => effectiveness_grid(),
            };
            let compared = compare_settings(&base, &settings, scenario.terrain, scenario.algorithm, scenario.epsilon)?;
            let rows: Vec<SettingRow> = compared
                .iter()
                .map(|s| SettingRow {
                    e_p: s.e_p,
                    e_v: s.e_v,
                    optimal_utility: s.comparison.optimal.defender_utility,
                    baseline_utility: s.comparison.baseline.defender_utility,
                    improvement: s.comparison.improvement,
                    relative: s.comparison.relative,
                    attacked: s.comparison.optimal.attacked,
                })
                .collect();
            write_csv(&output, &rows)?;
            if let Some(path) = tally {
                write_csv(&path, &tally_changes(&compared))?;
            }
            if let Some(path) = deltas {
                let rows: Vec<DeltaRow> = compared
                    .iter()
                    .flat_map(|s| {
                        let c = &s.comparison;
                        (0..c.coverage_delta.len()).map(move |target| DeltaRow {
                            e_p: s.e_p,
                            e_v: s.e_v,
                            target,
                            optimal_coverage: c.optimal_coverage[target],
                            baseline_coverage: c.baseline_coverage[target],
                            delta: c.coverage_delta[target],
                        })
                    })
                    .collect();
                write_csv(&path, &rows)?;
            }
            let mean = rows.iter().map(|r| r.improvement).sum::<f64>() / rows.len() as f64;
            println!("{} settings, mean improvement {mean:.4}", rows.len());
        }
    }
    Ok(())
}

fn write_csv<T: Serialize>(path: &Path, rows: &[T]) -> anyhow::Result<()> {
    let mut writer = csv::Writer::from_path(path).with_context(|| format!("creating {}", path.display()))?;
    for row in rows {
        writer.serialize(row)?;
    }
    writer.flush()?;
    Ok(())
}

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use ibp_bench::report::{summary_path, write_records, write_summary};
use ibp_bench::{run_bench, verify, BenchConfig, Error, Result, VerifyConfig};
use ibp_core::model::{make_random_scenario, make_tracking_scenario, Scenario};
use ibp_core::riccati::Schedule;
use ibp_core::search::{BudgetConstraint, SearchOptions, Strategy};
use serde::Serialize;

/// Optimal sensor scheduling with information-based pruning.
#[derive(Debug, Parser)]
#[command(name = "ibp", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Schedule one scenario file and print the result as JSON.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value = "ibp")]
        strategy: Strategy,
        #[arg(long = "node-limit")]
        node_limit: Option<u64>,
        /// Sensors measuring together at every step.
        #[arg(long = "subset-size", default_value_t = 1)]
        subset_size: usize,
        /// Allow at most this many measurements; adds the "no measurement" action.
        #[arg(long)]
        budget: Option<u64>,
    },
    /// Monte Carlo sweep described by a JSON config; writes CSV.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Per-run CSV (overrides the config). Without any output path the
        /// runs go to stdout and the summary to stderr.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long = "node-limit")]
        node_limit: Option<u64>,
    },
    /// Print a generated scenario as JSON.
    Gen {
        /// Constant-velocity tracking scenario with the eight-sensor bank (default).
        #[arg(long, conflicts_with = "random")]
        tracking: bool,
        /// Random time-variant scenario.
        #[arg(long)]
        random: bool,
        #[arg(long = "N")]
        horizon: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sampling interval of the tracking model.
        #[arg(long = "T", default_value_t = 1.0)]
        period: f64,
        /// Diffusion strength of the tracking model.
        #[arg(long, default_value_t = 0.02)]
        q: f64,
        #[arg(long = "nx", default_value_t = 4)]
        n_x: usize,
        #[arg(long = "S", default_value_t = 4)]
        sensors: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Compare IBP with exhaustive search on random small instances.
    Verify {
        #[arg(long, default_value_t = 50)]
        trials: usize,
        #[arg(long = "max-S", default_value_t = 4)]
        max_sensors: usize,
        #[arg(long = "max-N", default_value_t = 5)]
        max_horizon: usize,
        #[arg(long = "max-nx", default_value_t = 4)]
        max_states: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
}

#[derive(Serialize)]
struct RunOutput<'a> {
    strategy: Strategy,
    schedule: &'a Schedule,
    cost: f64,
    per_step: &'a [f64],
    expanded_nodes: u64,
    elapsed_s: f64,
}

fn create(path: &PathBuf) -> Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new).map_err(|source| Error::Io {
        path: path.clone(),
        source,
    })
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<()> {
    match out {
        Some(path) => {
            let mut w = create(path)?;
            writeln!(w, "{text}").and_then(|_| w.flush()).map_err(|source| Error::Io {
                path: path.clone(),
                source,
            })
        }
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Command) -> Result<ExitCode> {
    match cmd {
        Command::Run {
            scenario,
            strategy,
            node_limit,
            subset_size,
            budget,
        } => {
            let text = std::fs::read_to_string(&scenario).map_err(|source| Error::Io {
                path: scenario.clone(),
                source,
            })?;
            let scenario = Scenario::from_json(&text)?;
            let options = SearchOptions {
                subset_size,
                node_limit,
                virtual_sensor: budget.is_some(),
                budget: budget.map(|k| BudgetConstraint::max_measurements(k, scenario.horizon(), scenario.num_sensors())),
                ..SearchOptions::default()
            };
            let result = strategy.run(&scenario, &options)?;
            let out = RunOutput {
                strategy: result.strategy,
                schedule: &result.schedule,
                cost: result.cost.total,
                per_step: &result.cost.per_step,
                expanded_nodes: result.expanded_nodes,
                elapsed_s: result.elapsed,
            };
            println!("{}", serde_json::to_string_pretty(&out)?);
        }
        Command::Bench {
            config,
            out,
            node_limit,
        } => {
            let mut config = BenchConfig::load(&config)?;
            if out.is_some() {
                config.output = out;
            }
            if node_limit.is_some() {
                config.node_limit = node_limit;
            }
            let report = run_bench(&config)?;
            match &config.output {
                Some(path) => {
                    write_records(create(path)?, &report.records)?;
                    let summary = summary_path(path);
                    write_summary(create(&summary)?, &report.summary)?;
                    eprintln!("wrote {} and {}", path.display(), summary.display());
                }
                None => {
                    write_records(io::stdout().lock(), &report.records)?;
                    write_summary(io::stderr().lock(), &report.summary)?;
                }
            }
        }
        Command::Gen {
            tracking: _,
            random,
            horizon,
            seed,
            period,
            q,
            n_x,
            sensors,
            out,
        } => {
            let scenario = if random {
                make_random_scenario(n_x, sensors, horizon, seed)?
            } else {
                make_tracking_scenario(period, q, horizon, seed)?
            };
            emit(&scenario.to_json()?, out.as_ref())?;
        }
        Command::Verify {
            trials,
            max_sensors,
            max_horizon,
            max_states,
            seed,
        } => {
            if trials == 0 || max_sensors == 0 || max_horizon == 0 || max_states == 0 {
                return Err(Error::Config("trials and every --max-* bound must be at least 1".into()));
            }
            let report = verify(&VerifyConfig {
                trials,
                max_states,
                max_sensors,
                max_horizon,
                seed,
            })?;
            println!("{report}");
            if !report.all_ok() {
                return Ok(ExitCode::FAILURE);
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

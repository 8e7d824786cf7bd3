//! Monte Carlo sweep over horizon lengths.

use std::time::Instant;

use ibp_core::model::{make_random_scenario, make_tracking_scenario, Scenario};
use ibp_core::search::Strategy;
use rayon::prelude::*;
use serde::Serialize;

use crate::config::{BenchConfig, ScenarioSource};
use crate::error::Result;

/// Environment variable capping the number of worker threads; `0` or unset
/// lets rayon decide.
pub const THREADS_ENV: &str = "IBP_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Ok,
    /// The node limit was hit; cost is the best schedule found before that,
    /// if any.
    NodeLimit,
    /// Exhaustive enumeration refused an instance above its size cap.
    TooLarge,
    Infeasible,
    Error,
}

/// One strategy on one Monte Carlo instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    #[serde(rename = "N")]
    pub horizon: usize,
    pub run: usize,
    pub seed: u64,
    pub strategy: Strategy,
    pub cost: Option<f64>,
    pub expanded_nodes: Option<u64>,
    pub elapsed_s: f64,
    /// `cost − cost(IBP)` on the same instance.
    pub deviation: Option<f64>,
    pub status: Status,
}

/// Means over the successful runs of one `(N, strategy)` pair.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SummaryRow {
    #[serde(rename = "N")]
    pub horizon: usize,
    pub strategy: Strategy,
    pub runs: usize,
    pub runs_ok: usize,
    pub mean_cost: Option<f64>,
    pub mean_expanded_nodes: Option<f64>,
    pub mean_elapsed_s: Option<f64>,
    pub mean_deviation: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct BenchReport {
    /// Sorted by `(N, run, strategy)`.
    pub records: Vec<BenchRecord>,
    /// Sorted by `(N, strategy)`.
    pub summary: Vec<SummaryRow>,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Seed of run `run` at horizon `horizon`: `base ⊕ hash(N, r)`.
pub fn run_seed(base: u64, horizon: usize, run: usize) -> u64 {
    base ^ splitmix64(splitmix64(horizon as u64) ^ run as u64)
}

pub(crate) fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(base ^ splitmix64(index))
}

enum Source {
    Tracking { period: f64, q: f64 },
    Random { n_x: usize, sensors: usize },
    Fixed(Scenario),
}

impl Source {
    fn new(source: &ScenarioSource) -> Result<Self> {
        Ok(match source {
            ScenarioSource::Tracking { period, q } => Source::Tracking {
                period: *period,
                q: *q,
            },
            ScenarioSource::Random { n_x, sensors } => Source::Random {
                n_x: *n_x,
                sensors: *sensors,
            },
            ScenarioSource::File(path) => Source::Fixed(Scenario::from_json(&crate::error::read_file(path)?)?),
        })
    }

    fn instance(&self, horizon: usize, seed: u64) -> Result<Scenario> {
        Ok(match self {
            Source::Tracking { period, q } => make_tracking_scenario(*period, *q, horizon, seed)?,
            Source::Random { n_x, sensors } => make_random_scenario(*n_x, *sensors, horizon, seed)?,
            Source::Fixed(s) => s.truncated(horizon)?,
        })
    }
}

fn worker_threads() -> usize {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse().ok())
        .unwrap_or(0)
}

fn run_instance(config: &BenchConfig, source: &Source, horizon: usize, run: usize) -> Result<Vec<BenchRecord>> {
    let seed = run_seed(config.base_seed, horizon, run);
    let scenario = source.instance(horizon, seed)?;
    let options = config.search_options(&scenario);
    let mut records: Vec<BenchRecord> = config
        .strategies
        .iter()
        .map(|&strategy| {
            let start = Instant::now();
            let outcome = strategy.run(&scenario, &options);
            let elapsed_s = start.elapsed().as_secs_f64();
            let (status, cost, expanded_nodes) = match outcome {
                Ok(r) => (Status::Ok, Some(r.cost.total), Some(r.expanded_nodes)),
                Err(ibp_core::Error::NodeLimit { limit, best }) => (
                    Status::NodeLimit,
                    best.as_ref().map(|b| b.cost.total),
                    Some(best.map_or(limit, |b| b.expanded_nodes)),
                ),
                Err(ibp_core::Error::InstanceTooLarge { .. }) => (Status::TooLarge, None, None),
                Err(ibp_core::Error::Infeasible) => (Status::Infeasible, None, None),
                Err(_) => (Status::Error, None, None),
            };
            BenchRecord {
                horizon,
                run,
                seed,
                strategy,
                cost,
                expanded_nodes,
                elapsed_s,
                deviation: None,
                status,
            }
        })
        .collect();
    let reference = records
        .iter()
        .find(|r| r.strategy == Strategy::Ibp && r.status == Status::Ok)
        .and_then(|r| r.cost);
    if let Some(best) = reference {
        for r in records.iter_mut().filter(|r| r.status == Status::Ok) {
            r.deviation = r.cost.map(|c| c - best);
        }
    }
    Ok(records)
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    (n > 0).then(|| sum / n as f64)
}

/// Means per `(N, strategy)` over records with status `ok`, accumulated in
/// record order.
pub fn summarize(records: &[BenchRecord]) -> Vec<SummaryRow> {
    let mut keys: Vec<(usize, Strategy)> = records.iter().map(|r| (r.horizon, r.strategy)).collect();
    keys.sort();
    keys.dedup();
    keys.into_iter()
        .map(|(horizon, strategy)| {
            let group: Vec<&BenchRecord> = records
                .iter()
                .filter(|r| r.horizon == horizon && r.strategy == strategy)
                .collect();
            let ok: Vec<&BenchRecord> = group.iter().copied().filter(|r| r.status == Status::Ok).collect();
            SummaryRow {
                horizon,
                strategy,
                runs: group.len(),
                runs_ok: ok.len(),
                mean_cost: mean(ok.iter().filter_map(|r| r.cost)),
                mean_expanded_nodes: mean(ok.iter().filter_map(|r| r.expanded_nodes.map(|n| n as f64))),
                mean_elapsed_s: mean(ok.iter().map(|r| r.elapsed_s)),
                mean_deviation: mean(ok.iter().filter_map(|r| r.deviation)),
            }
        })
        .collect()
}

/// Runs every strategy on `runs` instances per horizon.
///
/// Instances run in parallel (see [`THREADS_ENV`]); the output does not
/// depend on scheduling apart from the elapsed-time fields.
pub fn run_bench(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let source = Source::new(&config.scenario)?;
    let jobs: Vec<(usize, usize)> = config
        .horizons
        .iter()
        .flat_map(|&n| (0..config.runs).map(move |r| (n, r)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(worker_threads()).build()?;
    let batches = pool.install(|| {
        jobs.par_iter()
            .map(|&(n, r)| run_instance(config, &source, n, r))
            .collect::<Result<Vec<_>>>()
    })?;
    let mut records: Vec<BenchRecord> = batches.into_iter().flatten().collect();
    records.sort_by_key(|r| (r.horizon, r.run, r.strategy));
    let summary = summarize(&records);
    Ok(BenchReport { records, summary })
}

//! Benchmark configuration, read from JSON.
//!
//! ```json
//! {
//!   "horizons": [1, 2, 3, 4],
//!   "runs": 10,
//!   "base_seed": 0,
//!   "strategies": ["greedy", "zb", "sip", "ibp"],
//!   "scenario": { "tracking": { "period": 1.0, "q": 0.02 } },
//!   "output": "results.csv"
//! }
//! ```
//!
//! `scenario` is one of `{"tracking": {"period", "q"}}`,
//! `{"random": {"n_x", "sensors"}}` or `{"file": "path/to/scenario.json"}`.

use std::path::{Path, PathBuf};

use ibp_core::model::Scenario;
use ibp_core::search::{BudgetConstraint, SearchOptions, Strategy};
use serde::{Deserialize, Serialize};

use crate::error::{read_file, Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioSource {
    /// Constant-velocity target with the eight-sensor bank; `R` is redrawn
    /// for every run.
    Tracking {
        #[serde(default = "default_period")]
        period: f64,
        #[serde(default = "default_q")]
        q: f64,
    },
    Random { n_x: usize, sensors: usize },
    /// A fixed scenario, truncated to each horizon. The seed column is still
    /// written but has no effect.
    File(PathBuf),
}

fn default_period() -> f64 {
    1.0
}

fn default_q() -> f64 {
    0.02
}

impl Default for ScenarioSource {
    fn default() -> Self {
        ScenarioSource::Tracking {
            period: default_period(),
            q: default_q(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub horizons: Vec<usize>,
    /// Monte Carlo runs per horizon.
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub strategies: Vec<Strategy>,
    #[serde(default)]
    pub scenario: ScenarioSource,
    /// Per-run CSV; the summary goes next to it with a `.summary.csv` suffix.
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub node_limit: Option<u64>,
    #[serde(default = "default_subset")]
    pub subset_size: usize,
    /// Enables the virtual sensor and allows at most this many real
    /// measurements over the horizon.
    #[serde(default)]
    pub measurement_budget: Option<u64>,
}

fn default_subset() -> usize {
    1
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let config: BenchConfig = serde_json::from_str(text)?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_file(path)?)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.into()));
        if self.runs == 0 {
            return bad("runs must be at least 1");
        }
        if self.horizons.is_empty() {
            return bad("horizons must not be empty");
        }
        if self.horizons.contains(&0) {
            return bad("horizons must be positive");
        }
        if self.strategies.is_empty() {
            return bad("strategies must not be empty");
        }
        if self.subset_size == 0 {
            return bad("subset_size must be at least 1");
        }
        if let ScenarioSource::Random { n_x, sensors } = self.scenario {
            if n_x == 0 || sensors == 0 {
                return bad("random scenarios need n_x >= 1 and sensors >= 1");
            }
        }
        Ok(())
    }

    pub(crate) fn search_options(&self, scenario: &Scenario) -> SearchOptions {
        SearchOptions {
            subset_size: self.subset_size,
            budget: self
                .measurement_budget
                .map(|k| BudgetConstraint::max_measurements(k, scenario.horizon(), scenario.num_sensors())),
            virtual_sensor: self.measurement_budget.is_some(),
            node_limit: self.node_limit,
            ..SearchOptions::default()
        }
    }
}

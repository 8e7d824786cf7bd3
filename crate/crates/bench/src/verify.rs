//! Randomized check of IBP against exhaustive enumeration.

use std::fmt;

use ibp_core::model::make_random_scenario;
use ibp_core::search::{exhaustive_search, ibp_search, SearchOptions};

use crate::error::Result;
use crate::runner::derive_seed;

/// Relative tolerance on the total cost.
pub const VERIFY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyConfig {
    pub trials: usize,
    pub max_states: usize,
    pub max_sensors: usize,
    pub max_horizon: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub index: usize,
    pub n_x: usize,
    pub sensors: usize,
    pub horizon: usize,
    pub seed: u64,
    pub oracle_cost: f64,
    pub ibp_cost: f64,
    pub oracle_nodes: u64,
    pub ibp_nodes: u64,
}

impl Trial {
    pub fn agrees(&self) -> bool {
        let scale = 1f64.max(self.oracle_cost.abs()).max(self.ibp_cost.abs());
        (self.oracle_cost - self.ibp_cost).abs() <= VERIFY_TOL * scale
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyReport {
    pub trials: Vec<Trial>,
}

impl VerifyReport {
    pub fn passed(&self) -> usize {
        self.trials.iter().filter(|t| t.agrees()).count()
    }

    pub fn all_ok(&self) -> bool {
        self.passed() == self.trials.len()
    }
}

impl fmt::Display for VerifyReport {
    /// One line per mismatch, then `passed/total OK`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in self.trials.iter().filter(|t| !t.agrees()) {
            writeln!(
                f,
                "MISMATCH trial {} (n_x={}, S={}, N={}, seed={}): exhaustive {} vs ibp {}",
                t.index, t.n_x, t.sensors, t.horizon, t.seed, t.oracle_cost, t.ibp_cost
            )?;
        }
        write!(f, "{}/{} OK", self.passed(), self.trials.len())
    }
}

fn pick(h: u64, shift: u32, max: usize) -> usize {
    1 + ((h >> shift) % max.max(1) as u64) as usize
}

pub fn verify(config: &VerifyConfig) -> Result<VerifyReport> {
    let options = SearchOptions::default();
    let trials = (0..config.trials)
        .map(|index| {
            let seed = derive_seed(config.seed, index as u64);
            let n_x = pick(seed, 0, config.max_states);
            let sensors = pick(seed, 16, config.max_sensors);
            let horizon = pick(seed, 32, config.max_horizon);
            let scenario = make_random_scenario(n_x, sensors, horizon, seed)?;
            let oracle = exhaustive_search(&scenario, &options)?;
            let ibp = ibp_search(&scenario, &options)?;
            Ok(Trial {
                index,
                n_x,
                sensors,
                horizon,
                seed,
                oracle_cost: oracle.cost.total,
                ibp_cost: ibp.cost.total,
                oracle_nodes: oracle.expanded_nodes,
                ibp_nodes: ibp.expanded_nodes,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(VerifyReport { trials })
}

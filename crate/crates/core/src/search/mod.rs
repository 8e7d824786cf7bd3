//! Search strategies over the schedule tree.
//!
//! The tree has depth `N`; every node at depth `k` carries the covariance
//! reached by its partial schedule. Strategies differ in how much of it they
//! visit:
//!
//! | strategy     | optimal | pruning                                          |
//! |--------------|---------|--------------------------------------------------|
//! | `Exhaustive` | yes     | none                                             |
//! | `Greedy`     | no      | keeps only the cheapest child                    |
//! | `Zb`         | yes     | branch-and-bound, zero bound for the remainder   |
//! | `Sip`        | yes     | `Zb` plus dominated-sensor filtering             |
//! | `Ibp`        | yes     | `Sip` with the bounding-sensor lower bound       |
//! | `Cov`        | yes     | level-wise covariance dominance                  |
//!
//! `expanded_nodes` counts nodes whose children were generated; the root
//! counts, leaves do not.

mod branch;
mod budget;
mod context;
mod cov;
mod exhaustive;
mod greedy;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{Scenario, SensorInfoMatrix};
use crate::psd::{psd_compare, DEFAULT_RIDGE, DEFAULT_TOL};
use crate::riccati::{CostValue, Schedule};

pub use branch::{branch_and_bound, BranchConfig, LowerBound, NodeVisit};
pub use budget::BudgetConstraint;
pub use context::{Node, SearchContext};
pub use cov::cov_search;
pub use exhaustive::exhaustive_search;
pub use greedy::greedy_search;

/// Absolute margin in the global-bound test: a child is pruned when its lower
/// bound is at least `J_min − BB_MARGIN`.
pub const BB_MARGIN: f64 = 1e-12;

/// Leaf cap for exhaustive enumeration when no node limit is given.
pub const DEFAULT_EXHAUSTIVE_LIMIT: u64 = 10_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Strategy {
    Exhaustive,
    Greedy,
    Zb,
    Cov,
    Sip,
    Ibp,
}

impl Strategy {
    pub const ALL: [Strategy; 6] = [
        Strategy::Exhaustive,
        Strategy::Greedy,
        Strategy::Zb,
        Strategy::Cov,
        Strategy::Sip,
        Strategy::Ibp,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Exhaustive => "exhaustive",
            Strategy::Greedy => "greedy",
            Strategy::Zb => "zb",
            Strategy::Cov => "cov",
            Strategy::Sip => "sip",
            Strategy::Ibp => "ibp",
        }
    }

    pub fn is_optimal(self) -> bool {
        self != Strategy::Greedy
    }

    pub fn run(self, scenario: &Scenario, options: &SearchOptions) -> Result<SearchResult> {
        match self {
            Strategy::Exhaustive => exhaustive_search(scenario, options),
            Strategy::Greedy => greedy_search(scenario, options),
            Strategy::Zb => zb_search(scenario, options),
            Strategy::Cov => cov_search(scenario, options),
            Strategy::Sip => sip_search(scenario, options),
            Strategy::Ibp => ibp_search(scenario, options),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::InvalidOptions(format!("unknown strategy `{s}`")))
    }
}

/// Knobs shared by every strategy.
#[derive(Debug, Clone)]
pub struct SearchOptions {
    /// Sensors measuring per step; `1` is classic single-sensor scheduling.
    pub subset_size: usize,
    pub budget: Option<BudgetConstraint>,
    /// Adds the zero-information, zero-cost "no measurement" action.
    pub virtual_sensor: bool,
    /// Relative tolerance for PSD comparisons.
    pub tol: f64,
    /// Ridge for simultaneous diagonalization in the bounding sensor.
    pub ridge: f64,
    pub node_limit: Option<u64>,
}

impl Default for SearchOptions {
    fn default() -> Self {
        SearchOptions {
            subset_size: 1,
            budget: None,
            virtual_sensor: false,
            tol: DEFAULT_TOL,
            ridge: DEFAULT_RIDGE,
            node_limit: None,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SearchResult {
    pub strategy: Strategy,
    pub schedule: Schedule,
    pub cost: CostValue,
    pub expanded_nodes: u64,
    /// Wall time in seconds.
    pub elapsed: f64,
}

/// Branch-and-bound with the zero bound and no sensor filtering.
pub fn zb_search(scenario: &Scenario, options: &SearchOptions) -> Result<SearchResult> {
    branch_and_bound(scenario, options, BranchConfig::ZB, |_| {})
}

/// Zero-bound branch-and-bound plus dominated-sensor filtering.
pub fn sip_search(scenario: &Scenario, options: &SearchOptions) -> Result<SearchResult> {
    branch_and_bound(scenario, options, BranchConfig::SIP, |_| {})
}

/// Information-based pruning: dominated-sensor filtering and the
/// bounding-sensor lower bound inside depth-first branch-and-bound.
pub fn ibp_search(scenario: &Scenario, options: &SearchOptions) -> Result<SearchResult> {
    branch_and_bound(scenario, options, BranchConfig::IBP, |_| {})
}

/// Indices of the maximal elements under `prunes(i, j)` ("i may replace j").
///
/// Candidates are scanned in order; `j` is dropped when a still-surviving
/// `i ≠ j` prunes it, unless `j` prunes `i` back and `j` comes first. The
/// result is never empty.
pub(crate) fn maximal_elements(candidates: &[usize], mut prunes: impl FnMut(usize, usize) -> bool) -> Vec<usize> {
    let mut alive = vec![true; candidates.len()];
    for jpos in 0..candidates.len() {
        let j = candidates[jpos];
        let removed = candidates.iter().enumerate().any(|(ipos, &i)| {
            ipos != jpos && alive[ipos] && prunes(i, j) && (ipos < jpos || !prunes(j, i))
        });
        if removed {
            alive[jpos] = false;
        }
    }
    candidates
        .iter()
        .zip(alive)
        .filter_map(|(&c, keep)| keep.then_some(c))
        .collect()
}

/// Ids of sensors not dominated by another sensor's information matrix.
///
/// Equal matrices keep the smaller id.
pub fn dominated_sensor_filter(sims: &[SensorInfoMatrix], tol: f64) -> Result<Vec<usize>> {
    let n = sims.len();
    let mut order = vec![vec![false; n]; n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                order[i][j] = psd_compare(&sims[i].m, &sims[j].m, tol)?.is_ge();
            }
        }
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by_key(|&i| sims[i].sensor_id);
    Ok(maximal_elements(&idx, |i, j| order[i][j])
        .into_iter()
        .map(|i| sims[i].sensor_id)
        .collect())
}

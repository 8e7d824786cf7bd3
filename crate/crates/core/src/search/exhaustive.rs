use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::psd::SymMatrix;
use crate::riccati::total_cost;
use crate::search::context::{Node, SearchContext};
use crate::search::{SearchOptions, SearchResult, Strategy, DEFAULT_EXHAUSTIVE_LIMIT};

struct Enumeration<'c, 'a> {
    ctx: &'c SearchContext<'a>,
    path: Vec<usize>,
    best_cost: f64,
    best_path: Option<Vec<usize>>,
    expanded: u64,
}

impl Enumeration<'_, '_> {
    fn visit(&mut self, node: &Node, c: &SymMatrix, known: f64) -> Result<()> {
        let scenario = self.ctx.scenario;
        let k = node.step;
        if k == scenario.horizon() {
            // strict comparison keeps the lexicographically first optimum
            if known < self.best_cost {
                self.best_cost = known;
                self.best_path = Some(self.path.clone());
            }
            return Ok(());
        }
        self.expanded += 1;
        for a in self.ctx.feasible_children(node) {
            let next_c = scenario.step_covariance(c, self.ctx.sim(k, a), k)?;
            let next_known = known + scenario.step_cost(&next_c, k);
            self.path.push(a);
            let res = self.visit(&self.ctx.child(node, a), &next_c, next_known);
            self.path.pop();
            res?;
        }
        Ok(())
    }
}

/// Enumerates every schedule. Intended as the reference oracle on small
/// instances; refuses trees with more leaves than the node limit.
pub fn exhaustive_search(scenario: &Scenario, options: &SearchOptions) -> Result<SearchResult> {
    let start = Instant::now();
    let ctx = SearchContext::new(scenario, options)?;
    let limit = options.node_limit.unwrap_or(DEFAULT_EXHAUSTIVE_LIMIT);
    let leaves = (ctx.actions().len() as u128).saturating_pow(scenario.horizon() as u32);
    if leaves > u128::from(limit) {
        return Err(Error::InstanceTooLarge { size: leaves, limit });
    }
    let root = ctx.root();
    if !ctx.is_completable(&root) {
        return Err(Error::Infeasible);
    }
    let mut e = Enumeration {
        ctx: &ctx,
        path: Vec::with_capacity(scenario.horizon()),
        best_cost: f64::INFINITY,
        best_path: None,
        expanded: 0,
    };
    e.visit(&root, &scenario.c0, 0.0)?;
    let schedule = ctx.schedule(&e.best_path.ok_or(Error::Infeasible)?);
    Ok(SearchResult {
        strategy: Strategy::Exhaustive,
        cost: total_cost(scenario, &schedule)?,
        schedule,
        expanded_nodes: e.expanded,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

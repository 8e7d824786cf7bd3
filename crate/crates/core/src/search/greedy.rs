use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::riccati::total_cost;
use crate::search::context::SearchContext;
use crate::search::{SearchOptions, SearchResult, Strategy};

/// One-step lookahead: at each step take the action with the smallest
/// immediate cost. Ties go to the first action in id order.
pub fn greedy_search(scenario: &Scenario, options: &SearchOptions) -> Result<SearchResult> {
    let start = Instant::now();
    let ctx = SearchContext::new(scenario, options)?;
    let mut node = ctx.root();
    if !ctx.is_completable(&node) {
        return Err(Error::Infeasible);
    }
    let mut c = scenario.c0.clone();
    let mut path = Vec::with_capacity(scenario.horizon());
    let mut expanded = 0;
    for k in 0..scenario.horizon() {
        expanded += 1;
        let mut best: Option<(f64, usize, _)> = None;
        for a in ctx.feasible_children(&node) {
            let next = scenario.step_covariance(&c, ctx.sim(k, a), k)?;
            let cost = scenario.step_cost(&next, k);
            if best.as_ref().is_none_or(|(b, _, _)| cost < *b) {
                best = Some((cost, a, next));
            }
        }
        let (_, a, next) = best.ok_or(Error::Infeasible)?;
        node = ctx.child(&node, a);
        c = next;
        path.push(a);
    }
    let schedule = ctx.schedule(&path);
    Ok(SearchResult {
        strategy: Strategy::Greedy,
        cost: total_cost(scenario, &schedule)?,
        schedule,
        expanded_nodes: expanded,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

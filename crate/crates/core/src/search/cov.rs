use std::time::Instant;

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::psd::{psd_compare, SymMatrix};
use crate::riccati::total_cost;
use crate::search::context::{Node, SearchContext};
use crate::search::{maximal_elements, SearchOptions, SearchResult, Strategy};

struct LevelNode {
    node: Node,
    path: Vec<usize>,
    covariance: SymMatrix,
    known: f64,
}

// Necessary condition for `a ⪯ b`: every diagonal entry of `b − a` is at
// least the smallest eigenvalue.
fn diagonal_below(a: &SymMatrix, b: &SymMatrix, tol: f64) -> bool {
    let slack = tol * 1f64.max(a.inf_norm()).max(b.inf_norm());
    (0..a.dim()).all(|i| b[(i, i)] - a[(i, i)] >= -slack)
}

/// Breadth-first search with covariance dominance.
///
/// Every surviving node of a level is expanded with every feasible action.
/// Among the new level, a node is dropped when another node has a covariance
/// it dominates, no larger accumulated cost and no larger budget usage; exact
/// ties keep the lexicographically smaller partial schedule.
pub fn cov_search(scenario: &Scenario, options: &SearchOptions) -> Result<SearchResult> {
    let start = Instant::now();
    let ctx = SearchContext::new(scenario, options)?;
    let root = ctx.root();
    if !ctx.is_completable(&root) {
        return Err(Error::Infeasible);
    }
    let horizon = scenario.horizon();
    let mut level = vec![LevelNode {
        node: root,
        path: Vec::new(),
        covariance: scenario.c0.clone(),
        known: 0.0,
    }];
    let mut expanded = 0u64;
    for k in 0..horizon {
        expanded += level.len() as u64;
        let mut next = Vec::new();
        for parent in &level {
            for a in ctx.feasible_children(&parent.node) {
                let covariance = scenario.step_covariance(&parent.covariance, ctx.sim(k, a), k)?;
                let known = parent.known + scenario.step_cost(&covariance, k);
                let mut path = parent.path.clone();
                path.push(a);
                next.push(LevelNode {
                    node: ctx.child(&parent.node, a),
                    path,
                    covariance,
                    known,
                });
            }
        }
        if let Some(limit) = options.node_limit {
            if next.len() as u64 > limit {
                return Err(Error::NodeLimit { limit, best: None });
            }
        }
        // parents are in lexicographic order, so `next` is too
        if k + 1 < horizon {
            let idx: Vec<usize> = (0..next.len()).collect();
            let tol = options.tol;
            let keep = maximal_elements(&idx, |i, j| {
                let (a, b) = (&next[i], &next[j]);
                let cheaper = a.known <= b.known + tol * 1f64.max(b.known.abs());
                let frugal = a.node.usage.iter().zip(&b.node.usage).all(|(x, y)| x <= y);
                cheaper
                    && frugal
                    && diagonal_below(&a.covariance, &b.covariance, tol)
                    && psd_compare(&a.covariance, &b.covariance, tol).is_ok_and(|o| o.is_le())
            });
            let mut keep = keep.into_iter().peekable();
            next = next
                .into_iter()
                .enumerate()
                .filter_map(|(i, n)| {
                    if keep.peek() == Some(&i) {
                        keep.next();
                        Some(n)
                    } else {
                        None
                    }
                })
                .collect();
        }
        level = next;
    }
    let best = level
        .iter()
        .fold(None::<&LevelNode>, |best, n| match best {
            Some(b) if b.known <= n.known => Some(b),
            _ => Some(n),
        })
        .ok_or(Error::Infeasible)?;
    let schedule = ctx.schedule(&best.path);
    Ok(SearchResult {
        strategy: Strategy::Cov,
        cost: total_cost(scenario, &schedule)?,
        schedule,
        expanded_nodes: expanded,
        elapsed: start.elapsed().as_secs_f64(),
    })
}

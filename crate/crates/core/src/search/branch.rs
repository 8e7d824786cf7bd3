use std::time::Instant;

use crate::bounding::{lower_bound_remaining, BoundingSim};
use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::psd::SymMatrix;
use crate::riccati::{total_cost, Schedule};
use crate::search::context::{Node, SearchContext};
use crate::search::{SearchOptions, SearchResult, Strategy, BB_MARGIN};

/// Lower bound used for the unknown remainder of a partial schedule.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LowerBound {
    Zero,
    BoundingSensor,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BranchConfig {
    pub bound: LowerBound,
    /// Drop children whose information matrix is dominated.
    pub dominance: bool,
}

impl BranchConfig {
    pub const ZB: BranchConfig = BranchConfig {
        bound: LowerBound::Zero,
        dominance: false,
    };
    pub const SIP: BranchConfig = BranchConfig {
        bound: LowerBound::Zero,
        dominance: true,
    };
    pub const IBP: BranchConfig = BranchConfig {
        bound: LowerBound::BoundingSensor,
        dominance: true,
    };

    fn strategy(self) -> Strategy {
        match (self.bound, self.dominance) {
            (LowerBound::Zero, false) => Strategy::Zb,
            (LowerBound::Zero, true) => Strategy::Sip,
            (LowerBound::BoundingSensor, _) => Strategy::Ibp,
        }
    }
}

/// An expanded node, reported to the observer before its children are
/// generated.
pub struct NodeVisit<'v> {
    ctx: &'v SearchContext<'v>,
    path: &'v [usize],
    pub covariance: &'v SymMatrix,
    /// Cost of the steps already fixed by the prefix.
    pub known_cost: f64,
}

impl NodeVisit<'_> {
    pub fn depth(&self) -> usize {
        self.path.len()
    }

    /// Partial schedule leading to this node.
    pub fn prefix(&self) -> Schedule {
        self.ctx.schedule(self.path)
    }
}

struct Child {
    action: usize,
    covariance: SymMatrix,
    known: f64,
    bound: f64,
}

struct Search<'c, 'a, F> {
    ctx: &'c SearchContext<'a>,
    config: BranchConfig,
    bounds: Option<BoundingSim>,
    observer: F,
    path: Vec<usize>,
    best_cost: f64,
    best_path: Option<Vec<usize>>,
    expanded: u64,
}

impl<F: FnMut(&NodeVisit<'_>)> Search<'_, '_, F> {
    fn visit(&mut self, node: &Node, c: &SymMatrix, known: f64) -> Result<()> {
        let scenario = self.ctx.scenario;
        let k = node.step;
        if k == scenario.horizon() {
            if known < self.best_cost {
                self.best_cost = known;
                self.best_path = Some(self.path.clone());
            }
            return Ok(());
        }
        if let Some(limit) = self.ctx.options.node_limit {
            if self.expanded >= limit {
                return Err(Error::NodeLimit { limit, best: None });
            }
        }
        self.expanded += 1;
        (self.observer)(&NodeVisit {
            ctx: self.ctx,
            path: &self.path,
            covariance: c,
            known_cost: known,
        });

        let mut candidates = self.ctx.feasible_children(node);
        if self.config.dominance {
            candidates = self.ctx.filter_dominated(k, &candidates);
        }
        let mut children = Vec::with_capacity(candidates.len());
        for a in candidates {
            let covariance = scenario.step_covariance(c, self.ctx.sim(k, a), k)?;
            let known = known + scenario.step_cost(&covariance, k);
            let remainder = match &self.bounds {
                Some(b) => lower_bound_remaining(&covariance, k + 1, scenario, b)?,
                None => 0.0,
            };
            children.push(Child {
                action: a,
                covariance,
                known,
                bound: known + remainder,
            });
        }
        children.sort_by(|x, y| x.bound.total_cmp(&y.bound));

        for child in children {
            if child.bound >= self.best_cost - BB_MARGIN {
                break;
            }
            self.path.push(child.action);
            let next = self.ctx.child(node, child.action);
            let res = self.visit(&next, &child.covariance, child.known);
            self.path.pop();
            res?;
        }
        Ok(())
    }
}

/// Depth-first branch-and-bound over the schedule tree.
///
/// At every node the feasible children are (optionally) reduced to the
/// non-dominated ones, each child's covariance is propagated, the child is
/// scored by its known cost plus a lower bound on the remainder, children are
/// visited cheapest bound first, and a child is pruned once its bound reaches
/// the best complete cost found so far. `observer` sees every expanded node.
pub fn branch_and_bound<F>(
    scenario: &Scenario,
    options: &SearchOptions,
    config: BranchConfig,
    observer: F,
) -> Result<SearchResult>
where
    F: FnMut(&NodeVisit<'_>),
{
    let start = Instant::now();
    let ctx = SearchContext::new(scenario, options)?;
    let root = ctx.root();
    if !ctx.is_completable(&root) {
        return Err(Error::Infeasible);
    }
    let bounds = match config.bound {
        LowerBound::Zero => None,
        LowerBound::BoundingSensor => Some(ctx.bounding_sensor()?),
    };
    let mut search = Search {
        ctx: &ctx,
        config,
        bounds,
        observer,
        path: Vec::with_capacity(scenario.horizon()),
        best_cost: f64::INFINITY,
        best_path: None,
        expanded: 0,
    };
    let outcome = search.visit(&root, &scenario.c0, 0.0);
    let finish = |path: &[usize], expanded: u64| -> Result<SearchResult> {
        let schedule = ctx.schedule(path);
        Ok(SearchResult {
            strategy: config.strategy(),
            cost: total_cost(scenario, &schedule)?,
            schedule,
            expanded_nodes: expanded,
            elapsed: start.elapsed().as_secs_f64(),
        })
    };
    match outcome {
        Ok(()) => {
            let path = search.best_path.ok_or(Error::Infeasible)?;
            finish(&path, search.expanded)
        }
        Err(Error::NodeLimit { limit, .. }) => {
            let best = match &search.best_path {
                Some(p) => Some(Box::new(finish(p, search.expanded)?)),
                None => None,
            };
            Err(Error::NodeLimit { limit, best })
        }
        Err(e) => Err(e),
    }
}

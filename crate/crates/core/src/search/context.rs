use std::cell::RefCell;
use std::collections::HashMap;

use crate::bounding::{bounding_sim_all, BoundingSim, CoverKind};
use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::psd::{psd_compare, SymMatrix};
use crate::riccati::{Action, Schedule};
use crate::search::{maximal_elements, SearchOptions};

/// Position in the tree as far as feasibility is concerned.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Node {
    pub step: usize,
    /// Budget consumed so far, one entry per constraint row.
    pub usage: Vec<u64>,
}

/// Per-scenario caches shared by every node of one search.
///
/// Information matrices do not depend on the covariance at a node, so action
/// SIMs, their pairwise dominance and the bounding sensor are computed once
/// per step.
pub struct SearchContext<'a> {
    pub scenario: &'a Scenario,
    pub options: &'a SearchOptions,
    actions: Vec<Action>,
    sims: Vec<Vec<SymMatrix>>,
    /// `prunes[k][i][j]`: action `i` may replace action `j` at step `k`.
    prunes: Vec<Vec<Vec<bool>>>,
    usage: Vec<Vec<Vec<u64>>>,
    has_free_action: bool,
    completable: RefCell<HashMap<Node, bool>>,
}

fn subsets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, n: usize, size: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..=n {
            cur.push(i);
            rec(i + 1, n, size, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(1, n, size, &mut Vec::new(), &mut out);
    out
}

impl<'a> SearchContext<'a> {
    pub fn new(scenario: &'a Scenario, options: &'a SearchOptions) -> Result<Self> {
        let s = scenario.num_sensors();
        let horizon = scenario.horizon();
        if options.subset_size == 0 || options.subset_size > s {
            return Err(Error::InvalidOptions(format!(
                "subset size {} must lie in 1..={s}",
                options.subset_size
            )));
        }
        if let Some(b) = &options.budget {
            b.check_shape(horizon, s)?;
        }
        let mut actions = Vec::new();
        if options.virtual_sensor {
            actions.push(Action::none());
        }
        actions.extend(subsets(s, options.subset_size).into_iter().map(Action::new));

        let mut sims = Vec::with_capacity(horizon);
        let mut prunes = Vec::with_capacity(horizon);
        let mut usage = Vec::with_capacity(horizon);
        for k in 0..horizon {
            let step_sims = actions
                .iter()
                .map(|a| scenario.action_sim(a, k))
                .collect::<Result<Vec<_>>>()?;
            let step_usage: Vec<Vec<u64>> = actions
                .iter()
                .map(|a| options.budget.as_ref().map_or_else(Vec::new, |b| b.usage(k, a)))
                .collect();
            let n = actions.len();
            let mut step_prunes = vec![vec![false; n]; n];
            for i in 0..n {
                for j in 0..n {
                    // the virtual sensor is never pruned
                    if i == j || actions[j].is_virtual() {
                        continue;
                    }
                    let cheaper = step_usage[i].iter().zip(&step_usage[j]).all(|(ui, uj)| ui <= uj);
                    step_prunes[i][j] = cheaper && psd_compare(&step_sims[i], &step_sims[j], options.tol)?.is_ge();
                }
            }
            sims.push(step_sims);
            prunes.push(step_prunes);
            usage.push(step_usage);
        }
        let has_free_action = actions.iter().any(Action::is_virtual);
        Ok(SearchContext {
            scenario,
            options,
            actions,
            sims,
            prunes,
            usage,
            has_free_action,
            completable: RefCell::new(HashMap::new()),
        })
    }

    pub fn actions(&self) -> &[Action] {
        &self.actions
    }

    pub fn horizon(&self) -> usize {
        self.scenario.horizon()
    }

    pub fn sim(&self, step: usize, action: usize) -> &SymMatrix {
        &self.sims[step][action]
    }

    pub fn root(&self) -> Node {
        Node {
            step: 0,
            usage: vec![0; self.options.budget.as_ref().map_or(0, |b| b.num_rows())],
        }
    }

    pub fn child(&self, node: &Node, action: usize) -> Node {
        Node {
            step: node.step + 1,
            usage: node
                .usage
                .iter()
                .zip(&self.usage[node.step][action])
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    fn within_budget(&self, usage: &[u64]) -> bool {
        self.options
            .budget
            .as_ref()
            .is_none_or(|b| usage.iter().zip(b.bound()).all(|(u, lim)| u <= lim))
    }

    /// Whether some completion of `node` satisfies the budget.
    pub fn is_completable(&self, node: &Node) -> bool {
        if !self.within_budget(&node.usage) {
            return false;
        }
        // Budget entries are nonnegative, so a zero-cost action always
        // completes a node that is currently within budget.
        if self.options.budget.is_none() || self.has_free_action || node.step == self.horizon() {
            return true;
        }
        if let Some(&known) = self.completable.borrow().get(node) {
            return known;
        }
        let ok = (0..self.actions.len()).any(|a| self.is_completable(&self.child(node, a)));
        self.completable.borrow_mut().insert(node.clone(), ok);
        ok
    }

    /// Indices of actions at `node` whose subtree holds a feasible schedule.
    pub fn feasible_children(&self, node: &Node) -> Vec<usize> {
        (0..self.actions.len())
            .filter(|&a| self.is_completable(&self.child(node, a)))
            .collect()
    }

    /// Actions available at `node` after the budget check.
    pub fn expand_children(&self, node: &Node) -> Vec<Action> {
        self.feasible_children(node)
            .into_iter()
            .map(|a| self.actions[a].clone())
            .collect()
    }

    /// Drops candidates whose information matrix is dominated by another
    /// candidate that uses no more budget.
    pub fn filter_dominated(&self, step: usize, candidates: &[usize]) -> Vec<usize> {
        let p = &self.prunes[step];
        maximal_elements(candidates, |i, j| p[i][j])
    }

    /// Max-cover bounding sensor per step, folded over the non-dominated
    /// actions in action order.
    pub fn bounding_sensor(&self) -> Result<BoundingSim> {
        let per_step = (0..self.horizon())
            .map(|k| {
                let all: Vec<usize> = (0..self.actions.len()).collect();
                let plain = maximal_elements(&all, |i, j| {
                    psd_compare(&self.sims[k][i], &self.sims[k][j], self.options.tol).is_ok_and(|o| o.is_ge())
                });
                let top: Vec<SymMatrix> = plain.iter().map(|&a| self.sims[k][a].clone()).collect();
                let cover = bounding_sim_all(&top, CoverKind::MaxCover, self.options.ridge)?;
                let dominates_all = self.sims[k]
                    .iter()
                    .all(|m| psd_compare(&cover, m, self.options.tol).is_ok_and(|o| o.is_ge()));
                if dominates_all {
                    Ok(cover)
                } else {
                    bounding_sim_all(&self.sims[k], CoverKind::MaxCover, self.options.ridge)
                }
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(BoundingSim {
            per_step,
            kind: CoverKind::MaxCover,
        })
    }

    pub fn schedule(&self, path: &[usize]) -> Schedule {
        Schedule(path.iter().map(|&a| self.actions[a].clone()).collect())
    }
}

//! Covariance propagation and schedule cost.

use std::fmt;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{CostFn, Scenario};
use crate::psd::SymMatrix;

/// Sensors measuring at one step, as sorted 1-based ids.
///
/// The empty action is the virtual sensor: no measurement, zero information.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Action(Vec<usize>);

impl Action {
    pub fn new(mut ids: Vec<usize>) -> Self {
        ids.sort_unstable();
        ids.dedup();
        Action(ids)
    }

    pub fn single(id: usize) -> Self {
        Action(vec![id])
    }

    pub fn none() -> Self {
        Action(Vec::new())
    }

    pub fn ids(&self) -> &[usize] {
        &self.0
    }

    pub fn is_virtual(&self) -> bool {
        self.0.is_empty()
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.0.as_slice() {
            [] => f.write_str("-"),
            [id] => write!(f, "{id}"),
            ids => {
                let parts: Vec<String> = ids.iter().map(ToString::to_string).collect();
                write!(f, "{{{}}}", parts.join(","))
            }
        }
    }
}

/// One action per step `k = 0..N-1`.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Schedule(pub Vec<Action>);

impl Schedule {
    /// Single-sensor schedule from 1-based ids.
    pub fn from_ids(ids: &[usize]) -> Self {
        Schedule(ids.iter().map(|&i| Action::single(i)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn steps(&self) -> &[Action] {
        &self.0
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "({})", parts.join(","))
    }
}

/// Per-step costs `g_k(W_k C_k Wₖᵀ)`, `k = 1..N`, and their sum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostValue {
    pub total: f64,
    pub per_step: Vec<f64>,
}

/// One step of the information-form Riccati recursion,
/// `A (C⁻¹ + M)⁻¹ Aᵀ + Q`.
///
/// Fails when `C` is not numerically positive definite.
pub fn riccati_step(c: &SymMatrix, m: &SymMatrix, a: &DMatrix<f64>, q: &SymMatrix) -> Result<SymMatrix> {
    let n = c.dim();
    let not_pd = Error::Decomposition("covariance is not positive definite");
    let c_inv = c.as_matrix().clone().cholesky().ok_or(not_pd)?.inverse();
    let info = SymMatrix::from_square(c_inv + m.as_matrix());
    let chol = info
        .into_matrix()
        .cholesky()
        .ok_or(Error::Decomposition("posterior information is not positive definite"))?;
    let posterior_at = chol.solve(&a.transpose());
    debug_assert_eq!(posterior_at.nrows(), n);
    Ok(SymMatrix::from_square(a * posterior_at + q.as_matrix()))
}

/// Same update in covariance (gain) form; valid for singular `C`.
///
/// With `M = F Fᵀ`: `C⁺ = C − C F (I + Fᵀ C F)⁻¹ Fᵀ C`, then predicted.
pub fn riccati_step_gain_form(
    c: &SymMatrix,
    m: &SymMatrix,
    a: &DMatrix<f64>,
    q: &SymMatrix,
) -> Result<SymMatrix> {
    let n = c.dim();
    let eig = nalgebra::SymmetricEigen::new(m.as_matrix().clone());
    let mut factor = eig.eigenvectors;
    for j in 0..n {
        let s = eig.eigenvalues[j].max(0.0).sqrt();
        factor.column_mut(j).scale_mut(s);
    }
    let cf = c.as_matrix() * &factor;
    let inner = DMatrix::identity(n, n) + factor.transpose() * &cf;
    let chol = SymMatrix::from_square(inner)
        .into_matrix()
        .cholesky()
        .ok_or(Error::Decomposition("innovation matrix is not positive definite"))?;
    let posterior = c.as_matrix() - &cf * chol.solve(&cf.transpose());
    Ok(SymMatrix::from_square(a * posterior * a.transpose() + q.as_matrix()))
}

/// Information-form step with the gain-form fallback for singular `C`.
pub fn propagate(c: &SymMatrix, m: &SymMatrix, a: &DMatrix<f64>, q: &SymMatrix) -> Result<SymMatrix> {
    riccati_step(c, m, a, q).or_else(|_| riccati_step_gain_form(c, m, a, q))
}

/// `g(W C Wᵀ)` for the chosen scalar map.
pub fn stage_cost(c: &SymMatrix, w: &SymMatrix, cost_fn: CostFn) -> f64 {
    let weighted = c.congruence(w.as_matrix());
    match cost_fn {
        CostFn::Trace => weighted.trace(),
        CostFn::Determinant => weighted.determinant().max(0.0),
        CostFn::MaxEigenvalue => weighted.max_eigenvalue().max(0.0),
    }
}

impl Scenario {
    /// Information matrix of an action: the sum of member SIMs.
    pub fn action_sim(&self, action: &Action, step: usize) -> Result<SymMatrix> {
        let mut m = SymMatrix::zeros(self.n_x());
        for &id in action.ids() {
            m = &m + &self.sim(id, step)?.m;
        }
        Ok(m)
    }

    /// Covariance reached after applying `action` at `step` from `c`.
    pub fn step_covariance(&self, c: &SymMatrix, m: &SymMatrix, step: usize) -> Result<SymMatrix> {
        propagate(c, m, &self.dynamics.a[step], &self.dynamics.q[step])
            .map_err(|_| Error::Propagation { step })
    }

    /// Cost of the covariance reached after `step`.
    pub fn step_cost(&self, c: &SymMatrix, step: usize) -> f64 {
        stage_cost(c, &self.weights[step], self.cost_fn)
    }
}

/// Cost of the first `schedule.len()` steps of `scenario`.
pub fn prefix_cost(scenario: &Scenario, schedule: &Schedule) -> Result<CostValue> {
    if schedule.len() > scenario.horizon() {
        return Err(Error::InvalidSchedule(format!(
            "schedule has {} steps, horizon is {}",
            schedule.len(),
            scenario.horizon()
        )));
    }
    let mut c = scenario.c0.clone();
    let mut per_step = Vec::with_capacity(schedule.len());
    for (k, action) in schedule.steps().iter().enumerate() {
        let m = scenario.action_sim(action, k)?;
        c = scenario.step_covariance(&c, &m, k)?;
        per_step.push(scenario.step_cost(&c, k));
    }
    Ok(CostValue {
        total: per_step.iter().sum(),
        per_step,
    })
}

/// Total cost `J(u)` of a full-length schedule.
pub fn total_cost(scenario: &Scenario, schedule: &Schedule) -> Result<CostValue> {
    if schedule.len() != scenario.horizon() {
        return Err(Error::InvalidSchedule(format!(
            "schedule has {} steps, horizon is {}",
            schedule.len(),
            scenario.horizon()
        )));
    }
    prefix_cost(scenario, schedule)
}

//! Bounding sensors.
//!
//! A *max-cover* information matrix `M̄ ⪰ Mᵢ` for every sensor `i` at a step
//! yields, when propagated through the Riccati recursion, a covariance that
//! is never larger than the one produced by any real schedule. Its cost is
//! therefore a lower bound on every completion of a partial schedule. The
//! *min-cover* dual `M' ⪯ Mᵢ` gives an upper bound on the best completion.
//!
//! For two matrices the covering ellipsoid is obtained exactly after
//! simultaneous diagonalization: in the basis `V` with `Vᵀ M₂ V = I` and
//! `Vᵀ M₁ V = diag(λ)`, the minimum-determinant cover is `diag(max(λ, 1))`
//! transformed back. Larger banks are folded pairwise in id order, which is
//! tight but not necessarily minimal, and may depend on the fold order.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::model::Scenario;
use crate::psd::{psd_compare, sim_diagonalize, SymMatrix, DEFAULT_TOL};

/// Direction of the cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CoverKind {
    /// Dominates every input.
    MaxCover,
    /// Dominated by every input.
    MinCover,
}

/// Inflation rounds before giving up on the domination check.
const MAX_RETRIES: usize = 64;

/// Per-step bounding information matrices.
#[derive(Debug, Clone)]
pub struct BoundingSim {
    pub per_step: Vec<SymMatrix>,
    pub kind: CoverKind,
}

impl BoundingSim {
    /// Folds each step's list of information matrices.
    pub fn from_step_sims(step_sims: &[Vec<SymMatrix>], kind: CoverKind, ridge: f64) -> Result<Self> {
        let per_step = step_sims
            .iter()
            .map(|sims| bounding_sim_all(sims, kind, ridge))
            .collect::<Result<_>>()?;
        Ok(BoundingSim { per_step, kind })
    }

    /// Cover of the scenario's single-sensor SIMs at every step.
    pub fn for_scenario(scenario: &Scenario, kind: CoverKind, ridge: f64) -> Result<Self> {
        let step_sims = (0..scenario.horizon())
            .map(|k| {
                scenario
                    .sensors
                    .iter()
                    .map(|s| scenario.sim(s.id, k).map(|m| m.m))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::from_step_sims(&step_sims, kind, ridge)
    }
}

fn diag_cover(m1: &SymMatrix, m2: &SymMatrix, ridge: f64, kind: CoverKind) -> Result<SymMatrix> {
    let sd = sim_diagonalize(m1, m2, ridge)?;
    let m2r = m2.add_diagonal(sd.shift);
    let diag = sd.eigvals.map(|l| match kind {
        CoverKind::MaxCover => l.max(1.0),
        CoverKind::MinCover => l.min(1.0),
    });
    // (Vᵀ)⁻¹ = M₂' V
    let back = m2r.as_matrix() * &sd.eigvecs;
    let cover = SymMatrix::from_square(&back * DMatrix::from_diagonal(&diag) * back.transpose());
    Ok(cover)
}

fn covers(cover: &SymMatrix, m: &SymMatrix, kind: CoverKind, tol: f64) -> Result<bool> {
    let ord = psd_compare(cover, m, tol)?;
    Ok(match kind {
        CoverKind::MaxCover => ord.is_ge(),
        CoverKind::MinCover => ord.is_le(),
    })
}

// Scales `cover` by `1 ± γ`, `γ = 1e-12, 2e-12, …`, until it covers every
// input in the requested direction.
fn inflate_until_covering(mut cover: SymMatrix, inputs: &[&SymMatrix], kind: CoverKind) -> Result<SymMatrix> {
    let mut gamma: f64 = 1e-12;
    for _ in 0..MAX_RETRIES {
        let mut ok = true;
        for m in inputs {
            if !covers(&cover, m, kind, DEFAULT_TOL)? {
                ok = false;
                break;
            }
        }
        if ok {
            return Ok(cover);
        }
        let factor = match kind {
            CoverKind::MaxCover => 1.0 + gamma,
            CoverKind::MinCover => (1.0 - gamma).max(0.0),
        };
        cover = cover.scale(factor);
        gamma *= 2.0;
    }
    Err(Error::BoundVerification {
        retries: MAX_RETRIES,
    })
}

fn verified_pair(m1: &SymMatrix, m2: &SymMatrix, ridge: f64, kind: CoverKind) -> Result<SymMatrix> {
    inflate_until_covering(diag_cover(m1, m2, ridge, kind)?, &[m1, m2], kind)
}

/// Minimum-determinant matrix dominating both `m1` and `m2`.
///
/// The result is post-checked against both inputs and inflated by `(1 + γ)`,
/// `γ = 1e-12, 2e-12, …`, until domination holds.
pub fn bounding_sim_pair(m1: &SymMatrix, m2: &SymMatrix, ridge: f64) -> Result<SymMatrix> {
    verified_pair(m1, m2, ridge, CoverKind::MaxCover)
}

/// Dual of [`bounding_sim_pair`]: a large matrix dominated by both inputs.
pub fn bounding_sim_pair_min(m1: &SymMatrix, m2: &SymMatrix, ridge: f64) -> Result<SymMatrix> {
    bounding_sim_all(&[m1.clone(), m2.clone()], CoverKind::MinCover, ridge)
}

/// Left fold of the pairwise cover over `sims` in list order.
///
/// The min-cover fold runs on the ridge-lifted inputs `Mᵢ + δI` (all positive
/// definite) with one common `δ`, which is removed once at the end.
pub fn bounding_sim_all(sims: &[SymMatrix], kind: CoverKind, ridge: f64) -> Result<SymMatrix> {
    let (first, rest) = sims
        .split_first()
        .ok_or_else(|| Error::InvalidScenario("cannot bound an empty sensor set".into()))?;
    match kind {
        CoverKind::MaxCover => rest
            .iter()
            .try_fold(first.clone(), |acc, m| verified_pair(&acc, m, ridge, kind)),
        CoverKind::MinCover => {
            let shift = ridge * sims.iter().map(SymMatrix::trace).fold(1.0, f64::max);
            let lifted: Vec<SymMatrix> = sims.iter().map(|m| m.add_diagonal(shift)).collect();
            let top = lifted[1..]
                .iter()
                .try_fold(lifted[0].clone(), |acc, m| verified_pair(&acc, m, 0.0, kind))?;
            let inputs: Vec<&SymMatrix> = sims.iter().collect();
            inflate_until_covering(top.add_diagonal(-shift), &inputs, kind)
        }
    }
}

fn roll_bound(c_k: &SymMatrix, k: usize, scenario: &Scenario, bounds: &BoundingSim) -> Result<f64> {
    let horizon = scenario.horizon();
    if k > horizon || bounds.per_step.len() < horizon {
        return Err(Error::InvalidSchedule(format!(
            "bound requested at step {k} for horizon {horizon} with {} cached steps",
            bounds.per_step.len()
        )));
    }
    let mut c = c_k.clone();
    let mut total = 0.0;
    for n in k..horizon {
        c = scenario.step_covariance(&c, &bounds.per_step[n], n)?;
        total += scenario.step_cost(&c, n);
    }
    Ok(total)
}

/// Cost of steps `k+1..=N` when the max-cover sensor is used from `C_k` on.
///
/// Never exceeds the cost of any completion `(u_k, …, u_{N-1})`.
pub fn lower_bound_remaining(c_k: &SymMatrix, k: usize, scenario: &Scenario, bounds: &BoundingSim) -> Result<f64> {
    debug_assert_eq!(bounds.kind, CoverKind::MaxCover);
    roll_bound(c_k, k, scenario, bounds)
}

/// Cost of steps `k+1..=N` under the min-cover sensor.
///
/// At least the cost of the best completion from `C_k`.
pub fn upper_bound_remaining(c_k: &SymMatrix, k: usize, scenario: &Scenario, bounds: &BoundingSim) -> Result<f64> {
    debug_assert_eq!(bounds.kind, CoverKind::MinCover);
    roll_bound(c_k, k, scenario, bounds)
}

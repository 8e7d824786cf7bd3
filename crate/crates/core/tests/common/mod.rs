//! Random generators and a brute-force reference implementation shared by
//! the integration tests. The reference uses explicit inverses and plain
//! enumeration so it shares no numerical path with the library.
#![allow(dead_code)]

use ibp_core::model::{CostFn, Scenario};
use ibp_core::psd::SymMatrix;
use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut impl Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-1.0..1.0))
}

/// `L Lᵀ` with `L` of the given column count (rank ≤ cols).
pub fn random_psd(rng: &mut impl Rng, n: usize, rank: usize) -> SymMatrix {
    let l = random_matrix(rng, n, rank);
    SymMatrix::new(&l * l.transpose()).unwrap()
}

pub fn random_pd(rng: &mut impl Rng, n: usize) -> SymMatrix {
    random_psd(rng, n, n).add_diagonal(0.1)
}

pub fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}

pub fn sim(s: &Scenario, id: usize, k: usize) -> DMatrix<f64> {
    let sensor = &s.sensors[id - 1];
    let h = &sensor.h[k];
    let r_inv = sensor.r[k].as_matrix().clone().try_inverse().unwrap();
    h.transpose() * r_inv * h
}

pub fn action_sim(s: &Scenario, ids: &[usize], k: usize) -> DMatrix<f64> {
    ids.iter()
        .fold(DMatrix::zeros(s.n_x(), s.n_x()), |acc, &i| acc + sim(s, i, k))
}

pub fn step(s: &Scenario, c: &DMatrix<f64>, m: &DMatrix<f64>, k: usize) -> DMatrix<f64> {
    let a = &s.dynamics.a[k];
    let post = (c.clone().try_inverse().unwrap() + m).try_inverse().unwrap();
    let next = a * post * a.transpose() + s.dynamics.q[k].as_matrix();
    (&next + next.transpose()) * 0.5
}

pub fn cost(s: &Scenario, c: &DMatrix<f64>, k: usize) -> f64 {
    let w = s.weights[k].as_matrix();
    let x = w * c * w.transpose();
    match s.cost_fn {
        CostFn::Trace => x.trace(),
        CostFn::Determinant => x.determinant(),
        CostFn::MaxEigenvalue => x.symmetric_eigenvalues().max(),
    }
}

/// Cost of `schedule` (sensor id sets, one per step) applied from `c` at `k`.
pub fn rollout(s: &Scenario, c: &DMatrix<f64>, k: usize, schedule: &[Vec<usize>]) -> f64 {
    let mut c = c.clone();
    let mut total = 0.0;
    for (n, ids) in schedule.iter().enumerate() {
        c = step(s, &c, &action_sim(s, ids, k + n), k + n);
        total += cost(s, &c, k + n);
    }
    total
}

/// Minimum over all single-sensor completions of steps `k..N` starting at `c`.
pub fn best_completion(s: &Scenario, c: &DMatrix<f64>, k: usize) -> f64 {
    if k == s.horizon() {
        return 0.0;
    }
    (1..=s.num_sensors())
        .map(|id| {
            let next = step(s, c, &sim(s, id, k), k);
            cost(s, &next, k) + best_completion(s, &next, k + 1)
        })
        .fold(f64::INFINITY, f64::min)
}

pub fn optimal_cost(s: &Scenario) -> f64 {
    best_completion(s, s.c0.as_matrix(), 0)
}

/// Small random instance: n_x ≤ 4, 2 ≤ S ≤ 4, 2 ≤ N ≤ 5. One sensor or one
/// step makes every strategy trivial, so those are skipped.
pub fn small_instance(seed: u64) -> Scenario {
    let mut r = rng(seed ^ 0x5eed);
    let n_x = r.random_range(1..=4);
    let sensors = r.random_range(2..=4);
    let horizon = r.random_range(2..=5);
    ibp_core::model::make_random_scenario(n_x, sensors, horizon, seed).unwrap()
}

//! Linear Gaussian system and sensor bank.
//!
//! ```text
//! x_{k+1} = A_k x_k + w_k,        w_k ~ N(0, Q_k)
//! z_k^i   = H_k^i x_k + v_k^i,    v_k^i ~ N(0, R_k^i)
//! ```
//!
//! Only covariances matter for scheduling, so the mean `x0_mean` is carried
//! along for completeness and never read by the search.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::psd::{is_psd, SymMatrix, DEFAULT_TOL};

/// Lower end of the uniform draw for measurement noise variances in the
/// tracking scenario. Keeps every `R` positive definite.
pub const R_MIN: f64 = 1e-3;

/// Scalar map applied to the weighted covariance at every step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CostFn {
    Trace,
    Determinant,
    MaxEigenvalue,
}

/// Per-step transition matrices and process-noise covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct Dynamics {
    pub a: Vec<DMatrix<f64>>,
    pub q: Vec<SymMatrix>,
}

impl Dynamics {
    pub fn horizon(&self) -> usize {
        self.a.len()
    }
}

/// One sensor with per-step measurement matrices and noise covariances.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensor {
    /// 1-based sensor id.
    pub id: usize,
    pub h: Vec<DMatrix<f64>>,
    pub r: Vec<SymMatrix>,
}

/// `M = Hᵀ R⁻¹ H` of one sensor at one step.
#[derive(Debug, Clone, PartialEq)]
pub struct SensorInfoMatrix {
    pub m: SymMatrix,
    pub sensor_id: usize,
    pub step: usize,
}

/// Computes the sensor information matrix `Hᵀ R⁻¹ H` at `step`.
pub fn sensor_info_matrix(sensor: &Sensor, step: usize) -> Result<SensorInfoMatrix> {
    let (h, r) = match (sensor.h.get(step), sensor.r.get(step)) {
        (Some(h), Some(r)) => (h, r),
        _ => {
            return Err(Error::InvalidScenario(format!(
                "sensor {} has no model for step {step}",
                sensor.id
            )))
        }
    };
    let singular = Error::SingularNoise {
        sensor: sensor.id,
        step,
    };
    let chol = r.as_matrix().clone().cholesky().ok_or(singular)?;
    let whitened = chol
        .l()
        .solve_lower_triangular(h)
        .ok_or(Error::SingularNoise {
            sensor: sensor.id,
            step,
        })?;
    Ok(SensorInfoMatrix {
        m: SymMatrix::from_square(whitened.transpose() * whitened),
        sensor_id: sensor.id,
        step,
    })
}

/// A complete scheduling problem over horizon `N`.
///
/// `weights[k]` is the weight `W_{k+1}` applied to the covariance reached
/// after step `k`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ScenarioFile", into = "ScenarioFile")]
pub struct Scenario {
    pub dynamics: Dynamics,
    pub sensors: Vec<Sensor>,
    pub c0: SymMatrix,
    pub x0_mean: Vec<f64>,
    pub weights: Vec<SymMatrix>,
    pub cost_fn: CostFn,
}

impl Scenario {
    /// Builds a scenario whose matrices do not change over the horizon.
    ///
    /// `sensors` holds `(H, R)` pairs; ids are assigned 1.. in order.
    pub fn time_invariant(
        a: DMatrix<f64>,
        q: SymMatrix,
        sensors: Vec<(DMatrix<f64>, SymMatrix)>,
        c0: SymMatrix,
        weight: SymMatrix,
        cost_fn: CostFn,
        horizon: usize,
    ) -> Result<Self> {
        let n_x = c0.dim();
        let scenario = Scenario {
            dynamics: Dynamics {
                a: vec![a; horizon],
                q: vec![q; horizon],
            },
            sensors: sensors
                .into_iter()
                .enumerate()
                .map(|(i, (h, r))| Sensor {
                    id: i + 1,
                    h: vec![h; horizon],
                    r: vec![r; horizon],
                })
                .collect(),
            c0,
            x0_mean: vec![0.0; n_x],
            weights: vec![weight; horizon],
            cost_fn,
        };
        scenario.validate()?;
        Ok(scenario)
    }

    pub fn n_x(&self) -> usize {
        self.c0.dim()
    }

    pub fn horizon(&self) -> usize {
        self.dynamics.horizon()
    }

    pub fn num_sensors(&self) -> usize {
        self.sensors.len()
    }

    /// SIM of the sensor with 1-based `id` at `step`.
    pub fn sim(&self, id: usize, step: usize) -> Result<SensorInfoMatrix> {
        let sensor = id
            .checked_sub(1)
            .and_then(|i| self.sensors.get(i))
            .ok_or_else(|| Error::InvalidSchedule(format!("unknown sensor id {id}")))?;
        sensor_info_matrix(sensor, step)
    }

    /// Keeps the first `horizon` steps.
    pub fn truncated(&self, horizon: usize) -> Result<Scenario> {
        if horizon == 0 || horizon > self.horizon() {
            return Err(Error::InvalidScenario(format!(
                "cannot truncate horizon {} to {horizon}",
                self.horizon()
            )));
        }
        let mut s = self.clone();
        s.dynamics.a.truncate(horizon);
        s.dynamics.q.truncate(horizon);
        s.weights.truncate(horizon);
        for sensor in &mut s.sensors {
            sensor.h.truncate(horizon);
            sensor.r.truncate(horizon);
        }
        Ok(s)
    }

    /// Checks dimensional consistency and the PSD / PD assumptions.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_x();
        let horizon = self.horizon();
        let bad = |msg: String| Err(Error::InvalidScenario(msg));
        if horizon == 0 {
            return bad("horizon must be at least 1".into());
        }
        if self.sensors.is_empty() {
            return bad("at least one sensor is required".into());
        }
        if self.dynamics.q.len() != horizon || self.weights.len() != horizon {
            return bad("A, Q and W must all have one entry per step".into());
        }
        if self.x0_mean.len() != n {
            return bad(format!("x0_mean has length {}, expected {n}", self.x0_mean.len()));
        }
        if !is_psd(&self.c0, DEFAULT_TOL) {
            return bad("C0 is not positive semi-definite".into());
        }
        for k in 0..horizon {
            let a = &self.dynamics.a[k];
            if a.nrows() != n || a.ncols() != n {
                return bad(format!("A at step {k} is {}x{}, expected {n}x{n}", a.nrows(), a.ncols()));
            }
            for (name, m) in [("Q", &self.dynamics.q[k]), ("W", &self.weights[k])] {
                if m.dim() != n {
                    return bad(format!("{name} at step {k} has dimension {}", m.dim()));
                }
                if !is_psd(m, DEFAULT_TOL) {
                    return bad(format!("{name} at step {k} is not positive semi-definite"));
                }
            }
        }
        for sensor in &self.sensors {
            if sensor.h.len() != horizon || sensor.r.len() != horizon {
                return bad(format!("sensor {} needs one H and R per step", sensor.id));
            }
            for k in 0..horizon {
                let (h, r) = (&sensor.h[k], &sensor.r[k]);
                if h.ncols() != n || h.nrows() != r.dim() || h.nrows() == 0 {
                    return bad(format!(
                        "sensor {} at step {k}: H is {}x{}, R is {}x{}",
                        sensor.id,
                        h.nrows(),
                        h.ncols(),
                        r.dim(),
                        r.dim()
                    ));
                }
                if r.min_eigenvalue() <= 0.0 {
                    return Err(Error::SingularNoise {
                        sensor: sensor.id,
                        step: k,
                    });
                }
            }
        }
        Ok(())
    }
}

fn kron_eye2(block: [[f64; 2]; 2]) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(4, 4);
    for b in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                m[(2 * b + i, 2 * b + j)] = block[i][j];
            }
        }
    }
    m
}

/// Rows of the eight tracking sensors; each row picks one state component of
/// `[x, ẋ, y, ẏ]`.
const TRACKING_BANK: [&[usize]; 8] = [&[0], &[1], &[2], &[3], &[0, 2], &[1, 3], &[0, 1], &[2, 3]];

/// Constant-velocity planar target observed by eight sensors.
///
/// `A = I₂ ⊗ [[1, T], [0, 1]]`, `Q = q · I₂ ⊗ [[T³/3, T²/2], [T²/2, T]]`,
/// `C0 = I`, `W_k = I`, trace cost. The diagonal noise variances are drawn
/// uniformly from `[R_MIN, 1]`.
pub fn make_tracking_scenario(period: f64, q: f64, horizon: usize, seed: u64) -> Result<Scenario> {
    if period.is_nan() || period <= 0.0 || q.is_nan() || q < 0.0 || horizon == 0 {
        return Err(Error::InvalidScenario(format!(
            "tracking scenario needs T > 0, q >= 0, N >= 1 (got T={period}, q={q}, N={horizon})"
        )));
    }
    let t = period;
    let a = kron_eye2([[1.0, t], [0.0, 1.0]]);
    let q_mat = SymMatrix::from_square(kron_eye2([
        [q * t.powi(3) / 3.0, q * t * t / 2.0],
        [q * t * t / 2.0, q * t],
    ]));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sensors = TRACKING_BANK
        .iter()
        .enumerate()
        .map(|(i, rows)| {
            let h = DMatrix::from_fn(rows.len(), 4, |r, c| if rows[r] == c { 1.0 } else { 0.0 });
            let variances: Vec<f64> = rows.iter().map(|_| rng.random_range(R_MIN..=1.0)).collect();
            Sensor {
                id: i + 1,
                h: vec![h; horizon],
                r: vec![SymMatrix::from_diagonal(&variances); horizon],
            }
        })
        .collect();
    let scenario = Scenario {
        dynamics: Dynamics {
            a: vec![a; horizon],
            q: vec![q_mat; horizon],
        },
        sensors,
        c0: SymMatrix::identity(4),
        x0_mean: vec![0.0, 1.0, 0.0, 1.0],
        weights: vec![SymMatrix::identity(4); horizon],
        cost_fn: CostFn::Trace,
    };
    scenario.validate()?;
    Ok(scenario)
}

fn normal_matrix(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DMatrix<f64> {
    DMatrix::from_fn(rows, cols, |_, _| rng.sample::<f64, _>(StandardNormal))
}

fn random_pd(rng: &mut ChaCha8Rng, n: usize, floor: f64) -> SymMatrix {
    let l = normal_matrix(rng, n, n);
    SymMatrix::from_square(&l * l.transpose() / n as f64).add_diagonal(floor)
}

/// Random time-variant instance for oracle comparisons.
///
/// Every step gets its own `A` (spectral norm, hence spectral radius, at most
/// 1.2), `Q`, and per-sensor `H`, `R`. Each sensor keeps a fixed row count in
/// `1..=n_x`.
pub fn make_random_scenario(n_x: usize, sensors: usize, horizon: usize, seed: u64) -> Result<Scenario> {
    if n_x == 0 || sensors == 0 || horizon == 0 {
        return Err(Error::InvalidScenario(
            "random scenario needs n_x, S, N >= 1".into(),
        ));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = Vec::with_capacity(horizon);
    let mut q = Vec::with_capacity(horizon);
    for _ in 0..horizon {
        let g = normal_matrix(&mut rng, n_x, n_x);
        let norm = g.singular_values().max().max(1e-12);
        let radius = rng.random_range(0.5..=1.2);
        a.push(g * (radius / norm));
        q.push(random_pd(&mut rng, n_x, 0.01).scale(rng.random_range(0.05..=1.0)));
    }
    let bank = (0..sensors)
        .map(|i| {
            let rows = rng.random_range(1..=n_x);
            let mut h = Vec::with_capacity(horizon);
            let mut r = Vec::with_capacity(horizon);
            for _ in 0..horizon {
                h.push(normal_matrix(&mut rng, rows, n_x));
                let variances: Vec<f64> = (0..rows).map(|_| rng.random_range(0.05..=1.0)).collect();
                r.push(SymMatrix::from_diagonal(&variances));
            }
            Sensor { id: i + 1, h, r }
        })
        .collect();
    let c0 = random_pd(&mut rng, n_x, 0.1);
    let scenario = Scenario {
        dynamics: Dynamics { a, q },
        sensors: bank,
        c0,
        x0_mean: vec![0.0; n_x],
        weights: vec![SymMatrix::identity(n_x); horizon],
        cost_fn: CostFn::Trace,
    };
    scenario.validate()?;
    Ok(scenario)
}

type Rows = Vec<Vec<f64>>;

#[derive(Serialize, Deserialize)]
struct SensorFile {
    #[serde(rename = "H")]
    h: Vec<Rows>,
    #[serde(rename = "R")]
    r: Vec<SymMatrix>,
}

/// On-disk layout of a scenario.
#[derive(Serialize, Deserialize)]
struct ScenarioFile {
    n_x: usize,
    #[serde(rename = "N")]
    horizon: usize,
    #[serde(rename = "S")]
    num_sensors: usize,
    #[serde(rename = "A")]
    a: Vec<Rows>,
    #[serde(rename = "Q")]
    q: Vec<SymMatrix>,
    sensors: Vec<SensorFile>,
    #[serde(rename = "C0")]
    c0: SymMatrix,
    x0_mean: Vec<f64>,
    #[serde(rename = "W")]
    w: Vec<SymMatrix>,
    cost_fn: CostFn,
}

fn rows_to_matrix(rows: &Rows) -> Result<DMatrix<f64>> {
    let nrows = rows.len();
    let ncols = rows.first().map_or(0, Vec::len);
    if nrows == 0 || ncols == 0 || rows.iter().any(|r| r.len() != ncols) {
        return Err(Error::InvalidScenario("ragged or empty matrix".into()));
    }
    Ok(DMatrix::from_fn(nrows, ncols, |i, j| rows[i][j]))
}

fn matrix_to_rows(m: &DMatrix<f64>) -> Rows {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

impl TryFrom<ScenarioFile> for Scenario {
    type Error = Error;

    fn try_from(f: ScenarioFile) -> Result<Self> {
        let sensors = f
            .sensors
            .into_iter()
            .enumerate()
            .map(|(i, s)| {
                Ok(Sensor {
                    id: i + 1,
                    h: s.h.iter().map(rows_to_matrix).collect::<Result<_>>()?,
                    r: s.r,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let scenario = Scenario {
            dynamics: Dynamics {
                a: f.a.iter().map(rows_to_matrix).collect::<Result<_>>()?,
                q: f.q,
            },
            sensors,
            c0: f.c0,
            x0_mean: f.x0_mean,
            weights: f.w,
            cost_fn: f.cost_fn,
        };
        if scenario.n_x() != f.n_x || scenario.horizon() != f.horizon || scenario.num_sensors() != f.num_sensors {
            return Err(Error::InvalidScenario(format!(
                "header (n_x={}, N={}, S={}) disagrees with the matrices (n_x={}, N={}, S={})",
                f.n_x,
                f.horizon,
                f.num_sensors,
                scenario.n_x(),
                scenario.horizon(),
                scenario.num_sensors()
            )));
        }
        scenario.validate()?;
        Ok(scenario)
    }
}

impl From<Scenario> for ScenarioFile {
    fn from(s: Scenario) -> Self {
        ScenarioFile {
            n_x: s.n_x(),
            horizon: s.horizon(),
            num_sensors: s.num_sensors(),
            a: s.dynamics.a.iter().map(matrix_to_rows).collect(),
            q: s.dynamics.q,
            sensors: s
                .sensors
                .into_iter()
                .map(|sensor| SensorFile {
                    h: sensor.h.iter().map(matrix_to_rows).collect(),
                    r: sensor.r,
                })
                .collect(),
            c0: s.c0,
            x0_mean: s.x0_mean,
            w: s.weights,
            cost_fn: s.cost_fn,
        }
    }
}

impl Scenario {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

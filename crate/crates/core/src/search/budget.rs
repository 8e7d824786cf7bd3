use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::riccati::{Action, Schedule};

/// Linear budget `B · u ≤ b` over the binary decision vector
/// `u = [u_0ᵀ, …, u_{N-1}ᵀ]ᵀ ∈ {0,1}^{N·S}`.
///
/// Column `k·S + (i − 1)` of `B` is the slot of sensor `i` at step `k`. The
/// virtual sensor has no slot and never consumes budget.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BudgetConstraint {
    rows: Vec<Vec<u8>>,
    bound: Vec<u64>,
    horizon: usize,
    sensors: usize,
}

impl BudgetConstraint {
    pub fn new(rows: Vec<Vec<u8>>, bound: Vec<u64>, horizon: usize, sensors: usize) -> Result<Self> {
        let bad = |m: String| Err(Error::InvalidOptions(m));
        if rows.len() != bound.len() {
            return bad(format!("B has {} rows but b has {} entries", rows.len(), bound.len()));
        }
        for (r, row) in rows.iter().enumerate() {
            if row.len() != horizon * sensors {
                return bad(format!("row {r} of B has {} columns, expected N·S = {}", row.len(), horizon * sensors));
            }
            if row.iter().any(|&x| x > 1) {
                return bad(format!("row {r} of B is not binary"));
            }
        }
        Ok(BudgetConstraint {
            rows,
            bound,
            horizon,
            sensors,
        })
    }

    /// At most `k` measurements over the whole horizon.
    pub fn max_measurements(k: u64, horizon: usize, sensors: usize) -> Self {
        BudgetConstraint {
            rows: vec![vec![1; horizon * sensors]],
            bound: vec![k],
            horizon,
            sensors,
        }
    }

    /// Sensor `i` may measure at most `energy[i - 1]` times.
    pub fn per_sensor(energy: &[u64], horizon: usize) -> Self {
        let sensors = energy.len();
        let rows = (0..sensors)
            .map(|i| {
                let mut row = vec![0; horizon * sensors];
                for k in 0..horizon {
                    row[k * sensors + i] = 1;
                }
                row
            })
            .collect();
        BudgetConstraint {
            rows,
            bound: energy.to_vec(),
            horizon,
            sensors,
        }
    }

    pub fn num_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn bound(&self) -> &[u64] {
        &self.bound
    }

    pub(crate) fn check_shape(&self, horizon: usize, sensors: usize) -> Result<()> {
        if self.horizon != horizon || self.sensors != sensors {
            return Err(Error::InvalidOptions(format!(
                "budget built for N={}, S={} but scenario has N={horizon}, S={sensors}",
                self.horizon, self.sensors
            )));
        }
        Ok(())
    }

    /// Budget consumed by `action` at `step`, per row.
    pub fn usage(&self, step: usize, action: &Action) -> Vec<u64> {
        self.rows
            .iter()
            .map(|row| {
                action
                    .ids()
                    .iter()
                    .map(|&id| u64::from(row[step * self.sensors + id - 1]))
                    .sum()
            })
            .collect()
    }

    /// Exact check of `B · u ≤ b` for a full or partial schedule.
    pub fn is_satisfied(&self, schedule: &Schedule) -> bool {
        let mut total = vec![0u64; self.rows.len()];
        for (k, action) in schedule.steps().iter().enumerate() {
            for (t, u) in total.iter_mut().zip(self.usage(k, action)) {
                *t += u;
            }
        }
        total.iter().zip(&self.bound).all(|(t, b)| t <= b)
    }
}

use std::sync::{Arc, OnceLock};

use ndarray::{Array2, ArrayView1};
use serde::Serialize;

use crate::error::Result;
use crate::initdata::EpsilonProblem;
use crate::solver::operator::RadialOperator;
use crate::solver::stepper::StepStats;
use crate::solver::RadialGrid;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RunDiagnostics {
    pub stats: StepStats,
    pub smallest_dt: f64,
    /// `max |u_r|` over every computed step (not only stored ones).
    pub max_abs_gradient: f64,
    /// Whether `|u_r|` ever exceeded `c*_ε`, i.e. whether the cut-off
    /// departed from `s³` anywhere.
    pub cutoff_active: bool,
}

/// Stored snapshots `u(t_k, r_i)` of one annulus run.
#[derive(Debug, Clone)]
pub struct SpacetimeField {
    pub problem: Arc<EpsilonProblem>,
    pub times: Vec<f64>,
    /// Rows are time levels, columns radial nodes.
    pub values: Array2<f64>,
    pub diagnostics: RunDiagnostics,
    op: RadialOperator,
    gradient: OnceLock<Array2<f64>>,
}

impl PartialEq for SpacetimeField {
    fn eq(&self, other: &Self) -> bool {
        self.times == other.times && self.values == other.values && self.diagnostics == other.diagnostics
    }
}

impl SpacetimeField {
    pub(crate) fn new(
        problem: Arc<EpsilonProblem>,
        times: Vec<f64>,
        values: Array2<f64>,
        diagnostics: RunDiagnostics,
    ) -> Result<Self> {
        let op = RadialOperator::new(&problem.grid, problem.params.n)?;
        Ok(Self {
            problem,
            times,
            values,
            diagnostics,
            op,
            gradient: OnceLock::new(),
        })
    }

    /// Builds a field from arbitrary snapshots (used for synthetic fields).
    pub fn from_values(problem: Arc<EpsilonProblem>, times: Vec<f64>, values: Array2<f64>) -> Result<Self> {
        let diagnostics = RunDiagnostics {
            stats: StepStats::default(),
            smallest_dt: f64::NAN,
            max_abs_gradient: f64::NAN,
            cutoff_active: false,
        };
        Self::new(problem, times, values, diagnostics)
    }

    pub fn grid(&self) -> &RadialGrid {
        &self.problem.grid
    }

    pub fn nodes(&self) -> &[f64] {
        self.problem.grid.nodes()
    }

    pub fn operator(&self) -> &RadialOperator {
        &self.op
    }

    pub fn horizon(&self) -> f64 {
        *self.times.last().expect("field has at least one time level")
    }

    pub fn slice(&self, k: usize) -> ArrayView1<'_, f64> {
        self.values.row(k)
    }

    /// `u_r` at every stored level, from the solver's stencil.
    pub fn gradient(&self) -> &Array2<f64> {
        self.gradient.get_or_init(|| {
            let mut g = Array2::zeros(self.values.raw_dim());
            for (k, row) in self.values.rows().into_iter().enumerate() {
                let u = row.to_vec();
                for (i, d) in self.op.derivative(&u).into_iter().enumerate() {
                    g[[k, i]] = d;
                }
            }
            g
        })
    }

    /// Index of the stored time nearest to `t`.
    pub fn nearest_time_index(&self, t: f64) -> usize {
        let idx = self.times.partition_point(|&s| s < t);
        if idx == 0 {
            0
        } else if idx == self.times.len() {
            idx - 1
        } else if (self.times[idx] - t).abs() < (t - self.times[idx - 1]).abs() {
            idx
        } else {
            idx - 1
        }
    }

    /// Cubic Lagrange interpolation in `r` on row `k`.
    pub fn value_at(&self, r: f64, k: usize) -> f64 {
        interpolate_row(self.nodes(), self.values.row(k), r)
    }

    /// Interpolated `u(r, t)`: cubic in `r`, linear in `t`.
    pub fn sample(&self, r: f64, t: f64) -> f64 {
        let n = self.times.len();
        let idx = self.times.partition_point(|&s| s < t);
        if idx < n && self.times[idx] == t {
            return self.value_at(r, idx);
        }
        if idx == 0 {
            return self.value_at(r, 0);
        }
        if idx == n {
            return self.value_at(r, n - 1);
        }
        let (t0, t1) = (self.times[idx - 1], self.times[idx]);
        let w = (t - t0) / (t1 - t0);
        (1.0 - w) * self.value_at(r, idx - 1) + w * self.value_at(r, idx)
    }
}

/// Four-point Lagrange interpolation on nonuniform nodes.
pub fn interpolate_row(nodes: &[f64], values: ArrayView1<'_, f64>, r: f64) -> f64 {
    let m = nodes.len();
    let idx = nodes.partition_point(|&x| x < r);
    if idx < m && nodes[idx] == r {
        return values[idx];
    }
    let start = idx.saturating_sub(2).min(m.saturating_sub(4));
    let end = (start + 4).min(m);
    let mut sum = 0.0;
    for j in start..end {
        let mut w = 1.0;
        for l in start..end {
            if l != j {
                w *= (r - nodes[l]) / (nodes[j] - nodes[l]);
            }
        }
        sum += w * values[j];
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::Array1;

    #[test]
    fn interpolation_is_exact_for_cubics() {
        let nodes: Vec<f64> = (0..10).map(|i| 0.1 + 0.05 * (i as f64).powf(1.5)).collect();
        let values = Array1::from_iter(nodes.iter().map(|r| r * r * r - 2.0 * r));
        for r in [0.1, 0.13, 0.4, 1.0, nodes[9]] {
            let v = interpolate_row(&nodes, values.view(), r);
            assert!((v - (r * r * r - 2.0 * r)).abs() < 1e-13);
        }
    }
}

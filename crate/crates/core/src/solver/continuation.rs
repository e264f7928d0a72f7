use std::sync::Arc;

use ndarray::Array2;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic::ModelParams;
use crate::error::{Error, Result};
use crate::initdata::{EpsilonProblem, InitialDatum};
use crate::solver::{solve_annulus, RadialGrid, SchemeConfig, SpacetimeField};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridPolicy {
    /// Number of intervals `M` at the reference `ε` (the first of a
    /// sequence).
    pub intervals: usize,
    pub grading_exponent: f64,
    /// `s` in `M(ε) = M · (ε_ref/ε)^s`; `0` keeps `M` fixed.
    pub eps_scaling: f64,
}

impl Default for GridPolicy {
    fn default() -> Self {
        Self {
            intervals: 400,
            grading_exponent: 2.0,
            eps_scaling: 0.0,
        }
    }
}

impl GridPolicy {
    pub fn intervals_for(&self, eps: f64, eps_ref: f64) -> usize {
        if self.eps_scaling == 0.0 {
            self.intervals
        } else {
            (self.intervals as f64 * (eps_ref / eps).powf(self.eps_scaling)).round() as usize
        }
    }

    pub fn grid(&self, eps: f64, eps_ref: f64, radius: f64) -> Result<RadialGrid> {
        RadialGrid::graded(eps, radius, self.intervals_for(eps, eps_ref), self.grading_exponent)
    }
}

/// `[r_min, r_max] × [t_min, t_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CompactWindow {
    pub r_min: f64,
    pub r_max: f64,
    pub t_min: f64,
    pub t_max: f64,
}

impl CompactWindow {
    /// `[0.1 R, R] × [0.5, T]`.
    pub fn standard(radius: f64, horizon: f64) -> Self {
        Self {
            r_min: 0.1 * radius,
            r_max: radius,
            t_min: 0.5f64.min(horizon),
            t_max: horizon,
        }
    }
}

/// Finest field with the origin value `u(0, t) = 0` appended.
#[derive(Debug, Clone, PartialEq)]
pub struct LimitEstimate {
    pub radii: Vec<f64>,
    pub times: Vec<f64>,
    pub values: Array2<f64>,
}

impl LimitEstimate {
    fn from_field(field: &SpacetimeField) -> Self {
        let mut radii = vec![0.0];
        radii.extend_from_slice(field.nodes());
        let (rows, cols) = field.values.dim();
        let mut values = Array2::zeros((rows, cols + 1));
        values.slice_mut(ndarray::s![.., 1..]).assign(&field.values);
        Self {
            radii,
            times: field.times.clone(),
            values,
        }
    }
}

#[derive(Debug)]
pub struct ContinuationOutput {
    pub eps: Vec<f64>,
    /// Successful runs in order of decreasing `ε`.
    pub fields: Vec<SpacetimeField>,
    pub failures: Vec<(f64, Error)>,
    /// Sup-differences of consecutive successful fields on `window`.
    pub differences: Vec<f64>,
    pub window: CompactWindow,
    pub limit: Option<LimitEstimate>,
}

impl ContinuationOutput {
    pub fn finest(&self) -> Option<&SpacetimeField> {
        self.fields.last()
    }

    /// Observed rates `log(d_j/d_{j+1}) / log(ε_j/ε_{j+1})`.
    pub fn observed_rates(&self) -> Vec<f64> {
        let eps: Vec<f64> = self.fields.iter().map(|f| f.problem.epsilon).collect();
        self.differences
            .windows(2)
            .enumerate()
            .map(|(j, d)| (d[0] / d[1]).ln() / (eps[j + 1] / eps[j + 2]).ln())
            .collect()
    }
}

/// `max |a − b|` over the nodes of `a` in the window and the stored times
/// of `a` in the window; `b` is interpolated.
pub fn sup_difference(a: &SpacetimeField, b: &SpacetimeField, window: &CompactWindow) -> f64 {
    let mut sup = 0.0f64;
    for (k, &t) in a.times.iter().enumerate() {
        if t < window.t_min || t > window.t_max {
            continue;
        }
        for (i, &r) in a.nodes().iter().enumerate() {
            if r < window.r_min || r > window.r_max {
                continue;
            }
            sup = sup.max((a.values[[k, i]] - b.sample(r, t)).abs());
        }
    }
    sup
}

/// Solves every `ε` in `eps_sequence` (independently and in parallel) and
/// measures consecutive differences.
pub fn continuation(
    params: &ModelParams,
    datum: &InitialDatum,
    eps_sequence: &[f64],
    policy: &GridPolicy,
    horizon: f64,
    scheme: &SchemeConfig,
    window: CompactWindow,
) -> Result<ContinuationOutput> {
    if eps_sequence.is_empty() {
        return Err(Error::config("continuation.eps", "sequence is empty"));
    }
    if eps_sequence.windows(2).any(|w| !(w[1] < w[0])) || !(eps_sequence[0] < params.radius) {
        return Err(Error::config(
            "continuation.eps",
            "sequence must be strictly decreasing and below R",
        ));
    }
    scheme.validate(horizon)?;
    let runs: Vec<Result<SpacetimeField>> = eps_sequence
        .par_iter()
        .map(|&eps| {
            let grid = policy.grid(eps, eps_sequence[0], params.radius)?;
            let problem = Arc::new(EpsilonProblem::new(params, datum, grid)?);
            solve_annulus(problem, horizon, scheme)
        })
        .collect();
    let mut fields = Vec::new();
    let mut failures = Vec::new();
    for (&eps, run) in eps_sequence.iter().zip(runs) {
        match run {
            Ok(f) => fields.push(f),
            Err(e) => failures.push((eps, e)),
        }
    }
    let differences = fields
        .windows(2)
        .map(|w| sup_difference(&w[1], &w[0], &window))
        .collect();
    let limit = fields.last().map(LimitEstimate::from_field);
    Ok(ContinuationOutput {
        eps: eps_sequence.to_vec(),
        fields,
        failures,
        differences,
        window,
        limit,
    })
}

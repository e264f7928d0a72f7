//! Method-of-lines solver for the annulus problem
//! `u_t = Δu + u f_ε(u_r)` on `ε < r < R` and the `ε → 0` continuation.

mod continuation;
mod field;
mod grid;
pub mod operator;
mod stepper;

use std::sync::Arc;

use ndarray::Array2;

pub use continuation::{
    continuation, sup_difference, CompactWindow, ContinuationOutput, GridPolicy, LimitEstimate,
};
pub use field::{interpolate_row, RunDiagnostics, SpacetimeField};
pub use grid::RadialGrid;
pub use operator::{RadialOperator, Tridiagonal};
pub use stepper::{SchemeConfig, State, StepStats, Stepper, TimeStepper};

use crate::error::Result;
use crate::initdata::EpsilonProblem;

/// Solves one annulus problem on `[0, horizon]`.
pub fn solve_annulus(problem: Arc<EpsilonProblem>, horizon: f64, scheme: &SchemeConfig) -> Result<SpacetimeField> {
    scheme.validate(horizon)?;
    let mut stepper = Stepper::new(&problem, *scheme)?;
    let m = problem.grid.len();
    let c_star = problem.c_star;
    let mut state = stepper.initial_state();
    let mut times = vec![0.0];
    let mut rows: Vec<f64> = state.u.clone();
    let mut max_grad = stepper.operator().derivative(&state.u).iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let mut dt = scheme.dt_initial;
    let mut smallest_dt = f64::INFINITY;
    let mut step_count = 0usize;
    // Tolerance on landing exactly on the horizon.
    let snap = 1e-9 * scheme.dt_initial;
    while state.t < horizon - snap {
        let mut h = dt.min(horizon - state.t);
        if horizon - (state.t + h) < snap {
            h = horizon - state.t;
        }
        let next = match scheme.dt_control {
            None => stepper.step(&state, h)?,
            Some(tol) => {
                let (next, used, suggested) = adaptive_step(&mut stepper, &state, h, tol)?;
                h = used;
                dt = suggested;
                next
            }
        };
        smallest_dt = smallest_dt.min(h);
        state = next;
        step_count += 1;
        let grad = stepper.operator().derivative(&state.u);
        max_grad = grad.iter().fold(max_grad, |a, d| a.max(d.abs()));
        let last = state.t >= horizon - snap;
        if last {
            state.t = horizon;
        }
        if step_count.is_multiple_of(scheme.store_stride) || last {
            times.push(state.t);
            rows.extend_from_slice(&state.u);
        }
    }
    let values = Array2::from_shape_vec((times.len(), m), rows).expect("rows have grid length");
    let diagnostics = RunDiagnostics {
        stats: stepper.stats,
        smallest_dt,
        max_abs_gradient: max_grad,
        cutoff_active: max_grad > c_star,
    };
    drop(stepper);
    SpacetimeField::new(problem, times, values, diagnostics)
}

/// Discrete stationary state on the problem's grid with the limiting
/// boundary values `u*(ε)` and `u*(R)`, found by Newton from the nodal
/// values of `u*`.
pub fn discrete_equilibrium(problem: &EpsilonProblem) -> Result<Vec<f64>> {
    Stepper::new(problem, SchemeConfig::default())?.equilibrium()
}

/// Step doubling: compares one step of `h` with two of `h/2`, keeps the
/// finer result when the max-norm gap is within `tol`, otherwise shrinks.
fn adaptive_step(stepper: &mut Stepper, state: &State, mut h: f64, tol: f64) -> Result<(State, f64, f64)> {
    loop {
        let coarse = stepper.step(state, h)?;
        let half = stepper.step(state, 0.5 * h)?;
        let mut fine = stepper.step(&half, 0.5 * h)?;
        let err = coarse.u.iter().zip(&fine.u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let factor = if err == 0.0 { 2.0 } else { (0.9 * (tol / err).sqrt()).clamp(0.2, 2.0) };
        if err <= tol || h < 1e-12 {
            fine.previous = Some((state.u.clone(), h));
            return Ok((fine, h, h * factor));
        }
        h *= factor;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ModelParams;
    use crate::initdata::{choose_amplitude_c, make_initial_datum, Family};

    fn n2_problem(eps: f64, m: usize) -> Arc<EpsilonProblem> {
        let p = ModelParams::with_default_lambda(2, 0.6, 1.0).unwrap();
        let d = make_initial_datum(&p, Family::ModeDeficit { k: 2.0, amplitude: 0.25 }).unwrap();
        let run = p.with_amplitude(choose_amplitude_c(&p, &d).unwrap()).unwrap();
        let grid = RadialGrid::graded(eps, p.radius, m, 2.0).unwrap();
        Arc::new(EpsilonProblem::new(&run, &d, grid).unwrap())
    }

    #[test]
    fn deterministic_and_lands_on_horizon() {
        let prob = n2_problem(0.02, 100);
        let scheme = SchemeConfig {
            dt_initial: 7e-3,
            store_stride: 3,
            ..Default::default()
        };
        let a = solve_annulus(prob.clone(), 0.1, &scheme).unwrap();
        let b = solve_annulus(prob, 0.1, &scheme).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.horizon(), 0.1);
        assert_eq!(a.times[0], 0.0);
        assert!(a.times.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn adaptive_steps_track_fixed_steps() {
        let prob = n2_problem(0.02, 100);
        let fixed = solve_annulus(
            prob.clone(),
            0.2,
            &SchemeConfig {
                dt_initial: 2e-4,
                ..Default::default()
            },
        )
        .unwrap();
        let adaptive = solve_annulus(
            prob,
            0.2,
            &SchemeConfig {
                dt_initial: 1e-2,
                dt_control: Some(1e-6),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(adaptive.horizon(), 0.2);
        let k = fixed.times.len() - 1;
        let j = adaptive.times.len() - 1;
        let gap = (0..fixed.nodes().len())
            .map(|i| (fixed.values[[k, i]] - adaptive.values[[j, i]]).abs())
            .fold(0.0f64, f64::max);
        assert!(gap < 1e-3, "gap {gap}");
    }
}

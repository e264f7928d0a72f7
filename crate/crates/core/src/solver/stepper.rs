use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::initdata::EpsilonProblem;
use crate::solver::operator::{RadialOperator, Tridiagonal};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TimeStepper {
    /// Backward Euler with a damped Newton solve.
    ImplicitEuler,
    /// Crank–Nicolson with the nonlinearity linearized around an
    /// extrapolated midpoint state; started with two backward Euler half
    /// steps.
    ImexCn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SchemeConfig {
    pub time_stepper: TimeStepper,
    pub dt_initial: f64,
    /// Step-doubling tolerance on the max-norm; fixed steps when absent.
    pub dt_control: Option<f64>,
    pub newton_tol: f64,
    pub newton_max_iter: usize,
    /// Number of successive step halvings after a failed Newton solve.
    pub max_retries: usize,
    /// Store every `store_stride`-th step (the final step is always kept).
    pub store_stride: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            time_stepper: TimeStepper::ImplicitEuler,
            dt_initial: 1e-3,
            dt_control: None,
            newton_tol: 1e-12,
            newton_max_iter: 30,
            max_retries: 8,
            store_stride: 1,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self, horizon: f64) -> Result<()> {
        let bad = |path: &str, detail: String| Err(Error::config(format!("scheme.{path}"), detail));
        if !(self.dt_initial > 0.0) || !self.dt_initial.is_finite() {
            return bad("dt_initial", format!("must be positive, got {}", self.dt_initial));
        }
        if !(horizon > 0.0) || !horizon.is_finite() {
            return bad("horizon", format!("must be positive, got {horizon}"));
        }
        if self.dt_initial > horizon {
            return bad("dt_initial", format!("{} exceeds the horizon {horizon}", self.dt_initial));
        }
        if let Some(tol) = self.dt_control {
            if !(tol > 0.0) || !tol.is_finite() {
                return bad("dt_control", format!("must be positive, got {tol}"));
            }
        }
        if !(self.newton_tol > 0.0) {
            return bad("newton_tol", format!("must be positive, got {}", self.newton_tol));
        }
        if self.newton_max_iter == 0 {
            return bad("newton_max_iter", "must be at least 1".into());
        }
        if self.store_stride == 0 {
            return bad("store_stride", "must be at least 1".into());
        }
        Ok(())
    }
}

/// Solution at one time level. `previous` keeps the prior level and the
/// step that led here, which the midpoint extrapolation needs.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub t: f64,
    pub u: Vec<f64>,
    pub previous: Option<(Vec<f64>, f64)>,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct StepStats {
    pub steps: usize,
    pub newton_iterations: usize,
    pub retries: usize,
}

pub struct Stepper<'a> {
    problem: &'a EpsilonProblem,
    op: RadialOperator,
    scheme: SchemeConfig,
    pub stats: StepStats,
}

impl<'a> Stepper<'a> {
    pub fn new(problem: &'a EpsilonProblem, scheme: SchemeConfig) -> Result<Self> {
        Ok(Self {
            op: RadialOperator::new(&problem.grid, problem.params.n)?,
            problem,
            scheme,
            stats: StepStats::default(),
        })
    }

    pub fn operator(&self) -> &RadialOperator {
        &self.op
    }

    pub fn initial_state(&self) -> State {
        State {
            t: 0.0,
            u: self.problem.u0eps.values.clone(),
            previous: None,
        }
    }

    /// Discrete right-hand side `Δu + u f_ε(u_r)` (zero at boundary rows).
    pub fn rhs(&self, u: &[f64]) -> Vec<f64> {
        let mut out = self.op.laplacian(u);
        let f = &self.problem.cutoff;
        for i in 1..u.len() - 1 {
            out[i] += u[i] * f.apply(self.op.derivative_at(u, i));
        }
        out
    }

    /// Advances by `dt` with the configured stepper.
    pub fn step(&mut self, state: &State, dt: f64) -> Result<State> {
        let u = match (self.scheme.time_stepper, &state.previous) {
            (TimeStepper::ImplicitEuler, _) => self.backward_euler_robust(&state.u, state.t, dt, 0)?,
            (TimeStepper::ImexCn, None) => {
                let half = self.backward_euler_robust(&state.u, state.t, 0.5 * dt, 0)?;
                self.backward_euler_robust(&half, state.t + 0.5 * dt, 0.5 * dt, 0)?
            }
            (TimeStepper::ImexCn, Some((prev, dt_prev))) => self.crank_nicolson(state, prev, *dt_prev, dt)?,
        };
        self.stats.steps += 1;
        Ok(State {
            t: state.t + dt,
            u,
            previous: Some((state.u.clone(), dt)),
        })
    }

    /// Newton on `Δ_h U + U f_ε(D_h U) = 0` with boundary values `u*(ε)`
    /// and `u*(R)`: a backward Euler step of effectively infinite length.
    pub fn equilibrium(&mut self) -> Result<Vec<f64>> {
        let p = &self.problem.params;
        let start: Vec<f64> = self.problem.grid.nodes().iter().map(|&r| p.u_star(r)).collect::<Result<_>>()?;
        self.backward_euler(&start, f64::INFINITY, 1e12).map_err(|detail| Error::Newton {
            eps: self.problem.epsilon,
            step: 0,
            t: f64::INFINITY,
            detail: format!("stationary solve: {detail}"),
        })
    }

    fn backward_euler_robust(&mut self, u_old: &[f64], t: f64, dt: f64, depth: usize) -> Result<Vec<f64>> {
        match self.backward_euler(u_old, t + dt, dt) {
            Ok(u) => Ok(u),
            Err(detail) => {
                if depth >= self.scheme.max_retries {
                    return Err(Error::Newton {
                        eps: self.problem.epsilon,
                        step: self.stats.steps,
                        t,
                        detail: format!("{detail} (after {depth} step halvings, dt = {dt:e})"),
                    });
                }
                self.stats.retries += 1;
                let half = self.backward_euler_robust(u_old, t, 0.5 * dt, depth + 1)?;
                self.backward_euler_robust(&half, t + 0.5 * dt, 0.5 * dt, depth + 1)
            }
        }
    }

    fn boundary_values(&self, t: f64) -> (f64, f64) {
        (self.problem.inner_bc(t), self.problem.outer_bc())
    }

    /// Residual of the backward Euler equations and its Jacobian.
    fn assemble(&self, u: &[f64], u_old: &[f64], t_new: f64, dt: f64, jac: &mut Tridiagonal) -> Vec<f64> {
        let m = u.len();
        let f = &self.problem.cutoff;
        let (g_in, g_out) = self.boundary_values(t_new);
        let mut res = vec![0.0; m];
        res[0] = u[0] - g_in;
        res[m - 1] = u[m - 1] - g_out;
        jac.diag[0] = 1.0;
        jac.upper[0] = 0.0;
        jac.diag[m - 1] = 1.0;
        jac.lower[m - 1] = 0.0;
        for i in 1..m - 1 {
            let l = self.op.laplacian_weights(i);
            let d = self.op.d1_weights(i);
            let s = d[0] * u[i - 1] + d[1] * u[i] + d[2] * u[i + 1];
            let lap = l[0] * u[i - 1] + l[1] * u[i] + l[2] * u[i + 1];
            let fs = f.apply(s);
            let g = u[i] * f.derivative(s);
            res[i] = u[i] - u_old[i] - dt * (lap + u[i] * fs);
            jac.lower[i] = -dt * (l[0] + g * d[0]);
            jac.diag[i] = 1.0 - dt * (l[1] + fs + g * d[1]);
            jac.upper[i] = -dt * (l[2] + g * d[2]);
        }
        res
    }

    fn scaled_norm(res: &[f64], diag: &[f64]) -> f64 {
        res.iter().zip(diag).fold(0.0, |m, (r, d)| m.max((r / d).abs()))
    }

    /// Damped Newton for one backward Euler step. Convergence is measured on
    /// the residual scaled by the Jacobian diagonal, which removes the
    /// `dt/h²` amplification of rounding in the raw residual.
    fn backward_euler(&mut self, u_old: &[f64], t_new: f64, dt: f64) -> std::result::Result<Vec<f64>, String> {
        let m = u_old.len();
        let tol = self.scheme.newton_tol;
        let mut u = u_old.to_vec();
        let (g_in, g_out) = self.boundary_values(t_new);
        u[0] = g_in;
        u[m - 1] = g_out;
        let mut jac = Tridiagonal::zeros(m);
        let mut scratch = Tridiagonal::zeros(m);
        let mut res = self.assemble(&u, u_old, t_new, dt, &mut jac);
        for _ in 0..self.scheme.newton_max_iter {
            self.stats.newton_iterations += 1;
            let norm = Self::scaled_norm(&res, &jac.diag);
            if !norm.is_finite() {
                return Err("non-finite residual".into());
            }
            if norm <= tol {
                return Ok(u);
            }
            let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
            jac.solve(&mut delta).map_err(|e| e.to_string())?;
            let mut theta = 1.0;
            loop {
                let trial: Vec<f64> = u.iter().zip(&delta).map(|(a, b)| a + theta * b).collect();
                let trial_res = self.assemble(&trial, u_old, t_new, dt, &mut scratch);
                let trial_norm = Self::scaled_norm(&trial_res, &jac.diag);
                if trial_norm.is_finite() && trial_norm <= (1.0 - 1e-4 * theta) * norm {
                    u = trial;
                    res = trial_res;
                    std::mem::swap(&mut jac, &mut scratch);
                    break;
                }
                theta *= 0.5;
                if theta < 1.0 / 1024.0 {
                    if norm <= 1e3 * tol {
                        // Stagnation at the rounding floor.
                        return Ok(u);
                    }
                    return Err(format!("line search stalled at scaled residual {norm:.3e}"));
                }
            }
        }
        let norm = Self::scaled_norm(&res, &jac.diag);
        if norm <= tol {
            Ok(u)
        } else {
            Err(format!(
                "no convergence in {} iterations (scaled residual {norm:.3e})",
                self.scheme.newton_max_iter
            ))
        }
    }

    /// Linearly implicit Crank–Nicolson: with `N(U) = U f_ε(D_h U)` and its
    /// Jacobian `J` taken at the extrapolated midpoint `U^e`,
    /// `(I − dt/2 A) U^{n+1} = (I + dt/2 A) U^n + dt (N(U^e) − J U^e)` where
    /// `A = Δ_h + J`.
    fn crank_nicolson(&self, state: &State, prev: &[f64], dt_prev: f64, dt: f64) -> Result<Vec<f64>> {
        let u = &state.u;
        let m = u.len();
        let f = &self.problem.cutoff;
        let w = 0.5 * dt / dt_prev;
        let ext: Vec<f64> = u.iter().zip(prev).map(|(a, b)| a + w * (a - b)).collect();
        let mut sys = Tridiagonal::zeros(m);
        let mut rhs = vec![0.0; m];
        let (g_in, g_out) = self.boundary_values(state.t + dt);
        sys.diag[0] = 1.0;
        rhs[0] = g_in;
        sys.diag[m - 1] = 1.0;
        rhs[m - 1] = g_out;
        let h = 0.5 * dt;
        for i in 1..m - 1 {
            let l = self.op.laplacian_weights(i);
            let d = self.op.d1_weights(i);
            let s = d[0] * ext[i - 1] + d[1] * ext[i] + d[2] * ext[i + 1];
            let fs = f.apply(s);
            let g = ext[i] * f.derivative(s);
            let jn = [g * d[0], fs + g * d[1], g * d[2]];
            let lin = jn[0] * ext[i - 1] + jn[1] * ext[i] + jn[2] * ext[i + 1];
            let a = [l[0] + jn[0], l[1] + jn[1], l[2] + jn[2]];
            sys.lower[i] = -h * a[0];
            sys.diag[i] = 1.0 - h * a[1];
            sys.upper[i] = -h * a[2];
            rhs[i] = u[i] + h * (a[0] * u[i - 1] + a[1] * u[i] + a[2] * u[i + 1]) + dt * (ext[i] * fs - lin);
        }
        sys.solve(&mut rhs)?;
        Ok(rhs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::ModelParams;
    use crate::initdata::{choose_amplitude_c, make_initial_datum, Family};
    use crate::solver::RadialGrid;

    fn problem(amplitude: f64, eps: f64, m: usize) -> EpsilonProblem {
        let p = ModelParams::with_default_lambda(2, 0.6, 1.0).unwrap();
        let grid = RadialGrid::graded(eps, p.radius, m, 2.0).unwrap();
        if amplitude == 0.0 {
            let d = make_initial_datum(&p, Family::PolynomialBlend { a: 0.0, k: 2.0 }).unwrap();
            return EpsilonProblem::new(&p.with_amplitude(0.0).unwrap(), &d, grid).unwrap();
        }
        let d = make_initial_datum(&p, Family::ModeDeficit { k: 2.0, amplitude }).unwrap();
        let run = p.with_amplitude(choose_amplitude_c(&p, &d).unwrap()).unwrap();
        EpsilonProblem::new(&run, &d, grid).unwrap()
    }

    #[test]
    fn boundary_rows_hold_exactly() {
        let prob = problem(0.25, 0.02, 100);
        for stepper in [TimeStepper::ImplicitEuler, TimeStepper::ImexCn] {
            let scheme = SchemeConfig {
                time_stepper: stepper,
                ..Default::default()
            };
            let mut s = Stepper::new(&prob, scheme).unwrap();
            let mut state = s.initial_state();
            for _ in 0..5 {
                state = s.step(&state, 1e-3).unwrap();
                assert_eq!(state.u[0], prob.inner_bc(state.t));
                assert_eq!(*state.u.last().unwrap(), prob.outer_bc());
            }
        }
    }

    #[test]
    fn stationary_state_is_nearly_fixed() {
        let prob = problem(0.0, 0.02, 200);
        let mut s = Stepper::new(&prob, SchemeConfig::default()).unwrap();
        let start = s.initial_state();
        let mut state = start.clone();
        for _ in 0..50 {
            state = s.step(&state, 1e-2).unwrap();
        }
        let drift = state.u.iter().zip(&start.u).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(drift < 1e-4, "drift {drift}");
    }

    #[test]
    fn difference_quotient_approaches_rhs() {
        let prob = problem(0.25, 0.05, 80);
        let mut s = Stepper::new(&prob, SchemeConfig::default()).unwrap();
        // Smooth state: advance a little so that the data is compatible.
        let mut state = s.initial_state();
        for _ in 0..20 {
            state = s.step(&state, 1e-3).unwrap();
        }
        let rhs = s.rhs(&state.u);
        let err = |s: &mut Stepper, dt: f64| {
            let next = s.step(&state, dt).unwrap();
            (1..state.u.len() - 1)
                .map(|i| ((next.u[i] - state.u[i]) / dt - rhs[i]).abs())
                .fold(0.0f64, f64::max)
        };
        let e1 = err(&mut s, 1e-5);
        let e2 = err(&mut s, 5e-6);
        assert!(e1 / e2 > 1.8, "e1 {e1} e2 {e2}");
    }

    #[test]
    fn scheme_validation() {
        let s = SchemeConfig::default();
        assert!(s.validate(1.0).is_ok());
        assert!(s.validate(1e-4).is_err());
        assert!(SchemeConfig { newton_tol: 0.0, ..s }.validate(1.0).is_err());
        assert!(SchemeConfig { dt_control: Some(-1.0), ..s }.validate(1.0).is_err());
    }
}

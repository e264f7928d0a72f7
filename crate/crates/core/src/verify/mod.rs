//! Numerical assertions on solver output: comparison bounds, gradient sign
//! and size, weighted gradient growth, singularity shape, decay, the weak
//! formulation and agreement between schemes.

pub mod fit;
pub mod weak;

use serde::{Deserialize, Serialize};

pub use crate::report::{Check, Status, VerificationReport};
use crate::error::{Error, Result};
use crate::solver::{discrete_equilibrium, sup_difference, CompactWindow, SpacetimeField};
use fit::{fit_line, fit_power_law, minimal_affine_majorant, ExponentFit, LineFit};
use weak::{origin_flux, weak_residual, TestFunction};

/// Default tolerances, overridable by configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Tolerances {
    pub sandwich: Option<f64>,
    pub gradient_sign: Option<f64>,
    pub bernstein_residual: f64,
    pub pointwise_stability: f64,
    pub uniqueness: f64,
    pub cutoff_rerun: f64,
    pub exponent_range: (f64, f64),
    pub min_r_squared: f64,
    pub decay_fraction: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            sandwich: None,
            gradient_sign: None,
            bernstein_residual: 0.05,
            pointwise_stability: 0.2,
            uniqueness: 1e-3,
            cutoff_rerun: 1e-10,
            exponent_range: (-0.70, -0.63),
            min_r_squared: 0.99,
            decay_fraction: 0.9,
        }
    }
}

impl Tolerances {
    /// `5(h² + dt)`.
    pub fn sandwich_for(&self, h: f64, dt: f64) -> f64 {
        self.sandwich.unwrap_or(5.0 * (h * h + dt))
    }

    /// `1e−6 + 10h²`.
    pub fn gradient_sign_for(&self, h: f64) -> f64 {
        self.gradient_sign.unwrap_or(1e-6 + 10.0 * h * h)
    }
}

/// Largest violations of `u ≤ u*` and of `u ≥ u* − v` over all stored
/// `(r, t)`.
pub fn sandwich_violations(field: &SpacetimeField) -> Result<(f64, f64)> {
    let p = &field.problem.params;
    let nodes = field.nodes();
    let lam2 = p.lambda * p.lambda;
    let mut us = Vec::with_capacity(nodes.len());
    let mut psi = Vec::with_capacity(nodes.len());
    for &r in nodes {
        us.push(p.u_star(r)?);
        psi.push(p.mode_shape(r)?.psi);
    }
    let (mut upper, mut lower) = (0.0f64, 0.0f64);
    for (k, &t) in field.times.iter().enumerate() {
        let scale = p.amplitude * (-lam2 * t).exp();
        for (i, u) in field.values.row(k).iter().enumerate() {
            upper = upper.max(u - us[i]);
            lower = lower.max(us[i] - scale * psi[i] - u);
        }
    }
    Ok((upper, lower))
}

pub fn check_sandwich(field: &SpacetimeField, tol: f64) -> Result<Check> {
    let (upper, lower) = sandwich_violations(field)?;
    let worst = upper.max(lower);
    Ok(Check::new("sandwich", "u* - v <= u <= u* at every stored point")
        .tolerance(tol)
        .measure("upper_violation", upper)
        .measure("lower_violation", lower)
        .measure("max_violation", worst)
        .passes(worst <= tol))
}

pub fn max_positive_gradient(field: &SpacetimeField) -> f64 {
    field.gradient().iter().fold(0.0f64, |m, &g| m.max(g))
}

pub fn check_monotone(field: &SpacetimeField, tol: f64) -> Check {
    let pos = max_positive_gradient(field);
    Check::new("monotone", "u_r <= 0 at every stored point")
        .tolerance(tol)
        .measure("max_positive_gradient", pos)
        .passes(pos <= tol)
}

/// `sup |u_r| ≤ c*_ε`, the cut-off never active, and (when given) a rerun
/// with a wider cut-off support reproducing the field.
pub fn check_gradient_box(field: &SpacetimeField, rerun: Option<&SpacetimeField>, rerun_tol: f64) -> Check {
    let stored = field.gradient().iter().fold(0.0f64, |m, &g| m.max(g.abs()));
    let sup = stored.max(field.diagnostics.max_abs_gradient.max(0.0));
    let c_star = field.problem.c_star;
    let mut ok = sup <= c_star * (1.0 + 1e-6) && !field.diagnostics.cutoff_active;
    let mut check = Check::new("gradient_box", "sup |u_r| <= c*_eps, so the cut-off reduces to s^3")
        .tolerance(c_star * (1.0 + 1e-6))
        .measure("sup_abs_gradient", sup)
        .measure("c_star", c_star)
        .measure("margin", c_star - sup)
        .measure("cutoff_active", f64::from(u8::from(field.diagnostics.cutoff_active)));
    if let Some(other) = rerun {
        let diff = field
            .values
            .iter()
            .zip(other.values.iter())
            .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let same_shape = field.values.dim() == other.values.dim();
        ok &= same_shape && diff <= rerun_tol;
        check = check
            .measure("rerun_support", other.problem.cutoff.support_radius)
            .measure("rerun_max_difference", if same_shape { diff } else { f64::INFINITY });
    }
    check.passes(ok)
}

/// `W(t) = max_{r > δ} (r − δ)^{p+3} u_r^p` at each stored time.
pub fn bernstein_series(field: &SpacetimeField, p: u32, delta: f64) -> Vec<f64> {
    let g = field.gradient();
    let nodes = field.nodes();
    (0..field.times.len())
        .map(|k| {
            nodes
                .iter()
                .enumerate()
                .filter(|(_, &r)| r > delta)
                .map(|(i, &r)| (r - delta).powi(p as i32 + 3) * g[[k, i]].powi(p as i32))
                .fold(0.0f64, f64::max)
        })
        .collect()
}

/// Affine majorant of `W` fitted on `[0, T/2]` (least integral) and
/// tested on `[T/2, T]`; the residual is `max (W − M)₊ / M` there.
pub fn check_weighted_bernstein(field: &SpacetimeField, p: u32, delta: f64, tol: f64) -> Result<Check> {
    if p < 4 || !p.is_multiple_of(2) {
        return Err(Error::domain("Bernstein exponent p (even, >= 4)", f64::from(p)));
    }
    let w = bernstein_series(field, p, delta);
    let t = &field.times;
    let half = 0.5 * field.horizon();
    let split = t.partition_point(|&s| s <= half);
    let majorant = minimal_affine_majorant(&t[..split], &w[..split])
        .ok_or_else(|| Error::Grid("no stored times in the fit window".into()))?;
    let mut residual = 0.0f64;
    let mut positive = true;
    for (&s, &wk) in t.iter().zip(&w) {
        let m = majorant.at(s);
        positive &= m > 0.0;
        if s > half && m > 0.0 {
            residual = residual.max((wk - m).max(0.0) / m);
        }
    }
    Ok(Check::new(
        format!("bernstein_p{p}"),
        "max_{r>delta} (r-delta)^{p+3} u_r^p grows at most affinely in t",
    )
    .tolerance(tol)
    .measure("p", f64::from(p))
    .measure("delta", delta)
    .measure("a", majorant.a)
    .measure("b", majorant.b)
    .measure("w_start", w[0])
    .measure("w_end", *w.last().unwrap_or(&f64::NAN))
    .measure("residual", residual)
    .passes(positive && residual <= tol))
}

/// `sup |u_r| r^{(p+3)/p}` over `r ∈ (2ε, R)` and all stored times, with
/// the maxima over the innermost decade `(2ε, 20ε]` and beyond.
pub fn pointwise_gradient_bound(field: &SpacetimeField, p: u32) -> (f64, f64, f64) {
    let g = field.gradient();
    let nodes = field.nodes();
    let eps = field.problem.epsilon;
    let radius = field.problem.params.radius;
    let e = (p as f64 + 3.0) / p as f64;
    let (mut inner, mut outer) = (0.0f64, 0.0f64);
    for (i, &r) in nodes.iter().enumerate() {
        if r <= 2.0 * eps || r >= radius {
            continue;
        }
        let w = r.powf(e);
        let m = (0..field.times.len()).fold(0.0f64, |m, k| m.max(g[[k, i]].abs() * w));
        if r <= 20.0 * eps {
            inner = inner.max(m);
        } else {
            outer = outer.max(m);
        }
    }
    (inner.max(outer), inner, outer)
}

pub fn check_pointwise_gradient(field: &SpacetimeField, p: u32) -> Check {
    let (bound, inner, outer) = pointwise_gradient_bound(field, p);
    let resolved = 20.0 * field.problem.epsilon < field.problem.params.radius;
    let ok = bound.is_finite() && (!resolved || inner <= 1.1 * outer);
    Check::new(
        format!("pointwise_gradient_p{p}"),
        "|u_r| r^{(p+3)/p} stays bounded as r approaches 2 eps",
    )
    .tolerance(1.1)
    .measure("bound", bound)
    .measure("inner_decade_max", inner)
    .measure("outer_max", outer)
    .passes(ok)
}

/// Relative change of the pointwise bound between two `ε`.
pub fn check_pointwise_stability(coarse: &SpacetimeField, fine: &SpacetimeField, p: u32, tol: f64) -> Check {
    let (a, _, _) = pointwise_gradient_bound(coarse, p);
    let (b, _, _) = pointwise_gradient_bound(fine, p);
    let change = (b / a - 1.0).abs();
    Check::new(
        format!("pointwise_gradient_p{p}_stability"),
        "the pointwise gradient bound is stable as eps is halved",
    )
    .tolerance(tol)
    .measure("bound_coarse", a)
    .measure("bound_fine", b)
    .measure("relative_change", change)
    .passes(change <= tol)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SingularityFit {
    pub time: f64,
    pub fit: Option<ExponentFit>,
    /// `max_r r^{3/2−n−ν}(u* − u)`
    pub shape_functional: f64,
}

/// Log-log fit of `|u_r|` on `[2ε, 20ε]` at the stored time nearest `t`.
pub fn fit_singularity(field: &SpacetimeField, t: f64, tol: &Tolerances) -> Result<(Check, SingularityFit)> {
    let p = &field.problem.params;
    let eps = field.problem.epsilon;
    let k = field.nearest_time_index(t);
    let time = field.times[k];
    let g = field.gradient();
    let nodes = field.nodes();
    let e = 1.5 - p.n as f64 - p.nu;
    let mut functional = 0.0f64;
    for (i, &r) in nodes.iter().enumerate() {
        if r >= 2.0 * eps && r <= 20.0 * eps {
            functional = functional.max(r.powf(e) * (p.u_star(r)? - field.values[[k, i]]));
        }
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = nodes
        .iter()
        .enumerate()
        .filter(|(_, &r)| r >= 2.0 * eps && r <= 20.0 * eps)
        .map(|(i, &r)| (r, g[[k, i]].abs()))
        .unzip();
    let name = format!("singularity_t{time:.4}");
    let basis = "u_r ~ -(alpha/3) r^{-2/3} near the origin and r^{3/2-n-nu}(u* - u) <= C";
    let functional_bound = 1.05 * p.amplitude;
    let mut check = Check::new(name, basis)
        .tolerance(functional_bound)
        .measure("time", time)
        .measure("shape_functional", functional)
        .measure("expected_prefactor", p.alpha / 3.0);
    let resolved = 20.0 * eps < p.radius && xs.len() >= 8;
    let fit = if resolved { fit_power_law(&xs, &ys) } else { None };
    match fit {
        None => {
            check = check
                .status(Status::Inconclusive)
                .note("fit window [2 eps, 20 eps] is not resolved");
        }
        Some(f) => {
            let (lo, hi) = tol.exponent_range;
            let ok = f.exponent >= lo
                && f.exponent <= hi
                && f.r_squared >= tol.min_r_squared
                && functional <= functional_bound;
            check = check
                .measure("exponent", f.exponent)
                .measure("prefactor", f.prefactor)
                .measure("r_squared", f.r_squared)
                .passes(ok);
        }
    }
    Ok((
        check,
        SingularityFit {
            time,
            fit,
            shape_functional: functional,
        },
    ))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DecayFit {
    pub times: Vec<f64>,
    /// `sup_r |u − u*|` per stored time.
    pub distance: Vec<f64>,
    /// `sup_r |u − u*_h|` with `u*_h` the discrete equilibrium.
    pub discrete_distance: Vec<f64>,
    pub fit: Option<LineFit>,
    pub rate: f64,
}

/// Envelope `sup|u − u*| ≤ e^{−λ²t} sup v(·,0) + tol`, and the decay rate
/// from a log-linear fit on `[T/2, T]` of the distance to the discrete
/// equilibrium (the distance to `u*` itself levels off at the `O(h²)` gap
/// between the two).
pub fn fit_decay(field: &SpacetimeField, envelope_tol: f64, tol: &Tolerances) -> Result<(Check, DecayFit)> {
    let p = &field.problem.params;
    let nodes = field.nodes();
    let us: Vec<f64> = nodes.iter().map(|&r| p.u_star(r)).collect::<Result<_>>()?;
    let distance: Vec<f64> = (0..field.times.len())
        .map(|k| {
            field
                .values
                .row(k)
                .iter()
                .zip(&us)
                .fold(0.0f64, |m, (u, s)| m.max((u - s).abs()))
        })
        .collect();
    let equilibrium = discrete_equilibrium(&field.problem)?;
    let discrete_distance: Vec<f64> = (0..field.times.len())
        .map(|k| {
            field
                .values
                .row(k)
                .iter()
                .zip(&equilibrium)
                .fold(0.0f64, |m, (u, s)| m.max((u - s).abs()))
        })
        .collect();
    let equilibrium_gap = equilibrium.iter().zip(&us).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    // ψ is increasing on (0, R), so sup v(·,0) = v(R, 0).
    let sup_v0 = p.v(p.radius, 0.0)?;
    let lam2 = p.lambda * p.lambda;
    let mut envelope_violation = 0.0f64;
    for (&t, &d) in field.times.iter().zip(&distance) {
        envelope_violation = envelope_violation.max(d - (-lam2 * t).exp() * sup_v0);
    }
    let check = Check::new("decay", "sup_r |u - u*| <= e^{-lambda^2 t} sup v(., 0), decaying exponentially")
        .measure("lambda_squared", lam2)
        .measure("envelope_violation", envelope_violation)
        .measure("equilibrium_gap", equilibrium_gap);
    if p.amplitude == 0.0 {
        let out = DecayFit {
            times: field.times.clone(),
            distance,
            discrete_distance,
            fit: None,
            rate: f64::INFINITY,
        };
        return Ok((check.status(Status::Exact).note("C = 0: u stays at u*"), out));
    }
    let half = 0.5 * field.horizon();
    let (xs, ys): (Vec<f64>, Vec<f64>) = field
        .times
        .iter()
        .zip(&discrete_distance)
        .filter(|(&t, &d)| t >= half && d > 0.0)
        .map(|(&t, &d)| (t, d.ln()))
        .unzip();
    let fit = fit_line(&xs, &ys);
    let rate = fit.map_or(f64::NAN, |f| -f.slope);
    let floor = tol.decay_fraction * lam2;
    let ok = envelope_violation <= envelope_tol && rate >= floor;
    let check = check
        .tolerance(floor)
        .measure("envelope_tolerance", envelope_tol)
        .measure("rate", rate)
        .measure("rate_over_lambda_squared", rate / lam2)
        .passes(ok);
    Ok((
        check,
        DecayFit {
            times: field.times.clone(),
            distance,
            discrete_distance,
            fit,
            rate,
        },
    ))
}

/// Residuals of the weak identity per test function and per field.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakStudy {
    pub test_functions: Vec<String>,
    /// `refinement[j][l]`: residual of test function `l` on level `j`.
    pub refinement: Vec<Vec<f64>>,
    pub continuation: Vec<Vec<f64>>,
    pub flux_eps: Vec<f64>,
    pub flux: Vec<f64>,
}

fn strictly_decreasing(xs: &[f64]) -> bool {
    xs.len() >= 2 && xs.windows(2).all(|w| w[1] < w[0])
}

/// `levels`: fields under simultaneous `(h, dt, ε)` refinement;
/// `sequence`: an `ε`-continuation; the origin flux uses the last field of
/// `sequence`.
pub fn check_weak_identity(
    levels: &[&SpacetimeField],
    sequence: &[&SpacetimeField],
    family: &[TestFunction],
    flux_eps: &[f64],
) -> Result<(Check, WeakStudy)> {
    let name = "weak_identity";
    let basis = "the weak formulation holds across the origin and (1/eps) int int r^{n-1}|u_r| -> 0";
    let first = levels
        .first()
        .or(sequence.first())
        .ok_or_else(|| Error::Grid("weak identity needs at least one field".into()))?;
    let params = &first.problem.params;
    let mut study = WeakStudy {
        test_functions: family.iter().map(TestFunction::name).collect(),
        refinement: Vec::new(),
        continuation: Vec::new(),
        flux_eps: flux_eps.to_vec(),
        flux: Vec::new(),
    };
    if !params.weak_form_applies() {
        return Ok((
            Check::new(name, basis)
                .status(Status::Skipped)
                .note(format!("n = {} < 3: the identity is not claimed", params.n)),
            study,
        ));
    }
    let residuals = |fields: &[&SpacetimeField]| -> Result<Vec<Vec<f64>>> {
        fields
            .iter()
            .map(|f| {
                family
                    .iter()
                    .map(|tf| weak_residual(f, tf).map(|w| w.residual.abs()))
                    .collect()
            })
            .collect()
    };
    study.refinement = residuals(levels)?;
    study.continuation = residuals(sequence)?;
    if let Some(finest) = sequence.last() {
        study.flux = flux_eps
            .iter()
            .map(|&e| origin_flux(finest, e))
            .collect::<Result<_>>()?;
    }
    let mut check = Check::new(name, basis);
    let mut ok = true;
    for (l, tf) in family.iter().enumerate() {
        let across_levels: Vec<f64> = study.refinement.iter().map(|row| row[l]).collect();
        let level_ok = strictly_decreasing(&across_levels);
        ok &= level_ok;
        for (j, v) in across_levels.iter().enumerate() {
            check = check.measure(format!("level{j}_{}", tf.name()), *v);
        }
        if tf.bump.touches_origin() {
            let along: Vec<f64> = study.continuation.iter().map(|row| row[l]).collect();
            ok &= strictly_decreasing(&along);
            for (j, v) in along.iter().enumerate() {
                check = check.measure(format!("eps{j}_{}", tf.name()), *v);
            }
        }
    }
    // The flux list is ordered by decreasing eps'.
    ok &= strictly_decreasing(&study.flux);
    for (e, v) in flux_eps.iter().zip(&study.flux) {
        check = check.measure(format!("origin_flux_eps{e}"), *v);
    }
    Ok((check.passes(ok), study))
}

pub fn check_uniqueness_surrogate(
    a: &SpacetimeField,
    b: &SpacetimeField,
    window: &CompactWindow,
    tol: f64,
) -> Check {
    let diff = sup_difference(a, b, window);
    Check::new("uniqueness", "two different time integrators converge to the same solution")
        .tolerance(tol)
        .measure("sup_difference", diff)
        .passes(diff <= tol)
}

pub fn check_cauchy(differences: &[f64]) -> Check {
    let mut check = Check::new(
        "continuation_cauchy",
        "consecutive eps-fields approach each other on a fixed compact set",
    );
    for (j, d) in differences.iter().enumerate() {
        check = check.measure(format!("difference{j}"), *d);
    }
    check.passes(strictly_decreasing(differences))
}

/// `fine ≤ coarse / factor`, or both at the rounding floor.
pub fn check_refinement(name: &str, coarse: f64, fine: f64, factor: f64, floor: f64) -> Check {
    let at_floor = coarse <= floor && fine <= floor;
    let mut check = Check::new(name, "the measured violation shrinks under refinement of h and dt")
        .tolerance(factor)
        .measure("coarse", coarse)
        .measure("fine", fine)
        .measure("floor", floor);
    if at_floor {
        check = check.note("both levels at the rounding floor");
    }
    check.passes(at_floor || fine * factor <= coarse)
}

#[cfg(test)]
mod tests {
    use std::sync::Arc;

    use ndarray::Array2;

    use super::*;
    use crate::analytic::ModelParams;
    use crate::initdata::{make_initial_datum, EpsilonProblem, Family};
    use crate::solver::RadialGrid;

    fn problem(amplitude: f64) -> Arc<EpsilonProblem> {
        let p = ModelParams::with_default_lambda(2, 0.6, amplitude).unwrap();
        let d = make_initial_datum(&p, Family::PolynomialBlend { a: 0.0, k: 2.0 }).unwrap();
        let grid = RadialGrid::graded(0.005, 0.6, 200, 2.0).unwrap();
        Arc::new(EpsilonProblem::new(&p, &d, grid).unwrap())
    }

    /// Every time level equal to `g(r)`.
    fn synthetic<G: Fn(f64) -> f64>(problem: &Arc<EpsilonProblem>, times: &[f64], g: G) -> SpacetimeField {
        let nodes = problem.grid.nodes();
        let values = Array2::from_shape_fn((times.len(), nodes.len()), |(_, i)| g(nodes[i]));
        SpacetimeField::from_values(problem.clone(), times.to_vec(), values).unwrap()
    }

    fn times() -> Vec<f64> {
        (0..=20).map(|k| k as f64 * 0.05).collect()
    }

    #[test]
    fn stationary_field_passes_trivially() {
        let prob = problem(0.0);
        let p = prob.params;
        let f = synthetic(&prob, &times(), |r| p.u_star(r).unwrap());
        assert_eq!(sandwich_violations(&f).unwrap(), (0.0, 0.0));
        assert!(check_monotone(&f, 0.0).passed());
        let (decay, _) = fit_decay(&f, 0.0, &Tolerances::default()).unwrap();
        assert_eq!(decay.status, Status::Exact);
        let (sing, fit) = fit_singularity(&f, 0.5, &Tolerances::default()).unwrap();
        assert_eq!(sing.status, Status::Pass);
        let fit = fit.fit.unwrap();
        assert!((fit.exponent + 2.0 / 3.0).abs() < 1e-3, "{fit:?}");
        assert!((fit.prefactor / (p.alpha / 3.0) - 1.0).abs() < 1e-2, "{fit:?}");
        let w = bernstein_series(&f, 4, 0.03);
        assert!(w.windows(2).all(|x| x[0] == x[1]));
        assert!(check_weighted_bernstein(&f, 4, 0.03, 0.05).unwrap().passed());
    }

    #[test]
    fn negative_cases_fail() {
        let prob = problem(0.2);
        let p = prob.params;
        let c = prob.c_star;
        // Steeper than the gradient ceiling near the inner boundary.
        let steep = synthetic(&prob, &times(), |r| 3.0 * c * (r - p.radius));
        assert!(!check_gradient_box(&steep, None, 1e-10).passed());
        // |u_r| = r^{-3/2} outgrows the weight r^{31/28}.
        let singular = synthetic(&prob, &times(), |r| 2.0 / r.sqrt());
        assert!(!check_pointwise_gradient(&singular, 28).passed());
        // Above u* everywhere except the boundary nodes.
        let above = synthetic(&prob, &times(), |r| p.u_star(r).unwrap() + 0.01);
        assert!(!check_sandwich(&above, 1e-3).unwrap().passed());
        assert!(!check_monotone(&synthetic(&prob, &times(), |r| r), 1e-6).passed());
        let a = synthetic(&prob, &times(), |r| p.u_star(r).unwrap());
        let b = synthetic(&prob, &times(), |r| p.u_star(r).unwrap() - 0.05 * r);
        let window = CompactWindow::standard(p.radius, 1.0);
        assert!(!check_uniqueness_surrogate(&a, &b, &window, 1e-3).passed());
        assert!(check_uniqueness_surrogate(&a, &a, &window, 0.0).passed());
        assert!(check_weighted_bernstein(&a, 3, 0.03, 0.05).is_err());
        assert!(check_weighted_bernstein(&a, 2, 0.03, 0.05).is_err());
    }

    #[test]
    fn growing_bernstein_series_fails() {
        let prob = problem(0.2);
        let p = prob.params;
        let ts = times();
        let nodes = prob.grid.nodes();
        // Gradient scaling like e^{3t}: W grows like e^{12t}, far from affine.
        let values = Array2::from_shape_fn((ts.len(), nodes.len()), |(k, i)| {
            (3.0 * ts[k]).exp() * p.u_star(nodes[i]).unwrap()
        });
        let f = SpacetimeField::from_values(prob.clone(), ts, values).unwrap();
        let check = check_weighted_bernstein(&f, 4, 0.03, 0.05).unwrap();
        assert!(!check.passed(), "{check:?}");
    }

    #[test]
    fn refinement_and_cauchy_logic() {
        assert!(check_refinement("x", 3e-3, 1e-3, 3.0, 1e-12).passed());
        assert!(!check_refinement("x", 3e-3, 2e-3, 3.0, 1e-12).passed());
        assert!(check_refinement("x", 0.0, 0.0, 3.0, 1e-12).passed());
        assert!(!check_refinement("x", 0.0, 1e-6, 3.0, 1e-12).passed());
        assert!(check_cauchy(&[3.0, 2.0, 1.0]).passed());
        assert!(!check_cauchy(&[3.0, 2.0, 2.0]).passed());
        assert!(!check_cauchy(&[1.0]).passed());
    }

    #[test]
    fn default_tolerances_scale_with_resolution() {
        let t = Tolerances::default();
        assert!((t.sandwich_for(0.01, 1e-3) - 5.5e-3).abs() < 1e-15);
        assert!((t.gradient_sign_for(0.01) - 1.001e-3).abs() < 1e-15);
        let fixed = Tolerances {
            sandwich: Some(1.0),
            ..t
        };
        assert_eq!(fixed.sandwich_for(0.5, 0.5), 1.0);
    }
}

//! Closed-form objects: the stationary profile `u*(r) = −α r^{1/3}`, the
//! decaying Bessel mode `v(r,t) = C e^{−λ²t} r^{n−3/2} J_ν(λr)` and the
//! subsolution `u* − v`, with residual evaluators for each.
//!
//! All quantities are radial. Both `u*` and `v` are continued by `0` at the
//! origin (`n − 3/2 + ν > 0` for every `n >= 2`).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::specfn::{self, BesselOrder, BesselZeros};

/// `sqrt((3/8)(3n − 5)(2n − 3)³)`, the dimension-only part of the radius
/// gate.
pub fn dimension_radius_bound(n: i64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Dimension(n));
    }
    let n = n as f64;
    Ok((0.375 * (3.0 * n - 5.0) * (2.0 * n - 3.0).powi(3)).sqrt())
}

/// Largest admissible radius `min{x1/λ, sqrt((3/8)(3n−5)(2n−3)³)}` (the
/// admissible set is the open interval below it).
pub fn max_admissible_radius(n: i64, lambda: f64) -> Result<f64> {
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(Error::domain("lambda", lambda));
    }
    let zeros = specfn::first_zeros(BesselOrder::for_dimension(n)?)?;
    Ok((zeros.x1 / lambda).min(dimension_radius_bound(n)?))
}

/// Problem constants. `alpha`, `nu` and `zeros` are derived from `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub n: i64,
    pub radius: f64,
    pub lambda: f64,
    pub amplitude: f64,
    pub alpha: f64,
    pub nu: f64,
    pub x0: f64,
    pub x1: f64,
}

impl ModelParams {
    /// Builds parameters without applying the radius gate; see
    /// [`ModelParams::ensure_admissible`].
    pub fn new(n: i64, radius: f64, lambda: f64, amplitude: f64) -> Result<Self> {
        let order = BesselOrder::for_dimension(n)?;
        if !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::domain("radius", radius));
        }
        if !(lambda > 0.0) || !lambda.is_finite() {
            return Err(Error::domain("lambda", lambda));
        }
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::domain("amplitude C", amplitude));
        }
        let BesselZeros { x0, x1 } = specfn::first_zeros(order)?;
        Ok(Self {
            n,
            radius,
            lambda,
            amplitude,
            alpha: specfn::alpha_of(n)?,
            nu: order.value(),
            x0,
            x1,
        })
    }

    /// `λ = 0.9 · x1 / R`.
    pub fn with_default_lambda(n: i64, radius: f64, amplitude: f64) -> Result<Self> {
        let x1 = specfn::first_zeros(BesselOrder::for_dimension(n)?)?.x1;
        Self::new(n, radius, 0.9 * x1 / radius, amplitude)
    }

    /// `R = 0.9 · max_admissible_radius(n, λ)`.
    pub fn with_default_radius(n: i64, lambda: f64, amplitude: f64) -> Result<Self> {
        let radius = 0.9 * max_admissible_radius(n, lambda)?;
        Self::new(n, radius, lambda, amplitude)
    }

    pub fn with_amplitude(&self, amplitude: f64) -> Result<Self> {
        if !(amplitude >= 0.0) || !amplitude.is_finite() {
            return Err(Error::domain("amplitude C", amplitude));
        }
        Ok(Self { amplitude, ..*self })
    }

    pub fn order(&self) -> BesselOrder {
        BesselOrder::new(self.nu).expect("nu is positive for n >= 2")
    }

    pub fn radius_bound(&self) -> f64 {
        (self.x1 / self.lambda).min(dimension_radius_bound(self.n).expect("n >= 2"))
    }

    pub fn is_admissible(&self) -> bool {
        self.radius < self.radius_bound()
    }

    pub fn ensure_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::Inadmissible {
                radius: self.radius,
                bound: self.radius_bound(),
            })
        }
    }

    /// The weak formulation across the origin needs `n >= 3`.
    pub fn weak_form_applies(&self) -> bool {
        self.n >= 3
    }

    /// Exponent `n − 3/2` of the mode prefactor.
    pub fn mode_exponent(&self) -> f64 {
        self.n as f64 - 1.5
    }

    /// Default horizon `5/λ²`.
    pub fn default_horizon(&self) -> f64 {
        5.0 / (self.lambda * self.lambda)
    }

    pub fn u_star(&self, r: f64) -> Result<f64> {
        check_radius(r)?;
        Ok(-self.alpha * r.cbrt())
    }

    pub fn u_star_r(&self, r: f64) -> Result<f64> {
        check_positive_radius(r)?;
        Ok(self.u_star_r_unchecked(r))
    }

    pub fn u_star_rr(&self, r: f64) -> Result<f64> {
        check_positive_radius(r)?;
        Ok(2.0 * self.alpha / 9.0 * r.powf(-5.0 / 3.0))
    }

    pub(crate) fn u_star_r_unchecked(&self, r: f64) -> f64 {
        -self.alpha / 3.0 * r.powf(-2.0 / 3.0)
    }

    /// `ψ(r) = r^{n−3/2} J_ν(λr)` with its first two derivatives; `J''`
    /// comes from Bessel's equation.
    pub fn mode_shape(&self, r: f64) -> Result<ModeShape> {
        check_positive_radius(r)?;
        let order = self.order();
        let x = self.lambda * r;
        let j = specfn::bessel_j(order, x)?;
        let jp = specfn::bessel_j_prime(order, x)?;
        let jpp = -jp / x - (1.0 - self.nu * self.nu / (x * x)) * j;
        Ok(self.assemble_shape(r, j, jp, jpp))
    }

    fn assemble_shape(&self, r: f64, j: f64, jp: f64, jpp: f64) -> ModeShape {
        let d = self.mode_exponent();
        let l = self.lambda;
        let rd = r.powf(d);
        ModeShape {
            psi: rd * j,
            dpsi: d * rd / r * j + l * rd * jp,
            d2psi: d * (d - 1.0) * rd / (r * r) * j + 2.0 * d * l * rd / r * jp + l * l * rd * jpp,
        }
    }

    fn decay(&self, t: f64) -> f64 {
        (-self.lambda * self.lambda * t).exp()
    }

    /// `v(r, t)`; `v(0, t) = 0`.
    pub fn v(&self, r: f64, t: f64) -> Result<f64> {
        check_radius(r)?;
        check_time(t)?;
        if r == 0.0 {
            return Ok(0.0);
        }
        let j = specfn::bessel_j(self.order(), self.lambda * r)?;
        Ok(self.amplitude * self.decay(t) * (r.powf(self.mode_exponent()) * j))
    }

    pub fn v_r(&self, r: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.amplitude * self.decay(t) * self.mode_shape(r)?.dpsi)
    }

    pub fn v_rr(&self, r: f64, t: f64) -> Result<f64> {
        check_time(t)?;
        Ok(self.amplitude * self.decay(t) * self.mode_shape(r)?.d2psi)
    }

    pub fn v_t(&self, r: f64, t: f64) -> Result<f64> {
        Ok(-self.lambda * self.lambda * self.v(r, t)?)
    }

    /// `u*(r) − v(r, t)`.
    pub fn subsolution(&self, r: f64, t: f64) -> Result<f64> {
        Ok(self.u_star(r)? - self.v(r, t)?)
    }

    /// Radial Laplacian `w'' + (n−1)/r w'`.
    pub(crate) fn laplacian(&self, r: f64, first: f64, second: f64) -> f64 {
        second + (self.n as f64 - 1.0) / r * first
    }
}

/// `ψ`, `ψ'`, `ψ''` at one radius.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeShape {
    pub psi: f64,
    pub dpsi: f64,
    pub d2psi: f64,
}

fn check_radius(r: f64) -> Result<()> {
    if r >= 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("radius r", r))
    }
}

fn check_positive_radius(r: f64) -> Result<()> {
    if r > 0.0 && r.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("radius r", r))
    }
}

fn check_time(t: f64) -> Result<()> {
    if t >= 0.0 && t.is_finite() {
        Ok(())
    } else {
        Err(Error::domain("time t", t))
    }
}

/// `Δu* + u*(u*_r)³` evaluated term by term from the closed forms.
pub fn residual_stationary(params: &ModelParams, r: f64) -> Result<f64> {
    let u = params.u_star(r)?;
    let ur = params.u_star_r(r)?;
    let urr = params.u_star_rr(r)?;
    Ok(params.laplacian(r, ur, urr) + u * ur.powi(3))
}

/// Scale `(α/27) r^{−5/3} |15 − 9n|` against which the stationary residual
/// is measured.
pub fn stationary_scale(params: &ModelParams, r: f64) -> f64 {
    params.alpha / 27.0 * r.powf(-5.0 / 3.0) * (15.0 - 9.0 * params.n as f64).abs()
}

/// `v_t − Δv − 3u*(u*_r)² v_r − (u*_r)³ v`, with `J''` from the order
/// recurrence so that Bessel's equation is not assumed.
pub fn residual_linearized(params: &ModelParams, r: f64, t: f64) -> Result<f64> {
    check_positive_radius(r)?;
    check_time(t)?;
    let order = params.order();
    let x = params.lambda * r;
    let j = specfn::bessel_j(order, x)?;
    let jp = specfn::bessel_j_prime(order, x)?;
    let jpp = specfn::bessel_j_second(order, x)?;
    let shape = params.assemble_shape(r, j, jp, jpp);
    let scale = params.amplitude * params.decay(t);
    let (v, vr, vrr) = (scale * shape.psi, scale * shape.dpsi, scale * shape.d2psi);
    let vt = -params.lambda * params.lambda * v;
    let us = params.u_star(r)?;
    let usr = params.u_star_r(r)?;
    Ok(vt - params.laplacian(r, vr, vrr) - 3.0 * us * usr * usr * vr - usr.powi(3) * v)
}

/// `u_t − Δu − u u_r³` for `u = u* − v`. Nonpositive (up to rounding) on
/// `(0, R)` for admissible parameters.
pub fn subsolution_defect(params: &ModelParams, r: f64, t: f64) -> Result<f64> {
    params.ensure_admissible()?;
    check_positive_radius(r)?;
    check_time(t)?;
    let shape = params.mode_shape(r)?;
    let scale = params.amplitude * params.decay(t);
    let (v, vr, vrr) = (scale * shape.psi, scale * shape.dpsi, scale * shape.d2psi);
    let vt = -params.lambda * params.lambda * v;
    let u = params.u_star(r)? - v;
    let ur = params.u_star_r(r)? - vr;
    let urr = params.u_star_rr(r)? - vrr;
    Ok(-vt - params.laplacian(r, ur, urr) - u * ur.powi(3))
}

/// Log-spaced radii in `[1e−4 R, 0.999 R]` crossed with `t ∈ {0, 0.1, 1, 5}`.
pub fn probe_lattice(params: &ModelParams, radii: usize) -> Vec<(f64, f64)> {
    let lo = (1e-4 * params.radius).ln();
    let hi = (0.999 * params.radius).ln();
    let count = radii.max(2);
    let mut out = Vec::with_capacity(count * 4);
    for i in 0..count {
        let r = (lo + (hi - lo) * i as f64 / (count - 1) as f64).exp();
        for t in [0.0, 0.1, 1.0, 5.0] {
            out.push((r, t));
        }
    }
    out
}

/// One row of an analytic residual report.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualRow {
    pub r: f64,
    pub t: f64,
    pub stationary: f64,
    pub linearized: f64,
    pub subsolution: f64,
}

/// Maxima of the three residuals over a probe lattice.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResidualSummary {
    /// `max |Δu* + u*(u*_r)³| / ((α/27) r^{−5/3} |15 − 9n|)`
    pub stationary_relative: f64,
    /// `max |residual_linearized| / max(1, |v|)`
    pub linearized_scaled: f64,
    /// `max subsolution_defect` (positive values violate the inequality)
    pub max_defect: f64,
}

pub fn residual_rows(params: &ModelParams, lattice: &[(f64, f64)]) -> Result<Vec<ResidualRow>> {
    params.ensure_admissible()?;
    lattice
        .iter()
        .map(|&(r, t)| {
            Ok(ResidualRow {
                r,
                t,
                stationary: residual_stationary(params, r)?,
                linearized: residual_linearized(params, r, t)?,
                subsolution: subsolution_defect(params, r, t)?,
            })
        })
        .collect()
}

pub fn summarize_residuals(params: &ModelParams, lattice: &[(f64, f64)]) -> Result<ResidualSummary> {
    let mut summary = ResidualSummary {
        stationary_relative: 0.0,
        linearized_scaled: 0.0,
        max_defect: f64::NEG_INFINITY,
    };
    for row in residual_rows(params, lattice)? {
        let v = params.v(row.r, row.t)?;
        summary.stationary_relative = summary
            .stationary_relative
            .max(row.stationary.abs() / stationary_scale(params, row.r));
        summary.linearized_scaled = summary.linearized_scaled.max(row.linearized.abs() / v.abs().max(1.0));
        summary.max_defect = summary.max_defect.max(row.subsolution);
    }
    Ok(summary)
}

/// Strictly increasing radii with nodal values and derivatives.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialProfile {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivative: Vec<f64>,
}

impl RadialProfile {
    pub fn new(grid: Vec<f64>, values: Vec<f64>, derivative: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || values.len() != grid.len() || derivative.len() != grid.len() {
            return Err(Error::Grid(format!(
                "profile needs matching lengths >= 2 (grid {}, values {}, derivative {})",
                grid.len(),
                values.len(),
                derivative.len()
            )));
        }
        if grid[0] <= 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::Grid("profile radii must be positive and strictly increasing".into()));
        }
        if values.iter().chain(&derivative).any(|v| !v.is_finite()) {
            return Err(Error::Grid("profile contains non-finite values".into()));
        }
        Ok(Self {
            grid,
            values,
            derivative,
        })
    }

    /// Samples `f(r) -> (value, derivative)` on `grid`.
    pub fn sample<F>(grid: Vec<f64>, f: F) -> Result<Self>
    where
        F: Fn(f64) -> Result<(f64, f64)>,
    {
        let mut values = Vec::with_capacity(grid.len());
        let mut derivative = Vec::with_capacity(grid.len());
        for &r in &grid {
            let (v, d) = f(r)?;
            values.push(v);
            derivative.push(d);
        }
        Self::new(grid, values, derivative)
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    pub fn first(&self) -> (f64, f64) {
        (self.grid[0], self.values[0])
    }

    pub fn last(&self) -> (f64, f64) {
        let i = self.grid.len() - 1;
        (self.grid[i], self.values[i])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn n2_standard() -> ModelParams {
        ModelParams::with_default_lambda(2, 0.6, 1.0).unwrap()
    }

    #[test]
    fn u_star_values() {
        let p2 = ModelParams::new(2, 0.5, 1.0, 1.0).unwrap();
        assert!((p2.u_star(1.0).unwrap() + 1.442_249_570_307_408_4).abs() < 1e-14);
        assert_eq!(p2.u_star(0.0).unwrap(), 0.0);
        assert!(p2.u_star(1e-30).unwrap().abs() < 1e-9);
        assert!(p2.u_star(-1.0).is_err());
        let p3 = ModelParams::new(3, 0.5, 1.0, 1.0).unwrap();
        assert!((p3.u_star(0.5).unwrap() + 1.817_120_592_832_139_7).abs() < 1e-14);
    }

    #[test]
    fn stationary_residual_vanishes() {
        for n in 2..=6 {
            let p = ModelParams::with_default_radius(n, 1.0, 1.0).unwrap();
            for r in [1e-6, 1e-3, 0.3, 1.0, 5.0] {
                let res = residual_stationary(&p, r).unwrap();
                assert!(res.abs() <= 1e-12 * stationary_scale(&p, r), "n={n} r={r} res={res}");
            }
        }
    }

    #[test]
    fn mode_value_matches_reference() {
        // 40-digit reference: J_{ν(2)}(1).
        let p = ModelParams::new(2, 0.5, 1.0, 1.0).unwrap();
        assert!((p.v(1.0, 0.0).unwrap() - 0.628_013_517_760_311_3).abs() < 1e-10);
        assert_eq!(p.v(0.0, 3.0).unwrap(), 0.0);
        let at_zero = p.x0 / p.lambda;
        assert!(p.v(at_zero, 0.7).unwrap().abs() < 1e-10);
        assert!(p.v(0.3, 60.0).unwrap().abs() < 1e-20);
        assert!(p.v(0.3, -1.0).is_err());
    }

    #[test]
    fn linearized_residual_vanishes() {
        let p = ModelParams::new(2, 0.5, 1.0, 1.0).unwrap();
        assert!(residual_linearized(&p, 0.3, 0.1).unwrap().abs() < 1e-8);
        let p = ModelParams::new(3, 1.0, 0.5, 2.0).unwrap();
        assert!(residual_linearized(&p, 1.0, 1.0).unwrap().abs() < 1e-8);
        let p = p.with_amplitude(0.0).unwrap();
        assert_eq!(residual_linearized(&p, 1.0, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn radius_gate() {
        assert!((dimension_radius_bound(2).unwrap() - 0.612_372_435_695_794_5).abs() < 1e-15);
        assert!((dimension_radius_bound(3).unwrap() - 6.363_961_030_678_928).abs() < 1e-13);
        let tiny = max_admissible_radius(2, 1e6).unwrap();
        assert!(tiny < 1e-5);
        let p = n2_standard();
        assert!(p.is_admissible());
        let inflated = ModelParams::new(2, 0.62, p.lambda, 1.0).unwrap();
        assert!(matches!(
            subsolution_defect(&inflated, 0.1, 0.0),
            Err(Error::Inadmissible { .. })
        ));
    }

    #[test]
    fn subsolution_defect_nonpositive() {
        let p = n2_standard();
        for (r, t) in probe_lattice(&p, 60) {
            let d = subsolution_defect(&p, r, t).unwrap();
            assert!(d <= 1e-8, "r={r} t={t} d={d}");
        }
        let p0 = p.with_amplitude(0.0).unwrap();
        for (r, t) in probe_lattice(&p0, 20) {
            let d = subsolution_defect(&p0, r, t).unwrap();
            assert!(d.abs() <= 1e-12 * stationary_scale(&p0, r));
        }
    }

    #[test]
    fn mode_monotone_and_positive() {
        for n in 2..=6 {
            let p = ModelParams::with_default_radius(n, 1.3, 0.8).unwrap();
            for i in 1..2000 {
                let r = p.radius * i as f64 / 2000.0;
                let s = p.mode_shape(r).unwrap();
                assert!(s.dpsi >= 0.0 && s.psi > 0.0, "n={n} r={r}");
                for t in [0.0, 1.0, 4.0] {
                    assert!(p.v(r, t).unwrap() > 0.0);
                }
            }
        }
    }

    #[test]
    fn closed_form_derivatives_second_order() {
        let p = n2_standard();
        let (r, t) = (0.27, 0.4);
        let errs: Vec<(f64, f64, f64)> = [1e-3, 5e-4]
            .iter()
            .map(|&h| {
                let us = (p.u_star(r + h).unwrap() - p.u_star(r - h).unwrap()) / (2.0 * h);
                let vr = (p.v(r + h, t).unwrap() - p.v(r - h, t).unwrap()) / (2.0 * h);
                let vt = (p.v(r, t + h).unwrap() - p.v(r, t - h).unwrap()) / (2.0 * h);
                (
                    (us - p.u_star_r(r).unwrap()).abs(),
                    (vr - p.v_r(r, t).unwrap()).abs(),
                    (vt - p.v_t(r, t).unwrap()).abs(),
                )
            })
            .collect();
        let order = |a: f64, b: f64| (a / b).log2();
        assert!(order(errs[0].0, errs[1].0) >= 1.9);
        assert!(order(errs[0].1, errs[1].1) >= 1.9);
        assert!(order(errs[0].2, errs[1].2) >= 1.9);
    }

    #[test]
    fn profile_validation() {
        assert!(RadialProfile::new(vec![0.1, 0.1], vec![0.0; 2], vec![0.0; 2]).is_err());
        assert!(RadialProfile::new(vec![0.1, 0.2], vec![0.0, f64::NAN], vec![0.0; 2]).is_err());
        assert!(RadialProfile::new(vec![0.1, 0.2], vec![0.0; 2], vec![0.0; 2]).is_ok());
    }
}

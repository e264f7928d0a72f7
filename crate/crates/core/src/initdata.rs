//! Initial data below the stationary profile, their validator, and the
//! ingredients of one annulus problem: the bridged datum `u0ε`, the gradient
//! ceiling `c*_ε` and the cut-off cubic `f_ε`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::analytic::{ModelParams, RadialProfile};
use crate::error::{Error, Result};
use crate::report::{Check, Status, VerificationReport};
use crate::solver::RadialGrid;

/// Value, derivative and deficit `u*(r) − u0(r)` of a datum at one radius.
/// The deficit is carried separately so that families can evaluate it
/// without cancellation near the origin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DatumPoint {
    pub value: f64,
    pub derivative: f64,
    pub deficit: f64,
}

pub type Evaluator = Arc<dyn Fn(f64) -> Result<DatumPoint> + Send + Sync>;

/// Built-in initial-data families. In both, the blend factor is
/// `1 − (r/R)^k` for `k > 0`; `k = 0` switches the blend off.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// `u0 = u* − A ψ(r)(1 − (r/R)^k)` with `ψ(r) = r^{n−3/2} J_ν(λr)`.
    ModeDeficit { k: f64, amplitude: f64 },
    /// `u0 = u* − a r^{n−3/2+ν}(1 − (r/R)^k)`.
    PolynomialBlend { a: f64, k: f64 },
    /// A user-supplied profile.
    Custom { label: String },
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Family::ModeDeficit { k, amplitude } => write!(f, "mode_deficit(k={k}, amplitude={amplitude})"),
            Family::PolynomialBlend { a, k } => write!(f, "polynomial_blend(a={a}, k={k})"),
            Family::Custom { label } => write!(f, "custom({label})"),
        }
    }
}

fn blend(k: f64, r: f64, radius: f64) -> (f64, f64) {
    if k == 0.0 {
        (1.0, 0.0)
    } else {
        let q = (r / radius).powf(k);
        (1.0 - q, -k * q / r)
    }
}

/// Log-spaced radii from `1e−5 R` to `R`, 100 per decade.
pub fn datum_grid(radius: f64) -> Vec<f64> {
    let decades = 5usize;
    let count = decades * 100;
    let mut grid: Vec<f64> = (0..=count)
        .map(|i| radius * 10f64.powf(-(decades as f64) * (1.0 - i as f64 / count as f64)))
        .collect();
    grid[count] = radius;
    grid
}

#[derive(Clone)]
pub struct InitialDatum {
    pub family: Family,
    /// Samples on [`datum_grid`].
    pub profile: RadialProfile,
    /// Deficit `u* − u0` on the same nodes.
    pub deficit: Vec<f64>,
    /// `max −u0'(r) r^{2/3}` over the nodes.
    pub derivative_bound_c: f64,
    /// `max r^{3/2−n−ν}(u* − u0)` over the finest decade.
    pub closeness_bound: f64,
    eval: Evaluator,
}

impl fmt::Debug for InitialDatum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("InitialDatum")
            .field("family", &self.family)
            .field("nodes", &self.profile.len())
            .field("derivative_bound_c", &self.derivative_bound_c)
            .field("closeness_bound", &self.closeness_bound)
            .finish()
    }
}

impl InitialDatum {
    /// Samples `eval` on the datum grid. No validation happens here.
    pub fn from_evaluator(params: &ModelParams, family: Family, eval: Evaluator) -> Result<Self> {
        let grid = datum_grid(params.radius);
        let mut values = Vec::with_capacity(grid.len());
        let mut derivative = Vec::with_capacity(grid.len());
        let mut deficit = Vec::with_capacity(grid.len());
        for &r in &grid {
            let p = eval(r)?;
            values.push(p.value);
            derivative.push(p.derivative);
            deficit.push(p.deficit);
        }
        let profile = RadialProfile::new(grid, values, derivative)?;
        let derivative_bound_c = profile
            .grid
            .iter()
            .zip(&profile.derivative)
            .map(|(&r, &d)| -d * r.powf(2.0 / 3.0))
            .fold(0.0, f64::max);
        let closeness = closeness_weights(params, &profile.grid, &deficit);
        let closeness_bound = decade_max(&profile.grid, &closeness, 0);
        Ok(Self {
            family,
            profile,
            deficit,
            derivative_bound_c,
            closeness_bound,
            eval,
        })
    }

    /// Wraps a plain `r ↦ (u0, u0')` closure; the deficit is formed by
    /// subtraction.
    pub fn from_fn<F>(params: &ModelParams, label: &str, f: F) -> Result<Self>
    where
        F: Fn(f64) -> (f64, f64) + Send + Sync + 'static,
    {
        let p = *params;
        let eval: Evaluator = Arc::new(move |r| {
            let (value, derivative) = f(r);
            Ok(DatumPoint {
                value,
                derivative,
                deficit: p.u_star(r)? - value,
            })
        });
        Self::from_evaluator(params, Family::Custom { label: label.into() }, eval)
    }

    pub fn at(&self, r: f64) -> Result<DatumPoint> {
        (self.eval)(r)
    }

    pub fn evaluator(&self) -> Evaluator {
        self.eval.clone()
    }
}

fn family_evaluator(params: &ModelParams, family: &Family) -> Result<Evaluator> {
    let p = *params;
    let radius = p.radius;
    match *family {
        Family::ModeDeficit { k, amplitude } => {
            check_family_param("k", k)?;
            check_family_param("amplitude", amplitude)?;
            Ok(Arc::new(move |r| {
                let shape = p.mode_shape(r)?;
                let (b, db) = blend(k, r, radius);
                let deficit = amplitude * shape.psi * b;
                let d_deficit = amplitude * (shape.dpsi * b + shape.psi * db);
                Ok(DatumPoint {
                    value: p.u_star(r)? - deficit,
                    derivative: p.u_star_r(r)? - d_deficit,
                    deficit,
                })
            }))
        }
        Family::PolynomialBlend { a, k } => {
            check_family_param("k", k)?;
            check_family_param("a", a)?;
            let m = p.mode_exponent() + p.nu;
            Ok(Arc::new(move |r| {
                let (b, db) = blend(k, r, radius);
                let rm = r.powf(m);
                let deficit = a * rm * b;
                let d_deficit = a * (m * rm / r * b + rm * db);
                Ok(DatumPoint {
                    value: p.u_star(r)? - deficit,
                    derivative: p.u_star_r(r)? - d_deficit,
                    deficit,
                })
            }))
        }
        Family::Custom { .. } => Err(Error::config(
            "initdata.family",
            "custom data must be built with InitialDatum::from_fn",
        )),
    }
}

fn check_family_param(what: &'static str, value: f64) -> Result<()> {
    if value >= 0.0 && value.is_finite() {
        Ok(())
    } else {
        Err(Error::domain(what, value))
    }
}

/// Builds a family member without validating it.
pub fn build_initial_datum(params: &ModelParams, family: Family) -> Result<InitialDatum> {
    let eval = family_evaluator(params, &family)?;
    InitialDatum::from_evaluator(params, family, eval)
}

/// Builds a family member and rejects it with the first violated condition.
pub fn make_initial_datum(params: &ModelParams, family: Family) -> Result<InitialDatum> {
    params.ensure_admissible()?;
    let datum = build_initial_datum(params, family)?;
    let report = validate_initial_datum(params, &datum);
    if let Some(bad) = report.failures().next() {
        let condition = bad.name.chars().last().unwrap_or('?');
        return Err(Error::InitialCondition {
            condition,
            detail: format!("{}; {}", bad.basis, bad.note.clone().unwrap_or_default()),
        });
    }
    Ok(datum)
}

fn closeness_weights(params: &ModelParams, grid: &[f64], deficit: &[f64]) -> Vec<f64> {
    let e = 1.5 - params.n as f64 - params.nu;
    grid.iter().zip(deficit).map(|(&r, &d)| r.powf(e) * d).collect()
}

/// Max of `values` over decade `which` of `grid` (0 = `[r_0, 10 r_0]`).
fn decade_max(grid: &[f64], values: &[f64], which: i32) -> f64 {
    let lo = grid[0] * 10f64.powi(which);
    let hi = lo * 10.0;
    grid.iter()
        .zip(values)
        .filter(|(&r, _)| r >= lo * (1.0 - 1e-12) && r <= hi * (1.0 + 1e-12))
        .map(|(_, &v)| v)
        .fold(f64::NEG_INFINITY, f64::max)
}

/// Growth of a nonnegative quantity from the second-finest to the finest
/// decade; `1.0` when both vanish.
fn decade_growth(grid: &[f64], values: &[f64]) -> f64 {
    let finest = decade_max(grid, values, 0);
    let second = decade_max(grid, values, 1);
    if finest <= 0.0 && second <= 0.0 {
        1.0
    } else if second <= 0.0 {
        f64::INFINITY
    } else {
        finest / second
    }
}

const DECADE_GROWTH_LIMIT: f64 = 1.1;

/// Ratio of maximal second differences at spacing `h/2` and `h`, per
/// geometric bin of `[1e−3 R, R]`. Bounded second differences give ratios
/// near 1; a derivative jump doubles them.
fn second_difference_growth(datum: &InitialDatum, radius: f64) -> Result<(f64, f64)> {
    const BINS: usize = 12;
    const STEPS: usize = 128;
    let lo = 1e-3 * radius;
    let mut worst = (0.0f64, lo);
    for b in 0..BINS {
        let a = lo * (radius / lo).powf(b as f64 / BINS as f64);
        let z = lo * (radius / lo).powf((b + 1) as f64 / BINS as f64);
        let mut maxima = [0.0f64; 2];
        let mut scale = 0.0f64;
        for (level, slot) in maxima.iter_mut().enumerate() {
            let steps = STEPS << level;
            let h = (z - a) / steps as f64;
            let mut prev = datum.at(a - h)?.value;
            let mut cur = datum.at(a)?.value;
            for j in 1..steps {
                let next = datum.at(a + j as f64 * h)?.value;
                let d2 = (prev - 2.0 * cur + next) / (h * h);
                *slot = slot.max(d2.abs());
                scale = scale.max(cur.abs());
                prev = cur;
                cur = next;
            }
        }
        let h_fine = (z - a) / (STEPS << 1) as f64;
        let floor = 64.0 * f64::EPSILON * scale / (h_fine * h_fine);
        let ratio = maxima[1] / maxima[0].max(floor);
        if ratio > worst.0 {
            worst = (ratio, a);
        }
    }
    Ok(worst)
}

/// One check per condition (a)–(f).
pub fn validate_initial_datum(params: &ModelParams, datum: &InitialDatum) -> VerificationReport {
    let mut report = VerificationReport::new(format!("initial datum {}", datum.family));
    let grid = &datum.profile.grid;
    let radius = params.radius;

    let a = Check::new("initdata.a", "second differences stay bounded under refinement away from the origin")
        .tolerance(1.5);
    report.push(match second_difference_growth(datum, radius) {
        Ok((ratio, at)) => a
            .measure("refinement_ratio", ratio)
            .measure("bin_start", at)
            .passes(ratio <= 1.5)
            .note(format!("worst bin starts at r = {at:.4e}")),
        Err(e) => a.status(Status::Fail).note(e.to_string()),
    });

    report.push(
        Check::new("initdata.b", "radially symmetric by construction")
            .status(Status::Exact)
            .note("profiles are functions of r only"),
    );

    let mut worst_c = (0.0f64, grid[0]);
    for (&r, &d) in grid.iter().zip(&datum.deficit) {
        let scale = params.u_star(r).map(f64::abs).unwrap_or(1.0).max(1.0);
        let violation = (-d) / scale;
        if violation > worst_c.0 {
            worst_c = (violation, r);
        }
    }
    report.push(
        Check::new("initdata.c", "u0 lies below the stationary profile")
            .tolerance(1e-12)
            .measure("max_violation", worst_c.0)
            .passes(worst_c.0 <= 1e-12)
            .note(format!("worst node r = {:.4e}", worst_c.1)),
    );

    let weights = closeness_weights(params, grid, &datum.deficit);
    let growth = decade_growth(grid, &weights);
    let finite = weights.iter().all(|w| w.is_finite());
    report.push(
        Check::new(
            "initdata.d",
            "r^{3/2-n-nu}(u* - u0) stays bounded over the finest resolved decade",
        )
        .tolerance(DECADE_GROWTH_LIMIT)
        .measure("closeness_bound", datum.closeness_bound)
        .measure("decade_growth", growth)
        .passes(finite && growth <= DECADE_GROWTH_LIMIT)
        .note(format!("resolved down to r = {:.3e}", grid[0])),
    );

    let (_, last) = datum.profile.last();
    let target = params.u_star(radius).unwrap_or(f64::NAN);
    let mismatch = (last - target).abs() / target.abs();
    report.push(
        Check::new("initdata.e", "u0(R) equals u*(R)")
            .tolerance(1e-12)
            .measure("relative_mismatch", mismatch)
            .passes(mismatch <= 1e-12),
    );

    let mut worst_f = (f64::NEG_INFINITY, grid[0]);
    for (&r, &d) in grid.iter().zip(&datum.profile.derivative) {
        let scaled = d / params.u_star_r(r).map(f64::abs).unwrap_or(1.0);
        if scaled > worst_f.0 {
            worst_f = (scaled, r);
        }
    }
    let slope_growth = {
        let w: Vec<f64> = grid
            .iter()
            .zip(&datum.profile.derivative)
            .map(|(&r, &d)| (-d * r.powf(2.0 / 3.0)).max(0.0))
            .collect();
        decade_growth(grid, &w)
    };
    let ok_f = worst_f.0 <= 1e-12 && slope_growth <= DECADE_GROWTH_LIMIT;
    report.push(
        Check::new("initdata.f", "0 >= u0' >= -C r^{-2/3}")
            .tolerance(1e-12)
            .measure("max_scaled_slope", worst_f.0)
            .measure("derivative_bound_c", datum.derivative_bound_c)
            .measure("slope_decade_growth", slope_growth)
            .passes(ok_f)
            .note(format!("largest u0'/|u*'| = {:.4e} at r = {:.4e}", worst_f.0, worst_f.1)),
    );
    report
}

/// `1.05 · sup (u* − u0)/ψ` over the datum grid, so that `u0 ≥ u* − v(·,0)`
/// with this amplitude.
pub fn choose_amplitude_c(params: &ModelParams, datum: &InitialDatum) -> Result<f64> {
    let grid = &datum.profile.grid;
    let mut ratios = Vec::with_capacity(grid.len());
    for (&r, &d) in grid.iter().zip(&datum.deficit) {
        ratios.push(d.max(0.0) / params.mode_shape(r)?.psi);
    }
    let growth = decade_growth(grid, &ratios);
    if !(growth <= DECADE_GROWTH_LIMIT) {
        return Err(Error::UnboundedRatio { growth });
    }
    let sup = ratios.iter().copied().fold(0.0, f64::max);
    let c = 1.05 * sup;
    let p = params.with_amplitude(c)?;
    for (&r, &d) in grid.iter().zip(&datum.deficit) {
        let v = p.v(r, 0.0)?;
        debug_assert!(d <= v * (1.0 + 1e-12), "amplitude re-check failed at r = {r}");
    }
    Ok(c)
}

/// `s³` on `[−c*, c*]`, tapered to zero on `c* < |s| < support_radius` by a
/// quintic smoothstep (so the cut-off is `C²`), and zero beyond.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffCubic {
    pub c_star: f64,
    pub support_radius: f64,
}

fn smoothstep5(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * (10.0 + x * (-15.0 + 6.0 * x))
}

fn smoothstep5_prime(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        return 0.0;
    }
    30.0 * x * x * (1.0 - x) * (1.0 - x)
}

/// `∫₀^x smoothstep5`.
fn smoothstep5_integral(x: f64) -> f64 {
    let x = x.clamp(0.0, 1.0);
    x * x * x * x * (2.5 + x * (-3.0 + x))
}

impl CutoffCubic {
    /// Support radius `2c*`.
    pub fn new(c_star: f64) -> Result<Self> {
        Self::with_support(c_star, 2.0 * c_star)
    }

    pub fn with_support(c_star: f64, support_radius: f64) -> Result<Self> {
        if !(c_star > 1.0) || !c_star.is_finite() {
            return Err(Error::domain("c_star", c_star));
        }
        if !(support_radius > c_star) || !support_radius.is_finite() {
            return Err(Error::domain("support_radius", support_radius));
        }
        Ok(Self { c_star, support_radius })
    }

    pub fn apply(&self, s: f64) -> f64 {
        let a = s.abs();
        if a <= self.c_star {
            s * s * s
        } else if a >= self.support_radius {
            0.0
        } else {
            let x = (a - self.c_star) / (self.support_radius - self.c_star);
            s * s * s * (1.0 - smoothstep5(x))
        }
    }

    pub fn derivative(&self, s: f64) -> f64 {
        let a = s.abs();
        if a <= self.c_star {
            3.0 * s * s
        } else if a >= self.support_radius {
            0.0
        } else {
            let w = self.support_radius - self.c_star;
            let x = (a - self.c_star) / w;
            3.0 * s * s * (1.0 - smoothstep5(x)) - a * a * a * smoothstep5_prime(x) / w
        }
    }

    pub fn is_exact(&self, s: f64) -> bool {
        s.abs() <= self.c_star
    }
}

/// The four thresholds that define `c*_ε`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CStarConditions {
    pub eps: f64,
    /// `sup |u*_r| = (α/3) ε^{−2/3}`
    pub stationary_slope: f64,
    /// `sup |(u* − v(·,0))_r|`
    pub subsolution_slope: f64,
    /// `sup |u0ε'|`
    pub datum_slope: f64,
    /// `C ε^{n−3/2} J_ν(λε)`
    pub c_v: f64,
    pub inner_coefficient: f64,
    /// `u*(ε)`
    pub u_star_eps: f64,
}

impl CStarConditions {
    pub fn new(params: &ModelParams, eps: f64, u0eps: &RadialProfile) -> Result<Self> {
        if !(eps > 0.0 && eps < params.radius) {
            return Err(Error::domain("eps", eps));
        }
        let mut sub = 0.0f64;
        let dense = 2000;
        let probe = (0..=dense)
            .map(|i| eps * (params.radius / eps).powf(i as f64 / dense as f64))
            .chain(u0eps.grid.iter().copied());
        for r in probe {
            let r = r.clamp(eps, params.radius);
            sub = sub.max((params.u_star_r(r)? - params.v_r(r, 0.0)?).abs());
        }
        Ok(Self {
            eps,
            stationary_slope: params.alpha / 3.0 * eps.powf(-2.0 / 3.0),
            subsolution_slope: sub,
            datum_slope: u0eps.derivative.iter().fold(0.0f64, |m, d| m.max(d.abs())),
            c_v: params.v(eps, 0.0)?,
            inner_coefficient: (params.n as f64 - 1.0) / eps,
            u_star_eps: params.u_star(eps)?,
        })
    }

    pub fn holds(&self, c: f64) -> [bool; 4] {
        [
            c > self.stationary_slope,
            c > self.subsolution_slope,
            c > self.datum_slope,
            self.c_v + self.inner_coefficient * c + self.u_star_eps * c * c * c <= 0.0,
        ]
    }

    pub fn all_hold(&self, c: f64) -> bool {
        self.holds(c).iter().all(|&b| b)
    }
}

/// Smallest `c > 1` satisfying the four conditions (bisection on
/// `[1, 1e12]`), times `1.01`.
pub fn c_star_eps(params: &ModelParams, eps: f64, u0eps: &RadialProfile) -> Result<f64> {
    let cond = CStarConditions::new(params, eps, u0eps)?;
    let (mut lo, mut hi) = (1.0f64, 1e12f64);
    if cond.all_hold(lo) {
        return Ok(1.01 * lo);
    }
    debug_assert!(cond.all_hold(hi));
    while hi - lo > 1e-14 * hi {
        let mid = 0.5 * (lo + hi);
        if cond.all_hold(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(1.01 * hi)
}

/// Monotone bridge profile `S` on `[0, 1]` with `S(0) = 0`, `S(1) = 1`,
/// `0 ≤ S' ≤ 1 + κ` and `S'(0) = S''(0) = 0`.
#[derive(Debug, Clone, Copy)]
struct BridgeShape {
    kappa: f64,
    rho: f64,
}

impl BridgeShape {
    fn new(kappa: f64) -> Self {
        Self {
            kappa,
            rho: 2.0 * kappa / (1.0 + kappa),
        }
    }

    fn value(&self, phi: f64) -> f64 {
        let phi = phi.clamp(0.0, 1.0);
        let k1 = 1.0 + self.kappa;
        if phi <= self.rho {
            k1 * self.rho * smoothstep5_integral(phi / self.rho)
        } else {
            k1 * (phi - 0.5 * self.rho)
        }
    }

    fn slope(&self, phi: f64) -> f64 {
        if phi <= 0.0 {
            0.0
        } else {
            (1.0 + self.kappa) * smoothstep5((phi / self.rho).min(1.0))
        }
    }
}

/// `u0ε` on `nodes` (which start at `ε`). Equal to `u0` where
/// `u0 < u*(ε) − v(ε,0) − ε`; inside, `u0ε = u0 − D·S(φ)` with `φ` the
/// normalized drop of `u0` so that `u0' ≤ u0ε' ≤ 0`.
pub fn make_u0eps(params: &ModelParams, eps: f64, datum: &InitialDatum, nodes: &[f64]) -> Result<RadialProfile> {
    let bridge_err = |detail: String| Error::Bridge { eps, detail };
    if nodes.is_empty() || nodes[0] != eps {
        return Err(bridge_err("grid must start at eps".into()));
    }
    let inner_value = params.subsolution(eps, 0.0)?;
    let at_eps = datum.at(eps)?;
    let gap = at_eps.value - inner_value;
    if gap < -1e-14 * inner_value.abs() {
        return Err(bridge_err(format!(
            "u0(eps) lies {:.3e} below u*(eps) - v(eps,0); amplitude C too small",
            -gap
        )));
    }
    let gap = gap.max(0.0);
    let threshold = inner_value - eps;
    let radius = params.radius;
    let r_match = if datum.at(radius)?.value >= threshold {
        radius
    } else {
        let (mut lo, mut hi) = (eps, radius);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if datum.at(mid)?.value >= threshold {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo <= 1e-15 * hi {
                break;
            }
        }
        hi
    };
    let drop = at_eps.value - datum.at(r_match)?.value;
    let shape = if gap > 0.0 {
        let kappa = (0.5 * (drop / gap - 1.0)).min(1.0);
        if !(kappa > 0.0) {
            return Err(bridge_err(format!("drop {drop:.3e} of u0 on the bridge does not exceed the gap {gap:.3e}")));
        }
        Some(BridgeShape::new(kappa))
    } else {
        None
    };

    let mut values = Vec::with_capacity(nodes.len());
    let mut derivative = Vec::with_capacity(nodes.len());
    for &r in nodes {
        let p = datum.at(r)?;
        match shape {
            Some(s) if r < r_match => {
                let phi = (p.value - (at_eps.value - drop)) / drop;
                values.push(p.value - gap * s.value(phi));
                derivative.push(p.derivative * (1.0 - gap * s.slope(phi) / drop));
            }
            _ => {
                values.push(p.value);
                derivative.push(p.derivative);
            }
        }
    }
    values[0] = inner_value;
    let profile = RadialProfile::new(nodes.to_vec(), values, derivative)?;
    check_u0eps(params, eps, datum, &profile, threshold).map_err(bridge_err)?;
    Ok(profile)
}

fn check_u0eps(
    params: &ModelParams,
    eps: f64,
    datum: &InitialDatum,
    u0eps: &RadialProfile,
    threshold: f64,
) -> std::result::Result<(), String> {
    let inner = params.subsolution(eps, 0.0).map_err(|e| e.to_string())?;
    if u0eps.values[0] != inner {
        return Err("first node differs from u*(eps) - v(eps,0)".into());
    }
    for i in 0..u0eps.len() {
        let r = u0eps.grid[i];
        let (u, du) = (u0eps.values[i], u0eps.derivative[i]);
        let p = datum.at(r).map_err(|e| e.to_string())?;
        let us = params.u_star(r).map_err(|e| e.to_string())?;
        let sub = params.subsolution(r, 0.0).map_err(|e| e.to_string())?;
        let tol = 1e-12 * us.abs().max(1.0);
        let dtol = 1e-12 * p.derivative.abs().max(1.0);
        if du > dtol || du < p.derivative - dtol {
            return Err(format!("derivative squeeze fails at r = {r:.6e} ({du:.6e} vs u0' = {:.6e})", p.derivative));
        }
        if u > us + tol || u < sub - tol {
            return Err(format!("u0eps = {u:.12e} leaves [u* - v, u*] at r = {r:.6e}"));
        }
        if p.value < threshold && u != p.value {
            return Err(format!("u0eps differs from u0 in the matching set at r = {r:.6e}"));
        }
        if i > 0 && u > u0eps.values[i - 1] + tol {
            return Err(format!("u0eps increases at r = {r:.6e}"));
        }
    }
    Ok(())
}

/// One annulus problem: data on `[ε, R]` with inner Dirichlet value
/// `u*(ε) − v(ε,t)` and outer value `u*(R)`.
#[derive(Debug, Clone)]
pub struct EpsilonProblem {
    pub params: ModelParams,
    pub epsilon: f64,
    pub c_star: f64,
    pub cutoff: CutoffCubic,
    pub grid: RadialGrid,
    pub u0eps: RadialProfile,
    pub conditions: CStarConditions,
    u_star_eps: f64,
    psi_eps: f64,
    u_star_outer: f64,
}

impl EpsilonProblem {
    /// `params.amplitude` is the mode amplitude `C` of the run.
    pub fn new(params: &ModelParams, datum: &InitialDatum, grid: RadialGrid) -> Result<Self> {
        params.ensure_admissible()?;
        let eps = grid.inner();
        if (grid.outer() - params.radius).abs() > 1e-14 * params.radius {
            return Err(Error::Grid(format!(
                "grid ends at {} but R = {}",
                grid.outer(),
                params.radius
            )));
        }
        let u0eps = make_u0eps(params, eps, datum, grid.nodes())?;
        let conditions = CStarConditions::new(params, eps, &u0eps)?;
        let c_star = c_star_eps(params, eps, &u0eps)?;
        Ok(Self {
            params: *params,
            epsilon: eps,
            c_star,
            cutoff: CutoffCubic::new(c_star)?,
            grid,
            u0eps,
            conditions,
            u_star_eps: params.u_star(eps)?,
            psi_eps: params.mode_shape(eps)?.psi,
            u_star_outer: params.u_star(params.radius)?,
        })
    }

    /// Same problem with a different cut-off.
    pub fn with_cutoff(&self, cutoff: CutoffCubic) -> Self {
        Self {
            cutoff,
            ..self.clone()
        }
    }

    pub fn inner_bc(&self, t: f64) -> f64 {
        let lam2 = self.params.lambda * self.params.lambda;
        self.u_star_eps - self.params.amplitude * (-lam2 * t).exp() * self.psi_eps
    }

    pub fn outer_bc(&self) -> f64 {
        self.u_star_outer
    }
}

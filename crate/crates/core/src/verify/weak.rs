//! Quadrature of the weak formulation across the origin.
//!
//! For radial `φ(r,t) = ζ(r) η(t)` the identity reads
//! `∫∫ r^{n−1} (−φ_t u + u_r φ_r − u u_r³ φ) dr dt = 0`. Fields live on
//! `[ε, R]`; below `ε` they are extended by the subsolution `u* − v`.

use serde::{Deserialize, Serialize};

use crate::analytic::ModelParams;
use crate::error::Result;
use crate::solver::SpacetimeField;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Bump {
    /// `(1 − (r/ρ)²)₊³`
    Centered { rho: f64 },
    /// `(1 − ((r − c)/ρ)²)₊³`
    Shell { center: f64, rho: f64 },
}

impl Bump {
    pub fn touches_origin(&self) -> bool {
        matches!(self, Bump::Centered { .. })
    }

    fn eval(&self, r: f64) -> (f64, f64) {
        let (x, dx) = match *self {
            Bump::Centered { rho } => (r / rho, 1.0 / rho),
            Bump::Shell { center, rho } => ((r - center) / rho, 1.0 / rho),
        };
        let q = 1.0 - x * x;
        if q <= 0.0 {
            (0.0, 0.0)
        } else {
            (q * q * q, -6.0 * x * q * q * dx)
        }
    }
}

/// `ζ(r) η(t)` with `η(t) = ((t − t_a)(t_b − t))₊³ / ((t_b − t_a)/2)⁶`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub bump: Bump,
    pub t_a: f64,
    pub t_b: f64,
}

impl TestFunction {
    fn eta(&self, t: f64) -> (f64, f64) {
        let p = (t - self.t_a) * (self.t_b - t);
        if p <= 0.0 {
            return (0.0, 0.0);
        }
        let norm = (0.5 * (self.t_b - self.t_a)).powi(6);
        let dp = self.t_b + self.t_a - 2.0 * t;
        (p * p * p / norm, 3.0 * p * p * dp / norm)
    }

    pub fn name(&self) -> String {
        match self.bump {
            Bump::Centered { rho } => format!("centered(rho={rho:.4})"),
            Bump::Shell { center, rho } => format!("shell(c={center:.4},rho={rho:.4})"),
        }
    }
}

/// Two bumps centred at the origin (radii `0.5R`, `0.9R`) and one shell at
/// `0.5R` of half-width `0.3R`, all with time window `[0.1T, 0.9T]`.
pub fn default_family(radius: f64, horizon: f64) -> Vec<TestFunction> {
    let (t_a, t_b) = (0.1 * horizon, 0.9 * horizon);
    [
        Bump::Centered { rho: 0.5 * radius },
        Bump::Centered { rho: 0.9 * radius },
        Bump::Shell {
            center: 0.5 * radius,
            rho: 0.3 * radius,
        },
    ]
    .into_iter()
    .map(|bump| TestFunction { bump, t_a, t_b })
    .collect()
}

/// Midpoint cells on `(0, ε)` where the extension is evaluated in closed
/// form: `(r_mid, width, u*(r_mid), u*_r(r_mid), ψ(r_mid), ψ'(r_mid))`.
struct Extension {
    cells: Vec<[f64; 6]>,
}

impl Extension {
    fn new(params: &ModelParams, eps: f64) -> Result<Self> {
        const CELLS: usize = 240;
        let lo = 1e-8 * eps;
        let mut cells = Vec::with_capacity(CELLS);
        for j in 0..CELLS {
            let a = lo * (eps / lo).powf(j as f64 / CELLS as f64);
            let b = lo * (eps / lo).powf((j + 1) as f64 / CELLS as f64);
            let r = 0.5 * (a + b);
            let shape = params.mode_shape(r)?;
            cells.push([r, b - a, params.u_star(r)?, params.u_star_r(r)?, shape.psi, shape.dpsi]);
        }
        Ok(Self { cells })
    }

    /// `(u, u_r)` of the extension at a cell for decay factor `C e^{−λ²t}`.
    fn at(cell: &[f64; 6], scale: f64) -> (f64, f64) {
        (cell[2] - scale * cell[4], cell[3] - scale * cell[5])
    }
}

/// Signed residual and the same sum with absolute values of every term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WeakResidual {
    pub residual: f64,
    pub magnitude: f64,
}

impl WeakResidual {
    pub fn relative(&self) -> f64 {
        if self.magnitude == 0.0 {
            0.0
        } else {
            self.residual.abs() / self.magnitude
        }
    }
}

fn trapezoid_weights(times: &[f64]) -> Vec<f64> {
    let n = times.len();
    let mut w = vec![0.0; n];
    for k in 0..n.saturating_sub(1) {
        let h = times[k + 1] - times[k];
        w[k] += 0.5 * h;
        w[k + 1] += 0.5 * h;
    }
    w
}

pub fn weak_residual(field: &SpacetimeField, tf: &TestFunction) -> Result<WeakResidual> {
    let params = &field.problem.params;
    let n1 = params.n as f64 - 1.0;
    let nodes = field.nodes();
    let ext = Extension::new(params, field.problem.epsilon)?;
    let lam2 = params.lambda * params.lambda;
    let weights = trapezoid_weights(&field.times);
    // Spatial cell data independent of t.
    let cells: Vec<(f64, f64, f64, f64, f64)> = nodes
        .windows(2)
        .map(|w| {
            let r = 0.5 * (w[0] + w[1]);
            let (z, zr) = tf.bump.eval(r);
            (r, w[1] - w[0], r.powf(n1), z, zr)
        })
        .collect();
    let ext_cells: Vec<(f64, f64)> = ext
        .cells
        .iter()
        .map(|c| {
            let (z, zr) = tf.bump.eval(c[0]);
            (z, zr)
        })
        .collect();
    let (mut res, mut mag) = (0.0, 0.0);
    for (k, &t) in field.times.iter().enumerate() {
        let (eta, eta_t) = tf.eta(t);
        if eta == 0.0 && eta_t == 0.0 {
            continue;
        }
        let row = field.values.row(k);
        let (mut s, mut a) = (0.0, 0.0);
        for (i, &(_, h, w, z, zr)) in cells.iter().enumerate() {
            if z == 0.0 && zr == 0.0 {
                continue;
            }
            let u = 0.5 * (row[i] + row[i + 1]);
            let ur = (row[i + 1] - row[i]) / h;
            let terms = [-z * eta_t * u, ur * zr * eta, -u * ur * ur * ur * z * eta];
            s += w * h * (terms[0] + terms[1] + terms[2]);
            a += w * h * (terms[0].abs() + terms[1].abs() + terms[2].abs());
        }
        let scale = params.amplitude * (-lam2 * t).exp();
        for (cell, &(z, zr)) in ext.cells.iter().zip(&ext_cells) {
            if z == 0.0 && zr == 0.0 {
                continue;
            }
            let (u, ur) = Extension::at(cell, scale);
            let w = cell[0].powf(n1) * cell[1];
            let terms = [-z * eta_t * u, ur * zr * eta, -u * ur * ur * ur * z * eta];
            s += w * (terms[0] + terms[1] + terms[2]);
            a += w * (terms[0].abs() + terms[1].abs() + terms[2].abs());
        }
        res += weights[k] * s;
        mag += weights[k] * a;
    }
    Ok(WeakResidual {
        residual: res,
        magnitude: mag,
    })
}

/// `(1/ε') ∫₀^T ∫₀^{ε'} r^{n−1} |u_r| dr dt` for the field extended below
/// its inner radius.
pub fn origin_flux(field: &SpacetimeField, eps_prime: f64) -> Result<f64> {
    let params = &field.problem.params;
    let n1 = params.n as f64 - 1.0;
    let eps = field.problem.epsilon;
    let nodes = field.nodes();
    let lam2 = params.lambda * params.lambda;
    let ext = Extension::new(params, eps.min(eps_prime))?;
    let weights = trapezoid_weights(&field.times);
    let mut total = 0.0;
    for (k, &t) in field.times.iter().enumerate() {
        let row = field.values.row(k);
        let mut s = 0.0;
        if eps_prime > eps {
            for i in 0..nodes.len() - 1 {
                let (a, b) = (nodes[i], nodes[i + 1].min(eps_prime));
                if a >= eps_prime {
                    break;
                }
                let ur = (row[i + 1] - row[i]) / (nodes[i + 1] - nodes[i]);
                s += (0.5 * (a + b)).powf(n1) * (b - a) * ur.abs();
            }
        }
        let scale = params.amplitude * (-lam2 * t).exp();
        for cell in &ext.cells {
            let (_, ur) = Extension::at(cell, scale);
            s += cell[0].powf(n1) * cell[1] * ur.abs();
        }
        total += weights[k] * s;
    }
    Ok(total / eps_prime)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bump_derivatives() {
        let h = 1e-6;
        for bump in [Bump::Centered { rho: 0.7 }, Bump::Shell { center: 0.5, rho: 0.2 }] {
            for r in [0.05, 0.35, 0.6, 0.69] {
                let fd = (bump.eval(r + h).0 - bump.eval(r - h).0) / (2.0 * h);
                assert!((fd - bump.eval(r).1).abs() < 1e-7, "{bump:?} r={r}");
            }
            assert_eq!(bump.eval(0.95), (0.0, 0.0));
        }
        let tf = TestFunction {
            bump: Bump::Centered { rho: 1.0 },
            t_a: 0.1,
            t_b: 0.9,
        };
        assert!((tf.eta(0.5).0 - 1.0).abs() < 1e-14);
        let fd = (tf.eta(0.3 + h).0 - tf.eta(0.3 - h).0) / (2.0 * h);
        assert!((fd - tf.eta(0.3).1).abs() < 1e-6);
        assert_eq!(tf.eta(0.05), (0.0, 0.0));
    }

    #[test]
    fn trapezoid_integrates_linear_exactly() {
        let t = [0.0, 0.1, 0.35, 1.0];
        let w = trapezoid_weights(&t);
        let s: f64 = t.iter().zip(&w).map(|(a, b)| (2.0 * a + 1.0) * b).sum();
        assert!((s - 2.0).abs() < 1e-15);
    }
}

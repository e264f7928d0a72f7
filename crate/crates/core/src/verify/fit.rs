//! Least-squares lines and affine majorants.

use serde::{Deserialize, Serialize};

/// `y ≈ slope·x + intercept` with the coefficient of determination.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn fit_line(x: &[f64], y: &[f64]) -> Option<LineFit> {
    let n = x.len();
    if n < 2 || y.len() != n {
        return None;
    }
    let nf = n as f64;
    let mx = x.iter().sum::<f64>() / nf;
    let my = y.iter().sum::<f64>() / nf;
    let (mut sxx, mut sxy, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxx += (a - mx) * (a - mx);
        sxy += (a - mx) * (b - my);
        syy += (b - my) * (b - my);
    }
    if sxx == 0.0 {
        return None;
    }
    let slope = sxy / sxx;
    let r_squared = if syy == 0.0 { 1.0 } else { (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0) };
    Some(LineFit {
        slope,
        intercept: my - slope * mx,
        r_squared,
    })
}

/// Power law `y ≈ prefactor · x^exponent` fitted in log-log coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentFit {
    pub exponent: f64,
    pub prefactor: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Option<ExponentFit> {
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return None;
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let line = fit_line(&lx, &ly)?;
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Some(ExponentFit {
        exponent: line.slope,
        prefactor: line.intercept.exp(),
        r_squared: line.r_squared,
        window: (lo, hi),
    })
}

/// Affine function `a + b t`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Affine {
    pub a: f64,
    pub b: f64,
}

impl Affine {
    pub fn at(&self, t: f64) -> f64 {
        self.a + self.b * t
    }
}

/// The affine majorant of the points with least integral over
/// `[t_first, t_last]`: the upper-hull edge spanning the midpoint.
/// Points must be sorted by `t`.
pub fn minimal_affine_majorant(t: &[f64], w: &[f64]) -> Option<Affine> {
    let n = t.len();
    if n == 0 || w.len() != n {
        return None;
    }
    if n == 1 || t[n - 1] == t[0] {
        let top = w.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        return Some(Affine { a: top, b: 0.0 });
    }
    let mut hull: Vec<usize> = Vec::with_capacity(n);
    for i in 0..n {
        while hull.len() >= 2 {
            let (j, k) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            // Drop k when it lies on or below the chord j → i.
            let cross = (t[k] - t[j]) * (w[i] - w[j]) - (w[k] - w[j]) * (t[i] - t[j]);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    }
    let mid = 0.5 * (t[0] + t[n - 1]);
    let edge = hull
        .windows(2)
        .find(|e| t[e[0]] <= mid && mid <= t[e[1]])
        .unwrap_or(&hull[hull.len() - 2..]);
    let (i, j) = (edge[0], edge[1]);
    let b = (w[j] - w[i]) / (t[j] - t[i]);
    Some(Affine { a: w[i] - b * t[i], b })
}

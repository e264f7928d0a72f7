//! Bessel functions of the first kind of real order, their derivatives and
//! first positive zeros, together with the two dimension-dependent constants
//! of the model: the Bessel order ν(n) and the stationary amplitude α(n).
//!
//! Evaluation uses the ascending power series for `x <= max(12, 2ν)` and
//! Miller's backward recurrence, normalised with the Neumann sum
//! `(x/2)^μ = Σ_k (μ + 2k) Γ(μ + k) / k! · J_{μ+2k}(x)`, beyond that. Both
//! routes carry an internal error estimate; anything above `1e-10`
//! (absolute below 1, relative above) is reported as
//! [`Error::AccuracyLoss`]. Accuracy is targeted at `x <= 50`.

use crate::error::{Error, Result};

/// Largest tolerated internal error estimate of a single evaluation.
pub const ACCURACY_LIMIT: f64 = 1e-10;

const SERIES_SWITCH: f64 = 12.0;
const SCAN_STEP: f64 = 0.1;
const BISECT_WIDTH: f64 = 1e-12;

/// ν(n) = (1/6)·sqrt(36n² − 96n + 61).
pub fn nu_of(n: i64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Dimension(n));
    }
    let n = n as f64;
    Ok((36.0 * n * n - 96.0 * n + 61.0).sqrt() / 6.0)
}

/// α(n) = cbrt(9n − 15).
pub fn alpha_of(n: i64) -> Result<f64> {
    if n < 2 {
        return Err(Error::Dimension(n));
    }
    Ok((9.0 * n as f64 - 15.0).cbrt())
}

/// A strictly positive, finite Bessel order.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct BesselOrder(f64);

impl BesselOrder {
    pub fn new(nu: f64) -> Result<Self> {
        if nu.is_finite() && nu > 0.0 {
            Ok(Self(nu))
        } else {
            Err(Error::Order(nu))
        }
    }

    /// The order ν(n) attached to spatial dimension `n`.
    pub fn for_dimension(n: i64) -> Result<Self> {
        Self::new(nu_of(n)?)
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// First positive zeros of `J_ν` (`x0`) and of `J_ν'` (`x1`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BesselZeros {
    pub x0: f64,
    pub x1: f64,
}

/// J_ν(x) for `x >= 0`.
pub fn bessel_j(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x >= 0.0) || !x.is_finite() {
        return Err(Error::domain("Bessel argument", x));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    bessel_j_real(order.0, x)
}

/// J_ν'(x) for `x > 0`.
///
/// For ν < 1 the derivative behaves like `ν (x/2)^(ν−1) / (2 Γ(ν+1))` as
/// `x → 0⁺` and is unbounded, so `x = 0` is rejected rather than returning
/// an infinity.
pub fn bessel_j_prime(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("Bessel derivative argument", x));
    }
    let nu = order.0;
    if use_series(nu, x) {
        let s = series(nu, x);
        check_accuracy(nu, x, s.derivative_error, s.derivative)?;
        Ok(s.derivative)
    } else {
        let (j0, j1) = miller_pair(nu, x)?;
        Ok(nu / x * j0 - j1)
    }
}

/// J_ν''(x) from the order recurrence `(J_{ν−2} − 2J_ν + J_{ν+2}) / 4`.
///
/// This route does not use Bessel's differential equation, which makes it
/// usable as an independent check of that equation.
pub fn bessel_j_second(order: BesselOrder, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("Bessel second-derivative argument", x));
    }
    let nu = order.0;
    let lower = bessel_j_real(nu - 2.0, x)?;
    let mid = bessel_j_real(nu, x)?;
    let upper = bessel_j_real(nu + 2.0, x)?;
    Ok((lower - 2.0 * mid + upper) / 4.0)
}

/// Residual `x²J'' + xJ' + (x² − ν²)J` of Bessel's equation, with `J''`
/// taken from [`bessel_j_second`].
pub fn bessel_residual(order: BesselOrder, x: f64) -> Result<f64> {
    let nu = order.0;
    let j = bessel_j(order, x)?;
    let jp = bessel_j_prime(order, x)?;
    let jpp = bessel_j_second(order, x)?;
    Ok(x * x * jpp + x * jp + (x * x - nu * nu) * j)
}

/// J_μ(x) for any real order μ and `x > 0`.
pub fn bessel_j_real(mu: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::domain("Bessel argument", x));
    }
    if !mu.is_finite() {
        return Err(Error::Order(mu));
    }
    if mu < 0.0 && mu == mu.round() {
        // J_{-m} = (-1)^m J_m
        let m = -mu;
        let sign = if (m as i64) % 2 == 0 { 1.0 } else { -1.0 };
        return Ok(sign * bessel_j_real(m, x)?);
    }
    if use_series(mu.abs(), x) {
        let s = series(mu, x);
        check_accuracy(mu, x, s.value_error, s.value)?;
        Ok(s.value)
    } else {
        miller_order(mu, x)
    }
}

/// Search horizon for [`first_zeros`]: sign changes are looked for on
/// `[max(ν, 0.1), 2ν + 20]`.
pub fn zero_search_horizon(order: BesselOrder) -> f64 {
    2.0 * order.0 + 20.0
}

/// First positive zeros of `J_ν'` and `J_ν`: scan with step 0.1 from
/// `max(ν, 0.1)`, bisect the first bracket to width `1e-12`, then apply one
/// Newton step.
pub fn first_zeros(order: BesselOrder) -> Result<BesselZeros> {
    let nu = order.0;
    let start = nu.max(SCAN_STEP);
    let horizon = zero_search_horizon(order);

    let jp = |x: f64| bessel_j_prime(order, x);
    let jpp = |x: f64| -> Result<f64> {
        // J'' from Bessel's equation.
        let j = bessel_j(order, x)?;
        let d = bessel_j_prime(order, x)?;
        Ok(-d / x - (1.0 - nu * nu / (x * x)) * j)
    };
    let x1 = first_root(jp, jpp, start, horizon).ok_or(Error::Bracket {
        which: "J_nu'",
        nu,
        horizon,
    })??;

    let j = |x: f64| bessel_j(order, x);
    let x0 = first_root(j, jp, x1, horizon).ok_or(Error::Bracket {
        which: "J_nu",
        nu,
        horizon,
    })??;

    for (x, residual) in [(x1, jp(x1)?), (x0, j(x0)?)] {
        if residual.abs() >= ACCURACY_LIMIT {
            return Err(Error::AccuracyLoss {
                nu,
                x,
                estimate: residual.abs(),
            });
        }
    }
    debug_assert!(0.0 < x1 && x1 < x0);
    Ok(BesselZeros { x0, x1 })
}

/// Locates the first sign change of `f` after `start` (where `f > 0`).
/// Returns `None` if nothing is found below `horizon`.
fn first_root<F, D>(f: F, df: D, start: f64, horizon: f64) -> Option<Result<f64>>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let mut lo = start;
    let mut f_lo = match f(lo) {
        Ok(v) => v,
        Err(e) => return Some(Err(e)),
    };
    let mut step = 1usize;
    let mut hi = start + SCAN_STEP;
    while hi <= horizon {
        let f_hi = match f(hi) {
            Ok(v) => v,
            Err(e) => return Some(Err(e)),
        };
        if f_hi == 0.0 {
            return Some(Ok(hi));
        }
        if f_lo.signum() != f_hi.signum() {
            return Some(bisect_and_polish(&f, &df, lo, hi, f_lo));
        }
        lo = hi;
        f_lo = f_hi;
        step += 1;
        hi = start + step as f64 * SCAN_STEP;
    }
    None
}

fn bisect_and_polish<F, D>(f: &F, df: &D, mut lo: f64, mut hi: f64, f_lo: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    D: Fn(f64) -> Result<f64>,
{
    let sign_lo = f_lo.signum();
    while hi - lo > BISECT_WIDTH {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if f_mid.signum() == sign_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let x = 0.5 * (lo + hi);
    let slope = df(x)?;
    if slope != 0.0 {
        let polished = x - f(x)? / slope;
        if polished > lo - BISECT_WIDTH && polished < hi + BISECT_WIDTH {
            return Ok(polished);
        }
    }
    Ok(x)
}

fn use_series(nu: f64, x: f64) -> bool {
    x <= SERIES_SWITCH.max(2.0 * nu)
}

/// Mixed test: absolute for values below 1, relative above.
fn check_accuracy(nu: f64, x: f64, estimate: f64, value: f64) -> Result<()> {
    let estimate = estimate / value.abs().max(1.0);
    if estimate > ACCURACY_LIMIT || !estimate.is_finite() {
        Err(Error::AccuracyLoss { nu, x, estimate })
    } else {
        Ok(())
    }
}

struct SeriesValue {
    value: f64,
    value_error: f64,
    derivative: f64,
    derivative_error: f64,
}

/// Ascending series `Σ (−1)^k (x/2)^(2k+μ) / (k! Γ(k+μ+1))` and its
/// termwise derivative. `μ` must not be a negative integer.
fn series(mu: f64, x: f64) -> SeriesValue {
    let half = 0.5 * x;
    let q = -half * half;
    let mut term = half.powf(mu) / libm::tgamma(mu + 1.0);
    let mut sum = 0.0;
    let mut dsum = 0.0;
    let mut max_term: f64 = 0.0;
    let mut max_dterm: f64 = 0.0;
    let mut k = 0usize;
    loop {
        let dterm = term * (2.0 * k as f64 + mu) / x;
        sum += term;
        dsum += dterm;
        max_term = max_term.max(term.abs());
        max_dterm = max_dterm.max(dterm.abs());
        let kf = k as f64;
        let next = term * q / ((kf + 1.0) * (kf + 1.0 + mu));
        if k > 2
            && next.abs() <= f64::EPSILON * 1e-2 * sum.abs().max(f64::MIN_POSITIVE)
            && (next * (2.0 * kf + 2.0 + mu) / x).abs()
                <= f64::EPSILON * 1e-2 * dsum.abs().max(f64::MIN_POSITIVE)
        {
            break;
        }
        if k > 500 {
            break;
        }
        term = next;
        k += 1;
    }
    let terms = (k + 1) as f64;
    SeriesValue {
        value: sum,
        value_error: 2.0 * f64::EPSILON * max_term * terms.sqrt(),
        derivative: dsum,
        derivative_error: 2.0 * f64::EPSILON * max_dterm * terms.sqrt(),
    }
}

/// Backward recurrence for `J_{μ0+k}(x)`, `k = 0..=count`, with `μ0 ∈ [0, 1)`.
fn miller_sequence(mu0: f64, x: f64, count: usize, start: usize) -> Vec<f64> {
    let top = start.max(count + 2);
    let top = top + top % 2;
    let mut f = vec![0.0; top + 2];
    f[top] = 1e-300;
    for k in (1..=top).rev() {
        let next = 2.0 * (mu0 + k as f64) / x * f[k] - f[k + 1];
        f[k - 1] = next;
        if next.abs() > 1e250 {
            for v in f[k - 1..].iter_mut() {
                *v *= 1e-250;
            }
        }
    }
    // Neumann normalisation: c_0 = Γ(μ0+1), c_j = (μ0 + 2j) Γ(μ0 + j) / j!.
    let mut norm = libm::tgamma(mu0 + 1.0) * f[0];
    let mut g = libm::tgamma(mu0 + 1.0);
    let mut j = 1usize;
    while 2 * j <= top {
        if j > 1 {
            g *= (mu0 + j as f64 - 1.0) / j as f64;
        }
        norm += (mu0 + 2.0 * j as f64) * g * f[2 * j];
        j += 1;
    }
    let scale = (0.5 * x).powf(mu0) / norm;
    f.truncate(count + 1);
    f.iter().map(|v| v * scale).collect()
}

fn miller_start(x: f64, highest: usize) -> usize {
    (x + 10.0 * x.cbrt() + 30.0) as usize + highest
}

/// J_μ(x) through Miller's algorithm; negative orders come from the
/// downward recurrence `J_{μ−1} = (2μ/x) J_μ − J_{μ+1}`.
fn miller_order(mu: f64, x: f64) -> Result<f64> {
    let floor = mu.floor();
    let mu0 = mu - floor;
    let index = floor as i64;
    let needed = index.max(0) as usize + 1;
    let start = miller_start(x, needed);
    let coarse = miller_sequence(mu0, x, needed, start);
    let fine = miller_sequence(mu0, x, needed, start + 24);
    let pick = |seq: &[f64]| -> f64 {
        if index >= 0 {
            seq[index as usize]
        } else {
            let (mut hi, mut cur) = (seq[1], seq[0]);
            let mut order = mu0;
            for _ in 0..(-index) {
                let lower = 2.0 * order / x * cur - hi;
                hi = cur;
                cur = lower;
                order -= 1.0;
            }
            cur
        }
    };
    let value = pick(&fine);
    let estimate = (value - pick(&coarse)).abs() + 4.0 * f64::EPSILON * value.abs().max(1.0);
    check_accuracy(mu, x, estimate, value)?;
    Ok(value)
}

/// `(J_ν(x), J_{ν+1}(x))` from Miller's algorithm.
fn miller_pair(nu: f64, x: f64) -> Result<(f64, f64)> {
    Ok((miller_order(nu, x)?, miller_order(nu + 1.0, x)?))
}

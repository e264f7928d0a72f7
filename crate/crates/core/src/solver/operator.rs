use crate::error::{Error, Result};
use crate::solver::RadialGrid;

/// Three weights acting on `(u_{i−1}, u_i, u_{i+1})`.
pub type Weights = [f64; 3];

/// Second-order stencils on a nonuniform radial grid: the first derivative
/// at every node (one-sided at the ends) and the radial Laplacian
/// `u_rr + (n−1)/r u_r` at interior nodes. Boundary rows of the Laplacian
/// are Dirichlet identities and carry zero weights.
#[derive(Debug, Clone, PartialEq)]
pub struct RadialOperator {
    n: i64,
    nodes: Vec<f64>,
    d1: Vec<Weights>,
    lap: Vec<Weights>,
    /// One-sided weights on `(u_0, u_1, u_2)` and `(u_{M−2}, u_{M−1}, u_M)`.
    d1_inner: Weights,
    d1_outer: Weights,
}

impl RadialOperator {
    pub fn new(grid: &RadialGrid, n: i64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Dimension(n));
        }
        let r = grid.nodes();
        let m = r.len();
        if m < 4 {
            return Err(Error::Grid(format!("operator needs at least 4 nodes, got {m}")));
        }
        let mut d1 = vec![[0.0; 3]; m];
        let mut lap = vec![[0.0; 3]; m];
        for i in 1..m - 1 {
            let hm = r[i] - r[i - 1];
            let hp = r[i + 1] - r[i];
            let first = [
                -hp / (hm * (hm + hp)),
                (hp - hm) / (hm * hp),
                hm / (hp * (hm + hp)),
            ];
            let second = [2.0 / (hm * (hm + hp)), -2.0 / (hm * hp), 2.0 / (hp * (hm + hp))];
            let c = (n - 1) as f64 / r[i];
            d1[i] = first;
            lap[i] = [
                second[0] + c * first[0],
                second[1] + c * first[1],
                second[2] + c * first[2],
            ];
        }
        let (h1, h2) = (r[1] - r[0], r[2] - r[1]);
        let d1_inner = [
            -(2.0 * h1 + h2) / (h1 * (h1 + h2)),
            (h1 + h2) / (h1 * h2),
            -h1 / (h2 * (h1 + h2)),
        ];
        let (h1, h2) = (r[m - 1] - r[m - 2], r[m - 2] - r[m - 3]);
        let d1_outer = [
            h1 / (h2 * (h1 + h2)),
            -(h1 + h2) / (h1 * h2),
            (2.0 * h1 + h2) / (h1 * (h1 + h2)),
        ];
        Ok(Self {
            n,
            nodes: r.to_vec(),
            d1,
            lap,
            d1_inner,
            d1_outer,
        })
    }

    pub fn dimension(&self) -> i64 {
        self.n
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    /// Interior first-derivative weights at node `i` (`1 <= i <= M−1`).
    pub fn d1_weights(&self, i: usize) -> Weights {
        self.d1[i]
    }

    /// Interior Laplacian weights at node `i`.
    pub fn laplacian_weights(&self, i: usize) -> Weights {
        self.lap[i]
    }

    pub fn derivative_at(&self, u: &[f64], i: usize) -> f64 {
        let m = self.nodes.len();
        if i == 0 {
            let w = self.d1_inner;
            w[0] * u[0] + w[1] * u[1] + w[2] * u[2]
        } else if i == m - 1 {
            let w = self.d1_outer;
            w[0] * u[m - 3] + w[1] * u[m - 2] + w[2] * u[m - 1]
        } else {
            let w = self.d1[i];
            w[0] * u[i - 1] + w[1] * u[i] + w[2] * u[i + 1]
        }
    }

    /// `u_r` at every node.
    pub fn derivative(&self, u: &[f64]) -> Vec<f64> {
        (0..u.len()).map(|i| self.derivative_at(u, i)).collect()
    }

    /// Discrete Laplacian; zero at the boundary rows.
    pub fn laplacian(&self, u: &[f64]) -> Vec<f64> {
        let m = u.len();
        let mut out = vec![0.0; m];
        for i in 1..m - 1 {
            let w = self.lap[i];
            out[i] = w[0] * u[i - 1] + w[1] * u[i] + w[2] * u[i + 1];
        }
        out
    }
}

/// Tridiagonal system `a_i x_{i−1} + b_i x_i + c_i x_{i+1} = d_i`, solved
/// in place by the Thomas algorithm. `a_0` and `c_{M−1}` are ignored.
#[derive(Debug, Clone, Default)]
pub struct Tridiagonal {
    pub lower: Vec<f64>,
    pub diag: Vec<f64>,
    pub upper: Vec<f64>,
}

impl Tridiagonal {
    pub fn zeros(m: usize) -> Self {
        Self {
            lower: vec![0.0; m],
            diag: vec![0.0; m],
            upper: vec![0.0; m],
        }
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    /// Overwrites `rhs` with the solution. Fails on a vanishing pivot.
    pub fn solve(&self, rhs: &mut [f64]) -> Result<()> {
        let m = self.diag.len();
        debug_assert_eq!(rhs.len(), m);
        let mut c_prime = vec![0.0; m];
        let mut pivot = self.diag[0];
        if pivot == 0.0 || !pivot.is_finite() {
            return Err(Error::Grid("singular tridiagonal system".into()));
        }
        c_prime[0] = self.upper[0] / pivot;
        rhs[0] /= pivot;
        for i in 1..m {
            pivot = self.diag[i] - self.lower[i] * c_prime[i - 1];
            if pivot == 0.0 || !pivot.is_finite() {
                return Err(Error::Grid("singular tridiagonal system".into()));
            }
            c_prime[i] = if i + 1 < m { self.upper[i] / pivot } else { 0.0 };
            rhs[i] = (rhs[i] - self.lower[i] * rhs[i - 1]) / pivot;
        }
        for i in (0..m - 1).rev() {
            rhs[i] -= c_prime[i] * rhs[i + 1];
        }
        Ok(())
    }

    pub fn multiply(&self, x: &[f64]) -> Vec<f64> {
        let m = x.len();
        (0..m)
            .map(|i| {
                let mut s = self.diag[i] * x[i];
                if i > 0 {
                    s += self.lower[i] * x[i - 1];
                }
                if i + 1 < m {
                    s += self.upper[i] * x[i + 1];
                }
                s
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> RadialGrid {
        RadialGrid::graded(0.05, 1.0, 60, 2.0).unwrap()
    }

    #[test]
    fn constant_and_quadratic() {
        let g = grid();
        let op = RadialOperator::new(&g, 3).unwrap();
        let c = vec![2.5; g.len()];
        for (i, v) in op.laplacian(&c).iter().enumerate().skip(1).take(g.len() - 2) {
            assert!(v.abs() < 1e-6, "node {i}: {v}");
        }
        let q: Vec<f64> = g.nodes().iter().map(|r| r * r).collect();
        let lap = op.laplacian(&q);
        for v in &lap[1..g.len() - 1] {
            assert!((v - 6.0).abs() < 1e-9);
        }
        let d = op.derivative(&q);
        for (r, v) in g.nodes().iter().zip(&d) {
            assert!((v - 2.0 * r).abs() < 1e-10);
        }
    }

    #[test]
    fn second_order_on_smooth_function() {
        let err = |m: usize| {
            let g = RadialGrid::graded(0.1, 1.0, m, 2.0).unwrap();
            let op = RadialOperator::new(&g, 2).unwrap();
            let u: Vec<f64> = g.nodes().iter().map(|r| r.sin()).collect();
            let lap = op.laplacian(&u);
            let d = op.derivative(&u);
            let mut e: f64 = 0.0;
            for (i, &r) in g.nodes().iter().enumerate() {
                e = e.max((d[i] - r.cos()).abs());
                if i > 0 && i + 1 < g.len() {
                    e = e.max((lap[i] - (-r.sin() + r.cos() / r)).abs());
                }
            }
            e
        };
        let ratio = err(80) / err(160);
        assert!(ratio > 3.5, "ratio {ratio}");
    }

    #[test]
    fn rejects_tiny_grid() {
        let g = RadialGrid::from_nodes(vec![0.1, 0.2, 0.3]).unwrap();
        assert!(RadialOperator::new(&g, 2).is_err());
    }

    #[test]
    fn thomas_solves() {
        let m = 7;
        let mut t = Tridiagonal::zeros(m);
        for i in 0..m {
            t.lower[i] = -1.0;
            t.diag[i] = 4.0 + i as f64;
            t.upper[i] = -0.5;
        }
        let x: Vec<f64> = (0..m).map(|i| (i as f64).cos()).collect();
        let mut b = t.multiply(&x);
        t.solve(&mut b).unwrap();
        for (a, e) in b.iter().zip(&x) {
            assert!((a - e).abs() < 1e-14);
        }
    }
}

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Radial nodes `ε = r_0 < … < r_M = R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    nodes: Vec<f64>,
    grading_exponent: f64,
}

impl RadialGrid {
    /// `r_i = ε + (R − ε)(i/M)^γ`.
    pub fn graded(eps: f64, radius: f64, intervals: usize, gamma: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < radius) {
            return Err(Error::Grid(format!("need 0 < eps < R, got eps = {eps}, R = {radius}")));
        }
        if !(gamma >= 1.0) || !gamma.is_finite() {
            return Err(Error::Grid(format!("grading exponent must be >= 1, got {gamma}")));
        }
        if intervals < 3 {
            return Err(Error::Grid(format!("need at least 3 intervals, got {intervals}")));
        }
        let m = intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals)
            .map(|i| eps + (radius - eps) * (i as f64 / m).powf(gamma))
            .collect();
        nodes[0] = eps;
        nodes[intervals] = radius;
        let grid = Self {
            nodes,
            grading_exponent: gamma,
        };
        grid.check_inner_resolution()?;
        Ok(grid)
    }

    pub fn from_nodes(nodes: Vec<f64>) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::Grid("need at least 2 nodes".into()));
        }
        if !(nodes[0] > 0.0) || nodes.windows(2).any(|w| !(w[1] > w[0])) || !nodes[nodes.len() - 1].is_finite() {
            return Err(Error::Grid("nodes must be positive, finite and strictly increasing".into()));
        }
        Ok(Self {
            nodes,
            grading_exponent: f64::NAN,
        })
    }

    /// At least three nodes in `[ε, 10ε]` whenever that decade fits in the
    /// domain.
    fn check_inner_resolution(&self) -> Result<()> {
        let eps = self.inner();
        if 10.0 * eps > self.outer() {
            return Ok(());
        }
        let count = self.nodes.iter().take_while(|&&r| r <= 10.0 * eps).count();
        if count < 3 {
            return Err(Error::Grid(format!(
                "only {count} nodes in the first decade [{eps}, {}]",
                10.0 * eps
            )));
        }
        Ok(())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn inner(&self) -> f64 {
        self.nodes[0]
    }

    pub fn outer(&self) -> f64 {
        self.nodes[self.nodes.len() - 1]
    }

    pub fn grading_exponent(&self) -> f64 {
        self.grading_exponent
    }

    /// Largest spacing.
    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Index `i` with `nodes[i] <= r < nodes[i + 1]` (clamped to the last
    /// interval).
    pub fn locate(&self, r: f64) -> usize {
        let idx = self.nodes.partition_point(|&x| x <= r);
        idx.saturating_sub(1).min(self.nodes.len() - 2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn graded_endpoints_and_order() {
        let g = RadialGrid::graded(0.02, 0.6, 400, 2.0).unwrap();
        assert_eq!(g.len(), 401);
        assert_eq!(g.inner(), 0.02);
        assert_eq!(g.outer(), 0.6);
        assert!(g.nodes().windows(2).all(|w| w[1] > w[0]));
        assert!((g.max_spacing() - (0.58 * (1.0 - (399.0f64 / 400.0).powi(2)))).abs() < 1e-15);
        assert_eq!(g.locate(0.02), 0);
        assert_eq!(g.locate(0.6), 399);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(RadialGrid::graded(0.7, 0.6, 40, 2.0).is_err());
        assert!(RadialGrid::graded(0.01, 0.6, 2, 2.0).is_err());
        assert!(RadialGrid::graded(1e-4, 1.0, 4, 1.0).is_err());
        assert!(RadialGrid::from_nodes(vec![0.1, 0.1, 0.2]).is_err());
    }
}

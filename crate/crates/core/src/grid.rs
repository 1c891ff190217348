use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};

pub const MIN_NODES: usize = 16;

/// Uniform grid in the hyperbolic radial coordinate `x = artanh |z|`.
///
/// Node 0 sits at the origin and node `n_nodes - 1` at the truncation radius.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialGrid {
    pub n_nodes: usize,
    pub rho_hat_max: f64,
}

impl RadialGrid {
    pub fn new(n_nodes: usize, rho_hat_max: f64) -> Result<Self> {
        if n_nodes < MIN_NODES {
            return Err(FlowError::GridSize {
                min: MIN_NODES,
                got: n_nodes,
            });
        }
        if !(rho_hat_max > 0.0 && rho_hat_max.is_finite()) {
            return Err(FlowError::Parameter(format!(
                "rho_hat_max must be positive and finite, got {rho_hat_max}"
            )));
        }
        Ok(Self {
            n_nodes,
            rho_hat_max,
        })
    }

    pub fn spacing(&self) -> f64 {
        self.rho_hat_max / (self.n_nodes - 1) as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        i as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n_nodes).map(|i| self.node(i)).collect()
    }

    /// Same spacing, domain doubled.
    pub fn doubled_domain(&self) -> Self {
        Self {
            n_nodes: 2 * (self.n_nodes - 1) + 1,
            rho_hat_max: 2.0 * self.rho_hat_max,
        }
    }

    /// Same domain, spacing halved.
    pub fn refined(&self) -> Self {
        Self {
            n_nodes: 2 * (self.n_nodes - 1) + 1,
            rho_hat_max: self.rho_hat_max,
        }
    }

    /// Indices kept by curvature diagnostics: two nodes dropped at each end.
    pub fn interior(&self) -> std::ops::Range<usize> {
        2..self.n_nodes - 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_are_uniform_and_span_domain() {
        let g = RadialGrid::new(17, 4.0).unwrap();
        let x = g.nodes();
        assert_eq!(x[0], 0.0);
        assert_eq!(*x.last().unwrap(), 4.0);
        for w in x.windows(2) {
            assert!((w[1] - w[0] - 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn rejects_small_grids() {
        assert!(matches!(
            RadialGrid::new(8, 1.0),
            Err(FlowError::GridSize { min: 16, got: 8 })
        ));
        assert!(RadialGrid::new(32, 0.0).is_err());
    }

    #[test]
    fn refinement_keeps_nodes() {
        let g = RadialGrid::new(33, 10.0).unwrap();
        let f = g.refined();
        assert_eq!(f.spacing(), g.spacing() / 2.0);
        let d = g.doubled_domain();
        assert_eq!(d.spacing(), g.spacing());
        assert_eq!(d.rho_hat_max, 20.0);
    }
}

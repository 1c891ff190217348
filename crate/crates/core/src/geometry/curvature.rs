use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::grid::RadialGrid;
use crate::stencil::{apply, flat_jacobian, Component, Stencil};

use super::Background;

/// Per-node eigenvalues of a U(n)-invariant (1,1) form in the radial/spherical split.
///
/// In dimension one only `radial` carries meaning; `spherical` is kept with
/// multiplicity zero so the arithmetic stays uniform.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenField {
    pub radial: Vec<f64>,
    pub spherical: Vec<f64>,
}

impl EigenField {
    pub fn uniform(len: usize, value: f64) -> Self {
        Self {
            radial: vec![value; len],
            spherical: vec![value; len],
        }
    }

    pub fn len(&self) -> usize {
        self.radial.len()
    }

    pub fn is_empty(&self) -> bool {
        self.radial.is_empty()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            radial: self.radial.iter().map(|&v| f(v)).collect(),
            spherical: self.spherical.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Smallest eigenvalue that counts in dimension `dim`, with its node.
    pub fn min_with_node(&self, dim: usize) -> (usize, f64) {
        let mut best = (0, f64::INFINITY);
        for i in 0..self.len() {
            let v = self.min_at(dim, i);
            if v < best.1 {
                best = (i, v);
            }
        }
        best
    }

    pub fn min_at(&self, dim: usize, i: usize) -> f64 {
        if dim > 1 {
            self.radial[i].min(self.spherical[i])
        } else {
            self.radial[i]
        }
    }

    /// `log det` against the unit form: `log radial + (n-1) log spherical`.
    pub fn log_det(&self, dim: usize, i: usize) -> f64 {
        let m = (dim - 1) as f64;
        let mut v = self.radial[i].ln();
        if dim > 1 {
            v += m * self.spherical[i].ln();
        }
        v
    }

    /// Trace against the unit form.
    pub fn trace(&self, dim: usize, i: usize) -> f64 {
        self.radial[i] + (dim - 1) as f64 * self.spherical[i]
    }
}

/// Chern-Ricci form `-i∂∂̄ log det g` of a U(n)-invariant metric given by its
/// Euclidean eigenvalues on the grid.
///
/// Second-order central differences; the origin uses the symmetric closure and
/// the last node one-sided differences.
pub fn ric_of_metric(grid: &RadialGrid, dim: usize, metric: &EigenField) -> Result<EigenField> {
    if grid.n_nodes < 4 {
        return Err(FlowError::GridSize {
            min: 4,
            got: grid.n_nodes,
        });
    }
    let (node, min) = metric.min_with_node(dim);
    if !(min > 0.0) {
        return Err(FlowError::Positivity { node, value: min });
    }
    let log_det: Vec<f64> = (0..grid.n_nodes).map(|i| metric.log_det(dim, i)).collect();
    let p_rad = apply(grid, &log_det, Component::Radial, Stencil::Central);
    let p_sph = apply(grid, &log_det, Component::Spherical, Stencil::Central);
    let x = grid.nodes();
    Ok(EigenField {
        radial: x
            .iter()
            .zip(&p_rad)
            .map(|(&x, p)| -flat_jacobian(x, Component::Radial) * p)
            .collect(),
        spherical: x
            .iter()
            .zip(&p_sph)
            .map(|(&x, p)| -flat_jacobian(x, Component::Spherical) * p)
            .collect(),
    })
}

/// Background eigenvalues sampled on the grid.
pub fn background_metric(background: &Background, grid: &RadialGrid) -> EigenField {
    let (radial, spherical) = grid.nodes().iter().map(|&x| background.metric_eigen(x)).unzip();
    EigenField { radial, spherical }
}

/// Sup over interior nodes of `|Ric_h / h - κ|`, the discrete Einstein defect of the background.
pub fn einstein_defect(background: &Background, grid: &RadialGrid) -> Result<f64> {
    let h = background_metric(background, grid);
    let ric = ric_of_metric(grid, background.dim, &h)?;
    let kappa = background.ric_sign;
    Ok(grid
        .interior()
        .map(|i| {
            let r = (ric.radial[i] / h.radial[i] - kappa).abs();
            if background.dim > 1 {
                r.max((ric.spherical[i] / h.spherical[i] - kappa).abs())
            } else {
                r
            }
        })
        .fold(0.0, f64::max))
}

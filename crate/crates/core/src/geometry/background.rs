use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::grid::RadialGrid;
use crate::stencil::{apply, Component, Stencil};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackgroundKind {
    PoincareDisc,
    ComplexHyperbolicBall,
}

/// A complete Kähler model `θ₀ = i∂∂̄(-(n+1) log(1 - |z|²))` on the unit ball of `Cⁿ`.
///
/// In dimension one this is the Poincaré metric `2 / (1 - r²)²`. Both satisfy
/// `Ric(θ₀) = -θ₀` and are torsion free.
#[derive(Debug, Clone, PartialEq)]
pub struct Background {
    pub kind: BackgroundKind,
    pub dim: usize,
    /// Einstein constant κ in `Ric(θ₀) = κ θ₀`.
    pub ric_sign: f64,
    pub torsion_bound: f64,
    pub bk_lower: f64,
    exhaustion_bound: f64,
}

/// Closed-form metric coefficient returned by [`metric_profile`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricCoefficient {
    /// `h₁₁̄(r)` of the disc.
    Conformal(f64),
    /// `(Φ'(ρ), Φ'(ρ) + ρΦ''(ρ))` of the ball potential at `ρ = |z|²`.
    Eigen { spherical: f64, radial: f64 },
}

impl Background {
    pub fn new(kind: BackgroundKind, dim: usize) -> Result<Self> {
        match (kind, dim) {
            (BackgroundKind::PoincareDisc, 1) => {}
            (BackgroundKind::PoincareDisc, d) => {
                return Err(FlowError::Parameter(format!(
                    "the Poincaré disc has complex dimension 1, got {d}"
                )))
            }
            (BackgroundKind::ComplexHyperbolicBall, d) if d >= 1 => {}
            (BackgroundKind::ComplexHyperbolicBall, _) => {
                return Err(FlowError::Parameter("dimension must be positive".into()))
            }
        }
        let n = dim as f64;
        let mut bg = Self {
            kind,
            dim,
            ric_sign: -1.0,
            torsion_bound: 0.0,
            // holomorphic sectional curvature -2/(n+1) is the most negative bisectional value
            bk_lower: -2.0 / (n + 1.0),
            exhaustion_bound: 0.0,
        };
        let reference = RadialGrid::new(4097, 40.0).expect("reference grid");
        bg.exhaustion_bound = bg.exhaustion_sup(&reference);
        Ok(bg)
    }

    pub fn poincare_disc() -> Self {
        Self::new(BackgroundKind::PoincareDisc, 1).expect("valid")
    }

    pub fn ball(dim: usize) -> Result<Self> {
        Self::new(BackgroundKind::ComplexHyperbolicBall, dim)
    }

    /// Test double that claims a different Einstein constant for the same metric.
    pub fn with_ric_sign(mut self, ric_sign: f64) -> Self {
        self.ric_sign = ric_sign;
        self
    }

    pub fn spherical_multiplicity(&self) -> f64 {
        (self.dim - 1) as f64
    }

    /// Euclidean eigenvalues `(radial, spherical)` of `h` at grid coordinate `x`.
    pub fn metric_eigen(&self, x: f64) -> (f64, f64) {
        let c2 = x.cosh().powi(2);
        let k = (self.dim + 1) as f64;
        (k * c2 * c2, k * c2)
    }

    /// `ρ(x) = sqrt(1 + x²)`.
    pub fn exhaustion(&self, x: f64) -> f64 {
        (1.0 + x * x).sqrt()
    }

    /// Certified bound K for `|∂ρ|²_h + |i∂∂̄ρ|_h`, measured on a dense reference grid.
    pub fn exhaustion_bound(&self) -> f64 {
        self.exhaustion_bound
    }

    /// Finite-difference sup of `|∂ρ|²_h + |i∂∂̄ρ|_h` over the grid.
    pub fn exhaustion_sup(&self, grid: &RadialGrid) -> f64 {
        let x = grid.nodes();
        let rho: Vec<f64> = x.iter().map(|&x| self.exhaustion(x)).collect();
        let k = 4.0 * (self.dim + 1) as f64;
        let rad = apply(grid, &rho, Component::Radial, Stencil::Central);
        let sph = apply(grid, &rho, Component::Spherical, Stencil::Central);
        let dx = grid.spacing();
        let m = self.spherical_multiplicity();
        (0..grid.n_nodes)
            .map(|i| {
                let slope = if i == 0 {
                    0.0
                } else if i + 1 == grid.n_nodes {
                    (rho[i] - rho[i - 1]) / dx
                } else {
                    (rho[i + 1] - rho[i - 1]) / (2.0 * dx)
                };
                let grad2 = slope * slope / k;
                let (r, s) = (rad[i] / k, sph[i] / k);
                grad2 + (r * r + m * s * s).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

/// Closed-form model metric. For the disc `r = |z|`; for the ball `r = ρ = |z|²`.
pub fn metric_profile(background: &Background, r: f64) -> Result<MetricCoefficient> {
    if !(0.0..1.0).contains(&r) {
        return Err(FlowError::Domain { value: r });
    }
    let k = (background.dim + 1) as f64;
    Ok(match background.kind {
        BackgroundKind::PoincareDisc => MetricCoefficient::Conformal(2.0 / (1.0 - r * r).powi(2)),
        BackgroundKind::ComplexHyperbolicBall => MetricCoefficient::Eigen {
            spherical: k / (1.0 - r),
            radial: k / (1.0 - r).powi(2),
        },
    })
}

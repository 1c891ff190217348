use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::flow::cutoff_eta;
use crate::grid::RadialGrid;

use super::{Background, EigenField};

/// Initial form `ω₀` relative to `θ₀`, parametrized by the exhaustion value ρ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Profile {
    /// `ω₀ = θ₀`
    Stationary,
    /// `ω₀ = 0`
    Degenerate,
    /// `ω₀ = c θ₀`
    Homogeneous(f64),
    /// `λ = 1` for `ρ ≤ inner`, smoothly zero for `ρ ≥ outer`.
    InteriorBump { inner: f64, outer: f64 },
    /// `λ = e^{-ρ}`
    TailDecay,
    /// `λ = 1/(1+ρ)`
    InverseLinear,
    /// `ω₀ = θ₀ + c·i∂∂̄|z|²`; closed in every dimension.
    PotentialIncrement(f64),
    /// Piecewise-linear `λ(ρ)` through `(ρ, λ)` pairs, constant outside.
    Table(Vec<[f64; 2]>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InitialData {
    pub profile: Profile,
}

impl InitialData {
    pub fn new(profile: Profile) -> Result<Self> {
        match &profile {
            Profile::InteriorBump { inner, outer } if !(inner < outer) => {
                return Err(FlowError::Parameter(format!(
                    "bump needs inner < outer, got {inner} >= {outer}"
                )))
            }
            Profile::Table(rows) => {
                if rows.is_empty() {
                    return Err(FlowError::Parameter("empty profile table".into()));
                }
                if rows.windows(2).any(|w| w[1][0] <= w[0][0]) {
                    return Err(FlowError::Parameter(
                        "profile table must be strictly increasing in rho".into(),
                    ));
                }
            }
            _ => {}
        }
        Ok(Self { profile })
    }

    /// Conformal factor `λ(ρ)`, or `None` for non-conformal profiles.
    pub fn lambda(&self, rho: f64) -> Option<f64> {
        Some(match &self.profile {
            Profile::Stationary => 1.0,
            Profile::Degenerate => 0.0,
            Profile::Homogeneous(c) => *c,
            Profile::InteriorBump { inner, outer } => {
                cutoff_eta(1.0 + (rho - inner) / (outer - inner))
            }
            Profile::TailDecay => (-rho).exp(),
            Profile::InverseLinear => 1.0 / (1.0 + rho),
            Profile::PotentialIncrement(_) => return None,
            Profile::Table(rows) => interpolate_table(rows, rho),
        })
    }

    /// Eigenvalue ratios of `ω₀` against `θ₀` at every node.
    pub fn ratios(&self, background: &Background, grid: &RadialGrid) -> EigenField {
        let x = grid.nodes();
        if let Profile::PotentialIncrement(c) = self.profile {
            let k = (background.dim + 1) as f64;
            let radial = x.iter().map(|x| 1.0 + c / (k * x.cosh().powi(4))).collect();
            let spherical = x.iter().map(|x| 1.0 + c / (k * x.cosh().powi(2))).collect();
            return EigenField { radial, spherical };
        }
        let lam: Vec<f64> = x
            .iter()
            .map(|&x| self.lambda(background.exhaustion(x)).expect("conformal"))
            .collect();
        EigenField {
            radial: lam.clone(),
            spherical: lam,
        }
    }

    /// Maximal coordinate intervals `[x_lo, x_hi]` of nodes where `ω₀ > 0`.
    pub fn support(&self, background: &Background, grid: &RadialGrid) -> Vec<(f64, f64)> {
        let r = self.ratios(background, grid);
        let x = grid.nodes();
        let mut out = Vec::new();
        let mut start: Option<usize> = None;
        for i in 0..grid.n_nodes {
            let positive = r.min_at(background.dim, i) > 0.0;
            match (positive, start) {
                (true, None) => start = Some(i),
                (false, Some(s)) => {
                    out.push((x[s], x[i - 1]));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((x[s], x[grid.n_nodes - 1]));
        }
        out
    }

    /// Whether `dω₀ = 0`. Conformal multiples of θ₀ are closed only in dimension one
    /// or when the factor is constant.
    pub fn is_closed(&self, background: &Background) -> bool {
        match self.profile {
            Profile::Stationary
            | Profile::Degenerate
            | Profile::Homogeneous(_)
            | Profile::PotentialIncrement(_) => true,
            _ => background.dim == 1,
        }
    }
}

fn interpolate_table(rows: &[[f64; 2]], rho: f64) -> f64 {
    if rho <= rows[0][0] {
        return rows[0][1];
    }
    for w in rows.windows(2) {
        let ([r0, l0], [r1, l1]) = (w[0], w[1]);
        if rho <= r1 {
            return l0 + (l1 - l0) * (rho - r0) / (r1 - r0);
        }
    }
    rows[rows.len() - 1][1]
}

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::grid::RadialGrid;
use crate::stencil::{apply, Component, Stencil};

use super::{Background, InitialData};

/// Bounded auxiliary potential `f` in the positivity condition.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum AuxPotential {
    #[default]
    Zero,
    /// `f = amplitude · exp(-x²/width²)`
    Bump { amplitude: f64, width: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisSpec {
    /// Horizon `s` of the positivity condition.
    pub s: f64,
    pub beta: f64,
    #[serde(default)]
    pub f: AuxPotential,
}

impl HypothesisSpec {
    pub fn new(s: f64, beta: f64, f: AuxPotential) -> Result<Self> {
        let spec = Self { s, beta, f };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(FlowError::Parameter(format!("s must be positive, got {}", self.s)));
        }
        if !(self.beta > 0.0) {
            return Err(FlowError::Parameter(format!(
                "beta must be positive, got {}",
                self.beta
            )));
        }
        if let AuxPotential::Bump { amplitude, width } = self.f {
            if !(amplitude.is_finite() && width > 0.0) {
                return Err(FlowError::Parameter("f bump needs finite amplitude and width > 0".into()));
            }
        }
        Ok(())
    }

    fn f_values(&self, grid: &RadialGrid) -> Option<Vec<f64>> {
        match self.f {
            AuxPotential::Zero => None,
            AuxPotential::Bump { amplitude, width } => Some(
                grid.nodes()
                    .iter()
                    .map(|x| amplitude * (-(x / width).powi(2)).exp())
                    .collect(),
            ),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
    NotApplicable,
}

/// Outcome of the standing-hypothesis checks. A failed hypothesis is reported here,
/// never raised as an error.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    /// Pointwise minimum over the grid of the smallest eigenvalue ratio of
    /// `-Ric(θ₀) + e^{-s}(ω₀ + Ric(θ₀)) + i∂∂̄f` against `θ₀`.
    pub min_ratio: f64,
    pub positivity_ok: bool,
    /// Largest eigenvalue ratio of `ω₀` against `θ₀`; `g₀ ≤ h` needs it ≤ 1.
    pub max_initial_ratio: f64,
    pub min_initial_ratio: f64,
    pub dominated_by_background: bool,
    /// Measured sup of `|∂ρ|²_h + |i∂∂̄ρ|_h` on the grid.
    pub exhaustion_sup: f64,
    pub exhaustion_bound: f64,
    pub bisectional_lower: f64,
    pub torsion_bound: f64,
    /// Measured sup of `|∇^h g₀|_h`.
    pub initial_gradient_sup: f64,
    pub pass: bool,
}

pub fn check_hypotheses(
    background: &Background,
    init: &InitialData,
    spec: &HypothesisSpec,
    grid: &RadialGrid,
) -> HypothesisReport {
    let dim = background.dim;
    let kappa = background.ric_sign;
    let decay = (-spec.s).exp();
    let lam = init.ratios(background, grid);
    let k = 4.0 * (dim + 1) as f64;

    let hess_f = spec.f_values(grid).map(|f| {
        (
            apply(grid, &f, Component::Radial, Stencil::Central),
            apply(grid, &f, Component::Spherical, Stencil::Central),
        )
    });

    let mut min_ratio = f64::INFINITY;
    for i in 0..grid.n_nodes {
        let (fr, fs) = match &hess_f {
            Some((r, s)) => (r[i] / k, s[i] / k),
            None => (0.0, 0.0),
        };
        let radial = -kappa + decay * (lam.radial[i] + kappa) + fr;
        let mut m = radial;
        if dim > 1 {
            m = m.min(-kappa + decay * (lam.spherical[i] + kappa) + fs);
        }
        min_ratio = min_ratio.min(m);
    }

    let (max_initial, min_initial) = (0..grid.n_nodes).fold((f64::MIN, f64::MAX), |(hi, lo), i| {
        let mut a = lam.radial[i];
        let mut b = lam.radial[i];
        if dim > 1 {
            a = a.max(lam.spherical[i]);
            b = b.min(lam.spherical[i]);
        }
        (hi.max(a), lo.min(b))
    });

    let dx = grid.spacing();
    let initial_gradient_sup = (1..grid.n_nodes - 1)
        .map(|i| {
            let d = (lam.radial[i + 1] - lam.radial[i - 1]) / (2.0 * dx);
            (dim as f64).sqrt() * d.abs() / k.sqrt()
        })
        .fold(0.0, f64::max);

    let positivity_ok = min_ratio >= spec.beta;
    let dominated = max_initial <= 1.0 && min_initial >= 0.0;
    let exhaustion_sup = background.exhaustion_sup(grid);
    HypothesisReport {
        min_ratio,
        positivity_ok,
        max_initial_ratio: max_initial,
        min_initial_ratio: min_initial,
        dominated_by_background: dominated,
        exhaustion_sup,
        exhaustion_bound: background.exhaustion_bound(),
        bisectional_lower: background.bk_lower,
        torsion_bound: background.torsion_bound,
        initial_gradient_sup,
        pass: positivity_ok && dominated && exhaustion_sup.is_finite() && initial_gradient_sup.is_finite(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GrowthReport {
    /// Sup of `tr_{g₀}h / ρ` over the last three dyadic windows in ρ, innermost first.
    pub window_sups: Vec<f64>,
    /// Aitken extrapolation of the window sups.
    pub limit_estimate: f64,
    pub verdict: Verdict,
}

/// Relative size of the extrapolated tail limit that still counts as zero.
pub const GROWTH_LIMIT_TOL: f64 = 0.1;

/// Tail test for `tr_{g₀}h = o(ρ)`.
///
/// Passes when the window sups decrease and their Aitken extrapolation is
/// negligible against the outermost window.
pub fn tr_growth_check(init: &InitialData, background: &Background, grid: &RadialGrid) -> GrowthReport {
    let dim = background.dim;
    let lam = init.ratios(background, grid);
    let x = grid.nodes();
    let rho: Vec<f64> = x.iter().map(|&x| background.exhaustion(x)).collect();
    let rho_max = rho[grid.n_nodes - 1];
    let windows = [
        (rho_max / 8.0, rho_max / 4.0),
        (rho_max / 4.0, rho_max / 2.0),
        (rho_max / 2.0, rho_max),
    ];
    let mut sups = Vec::with_capacity(3);
    for (lo, hi) in windows {
        let mut sup = f64::NEG_INFINITY;
        for i in (0..grid.n_nodes).filter(|&i| rho[i] >= lo && rho[i] <= hi) {
            if lam.min_at(dim, i) <= 0.0 {
                return GrowthReport {
                    window_sups: sups,
                    limit_estimate: f64::NAN,
                    verdict: Verdict::NotApplicable,
                };
            }
            let mut tr = 1.0 / lam.radial[i];
            if dim > 1 {
                tr += (dim - 1) as f64 / lam.spherical[i];
            }
            sup = sup.max(tr / rho[i]);
        }
        sups.push(sup);
    }
    let (a, b, c) = (sups[0], sups[1], sups[2]);
    let denom = a + c - 2.0 * b;
    let limit = if denom.abs() > f64::EPSILON * a.abs() {
        (a * c - b * b) / denom
    } else {
        c
    };
    let decreasing = b < a && c < b;
    let verdict = if decreasing && limit.abs() <= GROWTH_LIMIT_TOL * c {
        Verdict::Pass
    } else {
        Verdict::Fail
    };
    GrowthReport {
        window_sups: sups,
        limit_estimate: limit,
        verdict,
    }
}

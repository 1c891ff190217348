use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::geometry::{Background, EigenField, InitialData};
use crate::grid::RadialGrid;
use crate::stencil::{apply, Component, FluxWeights, Stencil};

use super::cutoff_eta;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SchemeConfig {
    /// First step size; the ramp grows geometrically from here.
    pub t_min: f64,
    pub ratio: f64,
    pub dt_max: f64,
    pub newton_tol: f64,
    pub max_newton_iters: usize,
    pub positivity_floor: f64,
    pub max_halvings: usize,
}

impl Default for SchemeConfig {
    fn default() -> Self {
        Self {
            t_min: 1e-4,
            ratio: 1.5,
            dt_max: 0.05,
            newton_tol: 1e-10,
            max_newton_iters: 50,
            positivity_floor: 1e-12,
            max_halvings: 40,
        }
    }
}

impl SchemeConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |what: &str| Err(FlowError::Parameter(what.to_string()));
        if !(self.t_min > 0.0) {
            return bad("t_min must be positive");
        }
        if !(self.ratio > 1.0) {
            return bad("ratio must exceed 1");
        }
        if !(self.dt_max >= self.t_min) {
            return bad("dt_max must be at least t_min");
        }
        if !(self.newton_tol > 0.0 && self.positivity_floor > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.max_newton_iters == 0 {
            return bad("max_newton_iters must be positive");
        }
        Ok(())
    }

    /// Same policy with every step size halved: `dt(t) = min((ratio - 1) t, dt_max)`
    /// becomes half of itself at every `t`, including on the geometric part.
    pub fn halved(&self) -> Self {
        Self {
            t_min: 0.5 * self.t_min,
            ratio: 1.0 + 0.5 * (self.ratio - 1.0),
            dt_max: 0.5 * self.dt_max,
            ..self.clone()
        }
    }

    /// Next time on the geometric ramp `t → min(t·ratio, t + dt_max)`.
    pub fn next_time(&self, t: f64) -> f64 {
        if t <= 0.0 {
            self.t_min
        } else {
            (t * self.ratio).min(t + self.dt_max)
        }
    }
}

/// Regularization level ε and cutoff radius ρ₀ of `γ₀ = η₀ω₀ + (1-η₀)θ₀ + εθ₀`.
/// Without a cutoff `γ₀ = ω₀ + εθ₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct Regularization {
    #[serde(default)]
    pub eps: f64,
    #[serde(default)]
    pub rho0: Option<f64>,
}

/// Which potential flow a state belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Frame {
    /// `u̇ = log((α + i∂∂̄u)ⁿ/θ₀ⁿ) - u`
    #[default]
    Normalized,
    /// `φ̇ = log((ω₀ - sRic(θ₀) + i∂∂̄φ)ⁿ/θ₀ⁿ)`
    Unnormalized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    /// Flow time (`s` in the unnormalized frame).
    pub t: f64,
    pub u: Vec<f64>,
    pub udot: Vec<f64>,
    /// Eigenvalue ratios of the evolving form against θ₀.
    pub metric_ratio: EigenField,
    pub eps: f64,
    pub rho0: Option<f64>,
}

/// Per-node coefficient of `γ₀` relative to θ₀.
pub fn regularize_initial(
    init: &InitialData,
    reg: Regularization,
    background: &Background,
    grid: &RadialGrid,
) -> Result<EigenField> {
    if !(reg.eps >= 0.0) {
        return Err(FlowError::Parameter(format!("eps must be nonnegative, got {}", reg.eps)));
    }
    if let Some(r0) = reg.rho0 {
        if !(r0 >= 1.0) {
            return Err(FlowError::Parameter(format!("rho0 must be at least 1, got {r0}")));
        }
    }
    let lam = init.ratios(background, grid);
    let eta: Vec<f64> = grid
        .nodes()
        .iter()
        .map(|&x| match reg.rho0 {
            Some(r0) => cutoff_eta(background.exhaustion(x) / r0),
            None => 1.0,
        })
        .collect();
    let blend = |l: &[f64]| -> Vec<f64> {
        l.iter()
            .zip(&eta)
            .map(|(l, e)| e * l + (1.0 - e) + reg.eps)
            .collect()
    };
    Ok(EigenField {
        radial: blend(&lam.radial),
        spherical: blend(&lam.spherical),
    })
}

/// `α/θ₀ = -κ(1 - e^{-t}) + e^{-t}γ₀` for `Ric(θ₀) = κθ₀`.
pub fn build_alpha(t: f64, gamma0: &EigenField, background: &Background) -> EigenField {
    let decay = (-t).exp();
    let grown = -(-t).exp_m1();
    let kappa = background.ric_sign;
    gamma0.map(|g| -kappa * grown + decay * g)
}

/// `h^{11̄}∂∂̄u` of a radial function: the radial eigenvalue ratio of `i∂∂̄u` against θ₀.
pub fn chern_laplacian_radial(u: &[f64], grid: &RadialGrid, background: &Background) -> Result<Vec<f64>> {
    if grid.n_nodes < 4 {
        return Err(FlowError::GridSize {
            min: 4,
            got: grid.n_nodes,
        });
    }
    let k = 4.0 * (background.dim + 1) as f64;
    Ok(apply(grid, u, Component::Radial, Stencil::Central)
        .into_iter()
        .map(|p| p / k)
        .collect())
}

/// Both eigenvalue ratios of `i∂∂̄u` against θ₀.
pub fn hessian_ratios(u: &[f64], grid: &RadialGrid, background: &Background, stencil: Stencil) -> EigenField {
    let k = 4.0 * (background.dim + 1) as f64;
    let scale = |v: Vec<f64>| v.into_iter().map(|p| p / k).collect();
    EigenField {
        radial: scale(apply(grid, u, Component::Radial, stencil)),
        spherical: scale(apply(grid, u, Component::Spherical, stencil)),
    }
}

/// Per-node `log((α + i∂∂̄u)ⁿ/θ₀ⁿ)` with the scheme's monotone stencil. The last
/// node is the truncation boundary, where `i∂∂̄u` is dropped.
pub fn ma_log_ratio(
    u: &[f64],
    alpha: &EigenField,
    background: &Background,
    grid: &RadialGrid,
) -> Result<Vec<f64>> {
    let ops = Operators::new(grid, background);
    let ratios = ops.metric_ratio(u, alpha);
    let (node, min) = ratios.min_with_node(background.dim);
    if !(min > 0.0) {
        return Err(FlowError::Positivity { node, value: min });
    }
    Ok((0..grid.n_nodes).map(|i| ratios.log_det(background.dim, i)).collect())
}

/// Monotone discrete Hessian of the scheme, scaled to ratios against θ₀.
#[derive(Debug, Clone)]
pub(crate) struct Operators {
    pub radial: FluxWeights,
    pub spherical: FluxWeights,
    pub dim: usize,
    scale: f64,
}

impl Operators {
    pub fn new(grid: &RadialGrid, background: &Background) -> Self {
        let scale = 1.0 / (4.0 * (background.dim + 1) as f64);
        let mut radial = FluxWeights::new(grid, Component::Radial, Stencil::Monotone);
        let mut spherical = FluxWeights::new(grid, Component::Spherical, Stencil::Monotone);
        for w in [&mut radial, &mut spherical] {
            w.lower.iter_mut().chain(w.upper.iter_mut()).for_each(|c| *c *= scale);
        }
        Self {
            radial,
            spherical,
            dim: background.dim,
            scale,
        }
    }

    fn rows(&self) -> usize {
        self.radial.upper.len()
    }

    pub fn metric_ratio(&self, u: &[f64], alpha: &EigenField) -> EigenField {
        let rows = self.rows();
        let mut out = alpha.clone();
        for i in 0..rows {
            out.radial[i] += self.radial.row(u, i);
            out.spherical[i] += self.spherical.row(u, i);
        }
        out
    }

    /// Chern Laplacian of the metric with the given ratios, as tridiagonal
    /// `(sub, diag, sup)` on rows `0..n-1`.
    pub fn laplacian(&self, ratio: &EigenField) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let rows = self.rows();
        let m = (self.dim - 1) as f64;
        let mut sub = vec![0.0; rows];
        let mut diag = vec![0.0; rows];
        let mut sup = vec![0.0; rows];
        for i in 0..rows {
            let wr = 1.0 / ratio.radial[i];
            let mut lo = wr * self.radial.lower[i];
            let mut hi = wr * self.radial.upper[i];
            if self.dim > 1 {
                let ws = m / ratio.spherical[i];
                lo += ws * self.spherical.lower[i];
                hi += ws * self.spherical.upper[i];
            }
            if i > 0 {
                sub[i] = lo;
            }
            sup[i] = hi;
            diag[i] = -(lo + hi);
        }
        (sub, diag, sup)
    }

    #[allow(dead_code)]
    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// `Δ_g v` on rows `0..n-1` for the metric with the given ratios.
    pub fn apply_laplacian(&self, ratio: &EigenField, v: &[f64]) -> Vec<f64> {
        let (sub, diag, sup) = self.laplacian(ratio);
        (0..diag.len())
            .map(|i| {
                let below = if i > 0 { sub[i] * v[i - 1] } else { 0.0 };
                below + diag[i] * v[i] + sup[i] * v[i + 1]
            })
            .collect()
    }
}

/// Static data of one regularized flow: background, grid and `γ₀`.
#[derive(Debug, Clone)]
pub struct FlowProblem {
    pub background: Background,
    pub grid: RadialGrid,
    pub gamma0: EigenField,
    pub reg: Regularization,
    pub frame: Frame,
    ops: Operators,
}

/// Newton bookkeeping of one accepted step.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub newton_iters: usize,
    pub residual: f64,
}

impl FlowProblem {
    pub fn new(
        background: Background,
        grid: RadialGrid,
        init: &InitialData,
        reg: Regularization,
        frame: Frame,
    ) -> Result<Self> {
        let gamma0 = regularize_initial(init, reg, &background, &grid)?;
        Ok(Self::from_gamma(background, grid, gamma0, reg, frame))
    }

    pub fn from_gamma(
        background: Background,
        grid: RadialGrid,
        gamma0: EigenField,
        reg: Regularization,
        frame: Frame,
    ) -> Self {
        let ops = Operators::new(&grid, &background);
        Self {
            background,
            grid,
            gamma0,
            reg,
            frame,
            ops,
        }
    }

    /// Reference form of the frame: α(t), or `ω₀ - sRic(θ₀)`.
    pub fn alpha(&self, t: f64) -> EigenField {
        match self.frame {
            Frame::Normalized => build_alpha(t, &self.gamma0, &self.background),
            Frame::Unnormalized => {
                let kappa = self.background.ric_sign;
                self.gamma0.map(|g| g - kappa * t)
            }
        }
    }

    fn decay(&self) -> f64 {
        match self.frame {
            Frame::Normalized => 1.0,
            Frame::Unnormalized => 0.0,
        }
    }

    /// State at `t = 0`: zero potential and metric `γ₀`.
    pub fn initial_state(&self) -> FlowState {
        let n = self.grid.n_nodes;
        let dim = self.background.dim;
        let udot = (0..n).map(|i| self.gamma0.log_det(dim, i)).collect();
        FlowState {
            t: 0.0,
            u: vec![0.0; n],
            udot,
            metric_ratio: self.gamma0.clone(),
            eps: self.reg.eps,
            rho0: self.reg.rho0,
        }
    }

    /// Metric ratio of a potential at time `t`.
    pub fn metric_ratio(&self, t: f64, u: &[f64]) -> EigenField {
        self.ops.metric_ratio(u, &self.alpha(t))
    }

    /// Chern Laplacian of `g` at a state, in the scheme's monotone discretization.
    pub fn linearized_laplacian(&self, state: &FlowState) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        self.ops.laplacian(&state.metric_ratio)
    }

    /// Newton Jacobian of the backward-Euler residual at `u` for step `dt`.
    pub fn jacobian(&self, ratio: &EigenField, dt: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let (mut sub, mut diag, mut sup) = self.ops.laplacian(ratio);
        let d = 1.0 + dt * self.decay();
        for i in 0..diag.len() {
            sub[i] *= -dt;
            sup[i] *= -dt;
            diag[i] = d - dt * diag[i];
        }
        (sub, diag, sup)
    }

    fn residual(&self, u: &[f64], old: &[f64], ratio: &EigenField, dt: f64) -> Vec<f64> {
        let dim = self.background.dim;
        let decay = self.decay();
        (0..self.grid.n_nodes - 1)
            .map(|i| u[i] - old[i] - dt * (ratio.log_det(dim, i) - decay * u[i]))
            .collect()
    }

    fn positive(&self, ratio: &EigenField, floor: f64) -> std::result::Result<(), (usize, f64)> {
        let (node, min) = ratio.min_with_node(self.background.dim);
        if min > floor {
            Ok(())
        } else {
            Err((node, min))
        }
    }

    /// One backward-Euler step solved by damped Newton.
    pub fn step(&self, state: &FlowState, dt: f64, config: &SchemeConfig) -> Result<(FlowState, StepRecord)> {
        if !(dt > 0.0) {
            return Err(FlowError::Parameter(format!("dt must be positive, got {dt}")));
        }
        let n = self.grid.n_nodes;
        let dim = self.background.dim;
        let t_new = state.t + dt;
        let alpha = self.alpha(t_new);
        let decay = self.decay();
        let sup_norm = |r: &[f64]| r.iter().fold(0.0f64, |m, v| m.max(v.abs()));

        let mut u = state.u.clone();
        // truncation node follows the homogeneous tail equation
        let tail = (dim as f64 - 1.0) * alpha.spherical[n - 1].ln() * (dim > 1) as u8 as f64
            + alpha.radial[n - 1].ln();
        let shift = (state.u[n - 1] + dt * tail) / (1.0 + dt * decay) - state.u[n - 1];
        // shifting everything keeps i∂∂̄u of the first guess intact
        u.iter_mut().for_each(|v| *v += shift);

        let mut ratio = self.ops.metric_ratio(&u, &alpha);
        if let Err((node, value)) = self.positive(&ratio, config.positivity_floor) {
            return Err(FlowError::Positivity { node, value });
        }
        let mut res = self.residual(&u, &state.u, &ratio, dt);
        let mut norm = sup_norm(&res);
        let mut iters = 0;
        while norm > config.newton_tol {
            if iters == config.max_newton_iters {
                return Err(FlowError::StepFailure {
                    t: t_new,
                    residual: norm,
                    iterations: iters,
                });
            }
            iters += 1;
            let (sub, diag, sup) = self.jacobian(&ratio, dt);
            let mut delta: Vec<f64> = res.iter().map(|r| -r).collect();
            crate::stencil::solve_tridiagonal(&sub, &diag, &sup, &mut delta);

            let mut lambda = 1.0;
            let mut accepted = false;
            let mut last_violation = None;
            for _ in 0..=config.max_halvings {
                let mut cand = u.clone();
                for (c, d) in cand.iter_mut().zip(&delta) {
                    *c += lambda * d;
                }
                let cand_ratio = self.ops.metric_ratio(&cand, &alpha);
                match self.positive(&cand_ratio, config.positivity_floor) {
                    Err(v) => last_violation = Some(v),
                    Ok(()) => {
                        let cand_res = self.residual(&cand, &state.u, &cand_ratio, dt);
                        let cand_norm = sup_norm(&cand_res);
                        if cand_norm < norm || cand_norm <= config.newton_tol {
                            u = cand;
                            ratio = cand_ratio;
                            res = cand_res;
                            norm = cand_norm;
                            accepted = true;
                            break;
                        }
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                return Err(match last_violation {
                    Some((node, value)) => FlowError::Positivity { node, value },
                    None => FlowError::StepFailure {
                        t: t_new,
                        residual: norm,
                        iterations: iters,
                    },
                });
            }
        }

        let udot = (0..n).map(|i| ratio.log_det(dim, i) - decay * u[i]).collect();
        Ok((
            FlowState {
                t: t_new,
                u,
                udot,
                metric_ratio: ratio,
                eps: state.eps,
                rho0: state.rho0,
            },
            StepRecord {
                t: t_new,
                dt,
                newton_iters: iters,
                residual: norm,
            },
        ))
    }
}

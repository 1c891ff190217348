//! Reparametrization between the normalized flow in `t` and the unnormalized
//! flow in `s = e^t - 1`.
//!
//! With `g̃(s) = (1 + s) g(t)` the potentials are related by
//! `φ = e^t u + n(t e^t - e^t + 1)` and `φ̇ = u̇ + u + n t`.

use crate::error::{FlowError, Result};

use super::run::Trajectory;
use super::scheme::{FlowProblem, FlowState, Frame, SchemeConfig, StepRecord};

fn shift(t: f64, dim: usize) -> f64 {
    dim as f64 * (t * t.exp() - t.exp_m1())
}

pub fn state_to_unnormalized(state: &FlowState, dim: usize) -> FlowState {
    let t = state.t;
    let s = t.exp_m1();
    // `1 + s` rather than `e^t`: the inverse sees the same double, so dividing
    // it back out is within an ulp
    let scale = 1.0 + s;
    let c = shift(t, dim);
    let n = dim as f64;
    FlowState {
        t: s,
        u: state.u.iter().map(|u| scale * u + c).collect(),
        udot: state
            .udot
            .iter()
            .zip(&state.u)
            .map(|(ud, u)| ud + u + n * t)
            .collect(),
        metric_ratio: state.metric_ratio.map(|a| a * scale),
        eps: state.eps,
        rho0: state.rho0,
    }
}

pub fn state_from_unnormalized(state: &FlowState, dim: usize) -> FlowState {
    let t = state.t.ln_1p();
    let scale = 1.0 + state.t;
    let c = shift(t, dim);
    let n = dim as f64;
    let u: Vec<f64> = state.u.iter().map(|phi| (phi - c) / scale).collect();
    FlowState {
        t,
        udot: state
            .udot
            .iter()
            .zip(&u)
            .map(|(pd, u)| pd - u - n * t)
            .collect(),
        u,
        metric_ratio: state.metric_ratio.map(|a| a / scale),
        eps: state.eps,
        rho0: state.rho0,
    }
}

pub fn to_unnormalized(traj: &Trajectory) -> Result<Trajectory> {
    if traj.frame != Frame::Normalized {
        return Err(FlowError::Parameter("trajectory is already unnormalized".into()));
    }
    let dim = traj.background.dim;
    Ok(Trajectory {
        frame: Frame::Unnormalized,
        states: traj.states.iter().map(|s| state_to_unnormalized(s, dim)).collect(),
        steps: traj
            .steps
            .iter()
            .map(|r| StepRecord {
                t: r.t.exp_m1(),
                dt: r.t.exp_m1() - (r.t - r.dt).exp_m1(),
                ..*r
            })
            .collect(),
        ..traj.clone()
    })
}

pub fn from_unnormalized(traj: &Trajectory) -> Result<Trajectory> {
    if traj.frame != Frame::Unnormalized {
        return Err(FlowError::Parameter("trajectory is already normalized".into()));
    }
    let dim = traj.background.dim;
    Ok(Trajectory {
        frame: Frame::Normalized,
        states: traj.states.iter().map(|s| state_from_unnormalized(s, dim)).collect(),
        steps: traj
            .steps
            .iter()
            .map(|r| StepRecord {
                t: r.t.ln_1p(),
                dt: r.t.ln_1p() - (r.t - r.dt).ln_1p(),
                ..*r
            })
            .collect(),
        ..traj.clone()
    })
}

/// One backward-Euler step of `φ̇ = log((ω₀ - sRic(θ₀) + i∂∂̄φ)ⁿ/θ₀ⁿ)`.
pub fn step_unnormalized(
    problem: &FlowProblem,
    state: &FlowState,
    ds: f64,
    config: &SchemeConfig,
) -> Result<(FlowState, StepRecord)> {
    if problem.frame != Frame::Unnormalized {
        return Err(FlowError::Parameter("problem is set up in the normalized frame".into()));
    }
    problem.step(state, ds, config)
}

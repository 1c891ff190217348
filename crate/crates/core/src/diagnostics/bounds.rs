use crate::error::{FlowError, Result};
use crate::flow::{FlowState, Trajectory};
use crate::geometry::HypothesisSpec;

use super::{BoundReport, Extremum};

fn node_sup(state: &FlowState, f: impl Fn(usize) -> f64) -> f64 {
    (0..state.u.len()).map(f).fold(f64::NEG_INFINITY, f64::max)
}

fn node_inf(state: &FlowState, f: impl Fn(usize) -> f64) -> f64 {
    (0..state.u.len()).map(f).fold(f64::INFINITY, f64::min)
}

fn positive_times(traj: &Trajectory) -> impl Iterator<Item = &FlowState> {
    traj.states.iter().filter(|s| s.t > 0.0)
}

/// `sup u / min{t, 1}` and `sup u̇ (e^t - 1)/t` over checkpoints with `t > 0`.
pub fn upper_bounds(traj: &Trajectory) -> Vec<BoundReport> {
    let mut potential = Vec::new();
    let mut velocity = Vec::new();
    for s in positive_times(traj) {
        let w = s.t.min(1.0);
        let growth = s.t.exp_m1() / s.t;
        potential.push([s.t, node_sup(s, |i| s.u[i] / w)]);
        velocity.push([s.t, node_sup(s, |i| s.udot[i] * growth)]);
    }
    vec![
        BoundReport::from_trace("upper_bounds.u", Extremum::Sup, potential, None),
        BoundReport::from_trace("upper_bounds.udot", Extremum::Sup, velocity, None),
    ]
}

/// Envelope `inf (u - n t log(1 - e^{-t}))(1 - e^{-s})/t` and, for
/// `t ≤ min{1, s₁}`, the small-time functional `inf (u̇ + u - n log t)`.
pub fn lower_bounds(traj: &Trajectory, spec: &HypothesisSpec, s1: f64) -> Result<Vec<BoundReport>> {
    if !(s1 > 0.0 && s1 < spec.s) {
        return Err(FlowError::Parameter(format!("need 0 < s1 < s, got s1 = {s1}, s = {}", spec.s)));
    }
    let n = traj.background.dim as f64;
    let margin = -(-spec.s).exp_m1();
    let mut envelope = Vec::new();
    let mut small = Vec::new();
    for s in positive_times(traj) {
        let t = s.t;
        let shift = n * t * (-(-t).exp_m1()).ln();
        envelope.push([t, node_inf(s, |i| (s.u[i] - shift) * margin / t)]);
        if t <= s1.min(1.0) {
            small.push([t, node_inf(s, |i| s.udot[i] + s.u[i] - n * t.ln())]);
        }
    }
    Ok(vec![
        BoundReport::from_trace("lower_bounds.envelope", Extremum::Inf, envelope, None),
        BoundReport::from_trace("lower_bounds.small_time", Extremum::Inf, small, None),
    ])
}

/// `E(s, s₁) = (1 + s₁e^{s₁-s}) / ((1 - e^{-s})(1 - e^{s₁-s}))`.
pub fn trace_constant(s: f64, s1: f64) -> Result<f64> {
    if !(s1 > 0.0 && s1 < s) {
        return Err(FlowError::Parameter(format!("need 0 < s1 < s, got s1 = {s1}, s = {s}")));
    }
    let gap = (s1 - s).exp();
    Ok((1.0 + s1 * gap) / (-(-s).exp_m1() * -(s1 - s).exp_m1()))
}

/// `sup (1 - e^{-t}) log tr_h g / (E - log(1 - e^{-s}))` over `0 < t ≤ s₁`.
pub fn trace_bound(traj: &Trajectory, s: f64, s1: f64) -> Result<BoundReport> {
    let e = trace_constant(s, s1)?;
    let denom = e - (-(-s).exp_m1()).ln();
    let dim = traj.background.dim;
    let trace = positive_times(traj)
        .filter(|st| st.t <= s1)
        .map(|st| {
            let grown = -(-st.t).exp_m1();
            let v = node_sup(st, |i| grown * st.metric_ratio.trace(dim, i).ln() / denom);
            [st.t, v]
        })
        .collect();
    Ok(BoundReport::from_trace("trace_bound", Extremum::Sup, trace, None))
}

/// `max max(ratio, 1/ratio)` over checkpoints in `[s0, s1]` and both eigen-ratios.
pub fn uniform_equivalence(traj: &Trajectory, s0: f64, s1: f64) -> Result<BoundReport> {
    if !(s0 > 0.0 && s0 < s1) {
        return Err(FlowError::Parameter(format!("need 0 < s0 < s1, got [{s0}, {s1}]")));
    }
    let dim = traj.background.dim;
    let trace = traj
        .states
        .iter()
        .filter(|st| st.t >= s0 && st.t <= s1)
        .map(|st| {
            let r = &st.metric_ratio;
            let v = node_sup(st, |i| {
                let mut c = r.radial[i].max(1.0 / r.radial[i]);
                if dim > 1 {
                    c = c.max(r.spherical[i].max(1.0 / r.spherical[i]));
                }
                c
            });
            [st.t, v]
        })
        .collect();
    Ok(BoundReport::from_trace("uniform_equivalence", Extremum::Sup, trace, None))
}

/// `sup max(0, -u̇) e^{t/2}` over `t ≥ 2`; passes when finite and non-increasing
/// over the last dyadic window `[T/2, T]`.
pub fn udot_lower_longtime(traj: &Trajectory) -> Result<BoundReport> {
    let horizon = traj.last().t;
    if horizon < 6.0 {
        return Err(FlowError::Parameter(format!("trajectory must reach t = 6, ends at {horizon}")));
    }
    let trace: Vec<[f64; 2]> = traj
        .states
        .iter()
        .filter(|s| s.t >= 2.0)
        .map(|s| [s.t, node_sup(s, |i| (-s.udot[i]).max(0.0)) * (0.5 * s.t).exp()])
        .collect();
    let tail: Vec<f64> = trace.iter().filter(|p| p[0] >= 0.5 * horizon).map(|p| p[1]).collect();
    let settled = tail.windows(2).all(|w| w[1] <= w[0] * (1.0 + 1e-9) + 1e-14);
    let mut report = BoundReport::from_trace("udot_lower_longtime", Extremum::Sup, trace, None);
    report.pass &= settled;
    Ok(report)
}

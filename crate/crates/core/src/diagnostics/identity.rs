use crate::error::{FlowError, Result};
use crate::flow::{Frame, Operators, Trajectory};

use super::{BoundReport, Extremum};

/// Residual of `(∂_t - Δ_g)(u̇ + u) = -tr_g Ric(θ₀) - n` between consecutive
/// recorded states: backward difference in time, the scheme's Chern Laplacian
/// in space, sup over interior nodes.
pub fn identity_residual(traj: &Trajectory) -> Result<BoundReport> {
    if traj.states.len() < 3 {
        return Err(FlowError::Resolution {
            needed: 3,
            got: traj.states.len(),
        });
    }
    if traj.frame != Frame::Normalized {
        return Err(FlowError::Parameter("the evolution identity is stated for the normalized flow".into()));
    }
    let bg = &traj.background;
    let grid = &traj.grid;
    let ops = Operators::new(grid, bg);
    let n = bg.dim as f64;
    let m = bg.spherical_multiplicity();
    let kappa = bg.ric_sign;
    let w = |k: usize| -> Vec<f64> {
        let s = &traj.states[k];
        s.udot.iter().zip(&s.u).map(|(a, b)| a + b).collect()
    };
    let mut trace = Vec::with_capacity(traj.states.len() - 1);
    let mut prev = w(0);
    for k in 1..traj.states.len() {
        let s = &traj.states[k];
        let cur = w(k);
        let dt = s.t - traj.states[k - 1].t;
        let lap = ops.apply_laplacian(&s.metric_ratio, &cur);
        let r = &s.metric_ratio;
        let sup = grid
            .interior()
            .map(|i| {
                let tr_ric = kappa * (1.0 / r.radial[i] + if bg.dim > 1 { m / r.spherical[i] } else { 0.0 });
                ((cur[i] - prev[i]) / dt - lap[i] + tr_ric + n).abs()
            })
            .fold(0.0, f64::max);
        trace.push([s.t, sup]);
        prev = cur;
    }
    Ok(BoundReport::from_trace("identity_residual", Extremum::Sup, trace, None))
}

/// Observed order `log₂(coarse / fine)` of two residual sups.
pub fn identity_order(coarse: &BoundReport, fine: &BoundReport) -> f64 {
    (coarse.sup_or_inf / fine.sup_or_inf).log2()
}

use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::flow::{FlowProblem, FlowState};
use crate::geometry::Verdict;
use crate::stencil::solve_tridiagonal;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonOutcome {
    pub verdict: Verdict,
    /// Largest value of `f` seen over all steps (interior rows).
    pub max_f: f64,
}

/// Roundoff allowance of the comparison test.
pub const COMPARISON_TOL: f64 = 1e-12;

/// Backward-Euler evolution of `(∂_t - Δ_g)f = F` with `g` frozen at `state`,
/// homogeneous Dirichlet data at the truncation node.
///
/// Not applicable unless `f(0) ≤ 0` and `F ≤ 0`; then passes iff `f` never
/// exceeds the roundoff allowance.
pub fn comparison_test(
    problem: &FlowProblem,
    state: &FlowState,
    f0: &[f64],
    forcing: &[f64],
    dt: f64,
    steps: usize,
) -> Result<ComparisonOutcome> {
    let n = problem.grid.n_nodes;
    if f0.len() != n || forcing.len() != n {
        return Err(FlowError::Parameter(format!("profiles must have {n} entries")));
    }
    if !(dt > 0.0) {
        return Err(FlowError::Parameter(format!("dt must be positive, got {dt}")));
    }
    let rows = n - 1;
    if f0[..rows].iter().chain(&forcing[..rows]).any(|&v| v > 0.0) {
        return Ok(ComparisonOutcome {
            verdict: Verdict::NotApplicable,
            max_f: f0.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v)),
        });
    }
    let (mut sub, mut diag, mut sup) = problem.linearized_laplacian(state);
    for i in 0..rows {
        sub[i] *= -dt;
        sup[i] *= -dt;
        diag[i] = 1.0 - dt * diag[i];
    }
    let mut f = f0[..rows].to_vec();
    let mut max_f = f.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
    for _ in 0..steps {
        for (v, q) in f.iter_mut().zip(forcing) {
            *v += dt * q;
        }
        solve_tridiagonal(&sub, &diag, &sup, &mut f);
        max_f = f.iter().fold(max_f, |m, &v| m.max(v));
    }
    Ok(ComparisonOutcome {
        verdict: if max_f <= COMPARISON_TOL { Verdict::Pass } else { Verdict::Fail },
        max_f,
    })
}

/// Exact sign check of the Newton Jacobian at `state`: nonpositive
/// off-diagonals and weak diagonal dominance.
pub fn m_matrix_check(problem: &FlowProblem, state: &FlowState, dt: f64) -> bool {
    let (sub, diag, sup) = problem.jacobian(&state.metric_ratio, dt);
    let last = diag.len() - 1;
    (0..diag.len()).all(|i| {
        let lo = if i > 0 { sub[i] } else { 0.0 };
        let hi = sup[i];
        let off = lo.abs() + if i < last { hi.abs() } else { 0.0 };
        lo <= 0.0 && hi <= 0.0 && diag[i] >= off
    })
}

//! Regularization ladders in `(ε, ρ̂_max)`, their diagonal limit and the
//! ε-uniformity verdicts.

mod interp;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::diagnostics::{
    completeness, lower_bounds, trace_bound, uniform_equivalence, uniformity_gate, upper_bounds, BoundReport,
    CompletenessReport, UniformityVerdict, UNIFORMITY_FACTOR,
};
use crate::error::{FlowError, Result};
use crate::flow::{run, RunSpec, Trajectory};
use crate::geometry::{check_hypotheses, HypothesisSpec};
use crate::grid::RadialGrid;

pub use interp::cubic_interpolate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LadderConfig {
    /// Decreasing regularization levels; the first is the uniformity reference.
    pub eps: Vec<f64>,
    /// Increasing truncation radii. The grid spacing of the base run is kept.
    pub rho_hat_max: Vec<f64>,
    /// Cutoff radii per truncation radius; `None` ties ρ₀ to `rho0_fraction · ρ̂_max`.
    pub rho0: Option<Vec<f64>>,
    pub rho0_fraction: f64,
    /// Times compared by the diagonal limit; empty compares every common time ≥ t_min.
    pub checkpoints: Vec<f64>,
    /// Comparison window in the grid coordinate.
    pub window: [f64; 2],
    pub cauchy_tol: f64,
    pub contraction: f64,
    /// Horizon `s` of the bound functionals.
    pub s: f64,
    /// Small-time window `s₁` of the lower and trace bounds.
    pub s1: f64,
    /// Window `[s₀, s₁]` of uniform equivalence.
    pub equivalence_window: [f64; 2],
    /// Time of the completeness slope and its required lower bound.
    pub completeness_t: f64,
    pub completeness_kappa: f64,
    pub uniformity_factor: f64,
}

impl Default for LadderConfig {
    fn default() -> Self {
        Self {
            eps: vec![1e-1, 1e-2, 1e-3],
            rho_hat_max: vec![10.0, 20.0, 40.0],
            rho0: None,
            rho0_fraction: 0.25,
            checkpoints: Vec::new(),
            window: [0.0, 1.0],
            cauchy_tol: 1e-3,
            contraction: 2.0,
            s: 1.0,
            s1: 0.5,
            equivalence_window: [0.1, 1.0],
            completeness_t: 0.1,
            completeness_kappa: 0.25,
            uniformity_factor: UNIFORMITY_FACTOR,
        }
    }
}

impl LadderConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(FlowError::Parameter(m));
        if self.eps.is_empty() || self.rho_hat_max.is_empty() {
            return bad("ladder schedules must be nonempty".into());
        }
        if self.eps.iter().any(|&e| !(e > 0.0)) || self.eps.windows(2).any(|w| w[1] >= w[0]) {
            return bad(format!("eps schedule must be positive and decreasing: {:?}", self.eps));
        }
        if self.rho_hat_max.windows(2).any(|w| w[1] <= w[0]) {
            return bad(format!("rho_hat_max schedule must increase: {:?}", self.rho_hat_max));
        }
        if let Some(r) = &self.rho0 {
            if r.len() != self.rho_hat_max.len() || r.iter().any(|&v| !(v >= 1.0)) {
                return bad("rho0 schedule needs one value ≥ 1 per rho_hat_max".into());
            }
        }
        let [lo, hi] = self.window;
        if !(lo >= 0.0 && lo < hi && hi <= self.rho_hat_max[0]) {
            return bad(format!("window {:?} not inside the smallest domain", self.window));
        }
        if !(self.s1 > 0.0 && self.s1 < self.s) {
            return bad(format!("need 0 < s1 < s, got s1 = {}, s = {}", self.s1, self.s));
        }
        let [a, b] = self.equivalence_window;
        if !(a > 0.0 && a < b) {
            return bad(format!("equivalence window {:?} must satisfy 0 < s0 < s1", self.equivalence_window));
        }
        if !(self.cauchy_tol > 0.0 && self.contraction > 1.0 && self.uniformity_factor >= 1.0) {
            return bad("cauchy_tol, contraction and uniformity_factor out of range".into());
        }
        Ok(())
    }

    fn rho0_at(&self, k: usize) -> f64 {
        match &self.rho0 {
            Some(r) => r[k],
            None => (self.rho0_fraction * self.rho_hat_max[k]).max(1.0),
        }
    }
}

/// One ladder point with its diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderPoint {
    pub eps: f64,
    pub rho_hat_max: f64,
    pub rho0: f64,
    pub trajectory: Trajectory,
    pub reports: Vec<BoundReport>,
    pub completeness: Option<CompletenessReport>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub config: LadderConfig,
    /// Canonical order: `ρ̂_max` major, `ε` minor, both in schedule order.
    pub points: Vec<LadderPoint>,
}

impl Sweep {
    pub fn point(&self, eps_index: usize, rho_index: usize) -> &LadderPoint {
        &self.points[rho_index * self.config.eps.len() + eps_index]
    }
}

fn attach_reports(traj: &Trajectory, config: &LadderConfig) -> Result<(Vec<BoundReport>, Option<CompletenessReport>)> {
    let spec = HypothesisSpec {
        s: config.s,
        beta: f64::MIN_POSITIVE,
        f: Default::default(),
    };
    let mut reports = upper_bounds(traj);
    reports.extend(lower_bounds(traj, &spec, config.s1)?);
    reports.push(trace_bound(traj, config.s, config.s1)?);
    let [s0, s1] = config.equivalence_window;
    let horizon = traj.last().t;
    if horizon >= s0 {
        reports.push(uniform_equivalence(traj, s0, s1.min(horizon).max(s0 * (1.0 + 1e-12)))?);
    }
    let comp = if horizon >= config.completeness_t {
        Some(completeness(traj, config.completeness_t, config.completeness_kappa)?)
    } else {
        None
    };
    Ok((reports, comp))
}

/// Runs every `(ε, ρ̂_max)` pair of the ladder in parallel and attaches the
/// bound diagnostics. Output order is canonical regardless of scheduling.
pub fn sweep(config: &LadderConfig, base: &RunSpec) -> Result<Sweep> {
    config.validate()?;
    if let Some(h) = &base.hypothesis {
        h.validate()?;
        let report = check_hypotheses(&base.background, &base.init, h, &base.grid);
        if !report.pass {
            return Err(FlowError::Hypothesis(format!(
                "min ratio {:.6} against beta {}, max initial ratio {:.6}",
                report.min_ratio, h.beta, report.max_initial_ratio
            )));
        }
    }
    let dx = base.grid.spacing();
    let mut jobs = Vec::new();
    for (k, &rmax) in config.rho_hat_max.iter().enumerate() {
        let n_nodes = (rmax / dx).round() as usize + 1;
        let grid = RadialGrid::new(n_nodes, rmax)?;
        for &eps in &config.eps {
            let mut spec = base.clone().with_reg(eps, Some(config.rho0_at(k))).recording_all();
            spec.grid = grid.clone();
            spec.hypothesis = None;
            // land exactly on every time a diagnostic looks at
            spec.checkpoints.extend(&config.checkpoints);
            spec.checkpoints.extend(config.equivalence_window);
            spec.checkpoints.extend([config.s1, config.completeness_t]);
            jobs.push(spec);
        }
    }
    let results: Vec<Result<LadderPoint>> = jobs
        .par_iter()
        .map(|spec| {
            let wrap = |e: FlowError| FlowError::Ladder {
                eps: spec.reg.eps,
                rho_hat_max: spec.grid.rho_hat_max,
                source: Box::new(e),
            };
            let trajectory = run(spec).map_err(wrap)?;
            let (reports, completeness) = attach_reports(&trajectory, config).map_err(wrap)?;
            Ok(LadderPoint {
                eps: spec.reg.eps,
                rho_hat_max: spec.grid.rho_hat_max,
                rho0: spec.reg.rho0.unwrap_or(f64::INFINITY),
                trajectory,
                reports,
                completeness,
            })
        })
        .collect();
    let points = results.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(Sweep {
        config: config.clone(),
        points,
    })
}

/// Cauchy certificate of the ladder on the comparison window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagonalLimit {
    pub certified: bool,
    pub reason: Option<String>,
    pub times: Vec<f64>,
    /// Comparison nodes (grid coordinate).
    pub window_nodes: Vec<f64>,
    /// Successive sup-differences in ε at the largest truncation radius.
    pub eps_differences: Vec<f64>,
    /// Successive sup-differences in ρ̂_max at the smallest ε.
    pub rho_differences: Vec<f64>,
    /// `(ε, ρ̂_max)` of the limit candidate.
    pub candidate: Option<[f64; 2]>,
    /// Candidate potential on the window, one row per time.
    pub profile: Vec<Vec<f64>>,
}

fn contracts(diffs: &[f64], factor: f64, tol: f64) -> bool {
    !diffs.is_empty()
        && diffs.iter().all(|d| d.is_finite())
        && diffs.windows(2).all(|w| w[1] <= tol || w[0] >= factor * w[1])
        && (diffs.len() > 1 || diffs[0] <= tol)
}

/// Compares all runs on the window and certifies the finest run as the limit
/// candidate when both difference sequences contract.
///
/// A difference already below the Cauchy tolerance counts as converged; a
/// single difference must be below the tolerance.
pub fn diagonal_limit(sweep: &Sweep) -> DiagonalLimit {
    let cfg = &sweep.config;
    let (ne, nr) = (cfg.eps.len(), cfg.rho_hat_max.len());
    let base = &sweep.point(0, 0).trajectory;
    let window_nodes: Vec<f64> = base
        .grid
        .nodes()
        .into_iter()
        .filter(|&x| x >= cfg.window[0] && x <= cfg.window[1])
        .collect();
    let t_min = base
        .states
        .iter()
        .map(|s| s.t)
        .find(|&t| t > 0.0)
        .unwrap_or(f64::INFINITY);
    let times: Vec<f64> = if cfg.checkpoints.is_empty() {
        base.times().into_iter().filter(|&t| t >= t_min).collect()
    } else {
        cfg.checkpoints.iter().copied().filter(|&t| t >= t_min).collect()
    };

    let sample = |p: &LadderPoint, t: f64| -> Option<Vec<f64>> {
        let s = p.trajectory.states.iter().find(|s| (s.t - t).abs() <= 1e-12 * t.max(1.0))?;
        Some(cubic_interpolate(&p.trajectory.grid, &s.u, &window_nodes))
    };
    let sup_diff = |a: &LadderPoint, b: &LadderPoint| -> f64 {
        let mut sup = 0.0f64;
        for &t in &times {
            match (sample(a, t), sample(b, t)) {
                (Some(x), Some(y)) => {
                    sup = x.iter().zip(&y).fold(sup, |m, (x, y)| m.max((x - y).abs()));
                }
                _ => return f64::NAN,
            }
        }
        sup
    };

    let eps_differences: Vec<f64> = (1..ne)
        .map(|j| sup_diff(sweep.point(j - 1, nr - 1), sweep.point(j, nr - 1)))
        .collect();
    let rho_differences: Vec<f64> = (1..nr)
        .map(|k| sup_diff(sweep.point(ne - 1, k - 1), sweep.point(ne - 1, k)))
        .collect();

    let reason = if ne < 3 || nr < 2 {
        Some(format!("need at least 3 eps levels and 2 rho_hat_max levels, got {ne} and {nr}"))
    } else if times.is_empty() {
        Some("no common checkpoint at or after t_min".to_string())
    } else if !contracts(&eps_differences, cfg.contraction, cfg.cauchy_tol) {
        Some("eps differences do not contract".to_string())
    } else if !contracts(&rho_differences, cfg.contraction, cfg.cauchy_tol) {
        Some("rho_hat_max differences do not contract".to_string())
    } else {
        None
    };
    let certified = reason.is_none();
    let finest = sweep.point(ne - 1, nr - 1);
    let profile = if certified {
        times.iter().filter_map(|&t| sample(finest, t)).collect()
    } else {
        Vec::new()
    };
    DiagonalLimit {
        certified,
        reason,
        times,
        window_nodes,
        eps_differences,
        rho_differences,
        candidate: certified.then_some([finest.eps, finest.rho_hat_max]),
        profile,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityEntry {
    pub rho_hat_max: f64,
    pub verdict: UniformityVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityReport {
    pub entries: Vec<UniformityEntry>,
    pub pass: bool,
}

/// Names of the functionals held to the ε-uniformity gate.
pub const UNIFORM_CHECKS: [&str; 6] = [
    "upper_bounds.u",
    "upper_bounds.udot",
    "lower_bounds.envelope",
    "lower_bounds.small_time",
    "trace_bound",
    "uniform_equivalence",
];

/// ε-uniformity gate per truncation radius and functional.
pub fn uniformity_report(sweep: &Sweep) -> UniformityReport {
    let cfg = &sweep.config;
    let mut entries = Vec::new();
    for (k, &rmax) in cfg.rho_hat_max.iter().enumerate() {
        for name in UNIFORM_CHECKS {
            let reports: Vec<&BoundReport> = (0..cfg.eps.len())
                .filter_map(|j| sweep.point(j, k).reports.iter().find(|r| r.name == name))
                .collect();
            if reports.len() == cfg.eps.len() {
                entries.push(UniformityEntry {
                    rho_hat_max: rmax,
                    verdict: uniformity_gate(&reports, cfg.uniformity_factor),
                });
            }
        }
    }
    let pass = !entries.is_empty() && entries.iter().all(|e| e.verdict.pass);
    UniformityReport { entries, pass }
}

/// Serializable summary of a sweep (trajectories are written separately).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepManifest {
    pub tool_version: String,
    pub config: LadderConfig,
    pub points: Vec<PointSummary>,
    pub uniformity: UniformityReport,
    pub diagonal: DiagonalLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSummary {
    pub eps: f64,
    pub rho_hat_max: f64,
    pub rho0: f64,
    pub n_nodes: usize,
    pub steps: usize,
    pub min_metric_ratio: f64,
    pub reports: Vec<BoundReport>,
    pub completeness: Option<CompletenessReport>,
}

impl SweepManifest {
    pub fn new(sweep: &Sweep) -> Self {
        let points = sweep
            .points
            .iter()
            .map(|p| {
                let dim = p.trajectory.background.dim;
                let min_metric_ratio = p
                    .trajectory
                    .states
                    .iter()
                    .filter(|s| s.t > 0.0)
                    .map(|s| s.metric_ratio.min_with_node(dim).1)
                    .fold(f64::INFINITY, f64::min);
                PointSummary {
                    eps: p.eps,
                    rho_hat_max: p.rho_hat_max,
                    rho0: p.rho0,
                    n_nodes: p.trajectory.grid.n_nodes,
                    steps: p.trajectory.steps.len(),
                    min_metric_ratio,
                    reports: p.reports.clone(),
                    completeness: p.completeness.clone(),
                }
            })
            .collect();
        Self {
            tool_version: crate::TOOL_VERSION.to_string(),
            config: sweep.config.clone(),
            points,
            uniformity: uniformity_report(sweep),
            diagonal: diagonal_limit(sweep),
        }
    }

    /// Content digest of the manifest.
    pub fn digest(&self) -> String {
        crate::io::digest(serde_json::to_string(self).expect("manifest serializes").as_bytes())
    }
}

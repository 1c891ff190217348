use serde::{Deserialize, Serialize};

use crate::error::{FlowError, Result};
use crate::geometry::{check_hypotheses, Background, HypothesisSpec, InitialData};
use crate::grid::RadialGrid;

use super::scheme::{FlowProblem, FlowState, Frame, Regularization, SchemeConfig, StepRecord};

/// Everything needed to run one regularized flow.
#[derive(Debug, Clone)]
pub struct RunSpec {
    pub background: Background,
    pub grid: RadialGrid,
    pub init: InitialData,
    pub reg: Regularization,
    /// Standing hypotheses to verify before stepping; `None` skips the gate.
    pub hypothesis: Option<HypothesisSpec>,
    pub scheme: SchemeConfig,
    pub horizon: f64,
    /// Times the ramp lands on exactly and records.
    pub checkpoints: Vec<f64>,
    /// Record every accepted step, not only checkpoints. Implied by empty checkpoints.
    pub record_all: bool,
    pub frame: Frame,
}

impl RunSpec {
    pub fn new(background: Background, grid: RadialGrid, init: InitialData, horizon: f64) -> Self {
        Self {
            background,
            grid,
            init,
            reg: Regularization::default(),
            hypothesis: None,
            scheme: SchemeConfig::default(),
            horizon,
            checkpoints: Vec::new(),
            record_all: false,
            frame: Frame::Normalized,
        }
    }

    pub fn recording_all(mut self) -> Self {
        self.record_all = true;
        self
    }

    pub fn with_reg(mut self, eps: f64, rho0: Option<f64>) -> Self {
        self.reg = Regularization { eps, rho0 };
        self
    }

    pub fn with_scheme(mut self, scheme: SchemeConfig) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_checkpoints(mut self, checkpoints: Vec<f64>) -> Self {
        self.checkpoints = checkpoints;
        self
    }

    pub fn with_hypothesis(mut self, spec: HypothesisSpec) -> Self {
        self.hypothesis = Some(spec);
        self
    }

    pub fn with_frame(mut self, frame: Frame) -> Self {
        self.frame = frame;
        self
    }

    pub fn problem(&self) -> Result<FlowProblem> {
        FlowProblem::new(
            self.background.clone(),
            self.grid.clone(),
            &self.init,
            self.reg,
            self.frame,
        )
    }
}

/// Recorded states of one run plus per-step solver metadata.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub background: Background,
    pub grid: RadialGrid,
    pub frame: Frame,
    pub states: Vec<FlowState>,
    pub steps: Vec<StepRecord>,
    pub config_digest: Option<String>,
}

impl Trajectory {
    pub fn times(&self) -> Vec<f64> {
        self.states.iter().map(|s| s.t).collect()
    }

    pub fn last(&self) -> &FlowState {
        self.states.last().expect("trajectory is never empty")
    }

    /// The initial state plus the states recorded exactly at the given times.
    pub fn at_times(&self, times: &[f64]) -> Trajectory {
        let keep = |t: f64| t == self.states[0].t || times.iter().any(|&c| (c - t).abs() <= 1e-12 * c.max(1.0));
        Trajectory {
            states: self.states.iter().filter(|s| keep(s.t)).cloned().collect(),
            ..self.clone()
        }
    }

    /// Recorded state closest to `t`.
    pub fn nearest(&self, t: f64) -> &FlowState {
        self.states
            .iter()
            .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
            .expect("trajectory is never empty")
    }
}

/// Advances a regularized flow from `t = 0` to the horizon on the geometric ramp.
pub fn run(spec: &RunSpec) -> Result<Trajectory> {
    spec.scheme.validate()?;
    if !(spec.horizon > 0.0 && spec.horizon.is_finite()) {
        return Err(FlowError::Parameter(format!("horizon must be positive, got {}", spec.horizon)));
    }
    if let Some(h) = &spec.hypothesis {
        h.validate()?;
        let report = check_hypotheses(&spec.background, &spec.init, h, &spec.grid);
        if !report.pass {
            return Err(FlowError::Hypothesis(format!(
                "min ratio {:.6} against beta {}, max initial ratio {:.6}",
                report.min_ratio, h.beta, report.max_initial_ratio
            )));
        }
    }
    let problem = spec.problem()?;
    let dim = spec.background.dim;
    let (_, gmin) = problem.gamma0.min_with_node(dim);
    if !(gmin > 0.0) {
        return Err(FlowError::LadderRequired);
    }

    let mut marks: Vec<f64> = spec
        .checkpoints
        .iter()
        .copied()
        .filter(|&c| c > 0.0 && c < spec.horizon)
        .collect();
    marks.sort_by(f64::total_cmp);
    marks.dedup();
    marks.push(spec.horizon);
    let record_all = spec.record_all || spec.checkpoints.is_empty();

    let mut state = problem.initial_state();
    let mut states = vec![state.clone()];
    let mut steps = Vec::new();
    let mut next_mark = 0;
    while state.t < spec.horizon {
        let target = marks[next_mark];
        let mut t_next = spec.scheme.next_time(state.t).min(target);
        // avoid a sliver step right before a mark
        if target - t_next < 1e-3 * (t_next - state.t) {
            t_next = target;
        }
        let dt = t_next - state.t;
        let (mut new_state, record) = problem.step(&state, dt, &spec.scheme)?;
        let hit = t_next == target;
        if hit {
            new_state.t = target;
            next_mark += 1;
        }
        steps.push(record);
        state = new_state;
        if record_all || hit {
            states.push(state.clone());
        }
    }

    Ok(Trajectory {
        background: spec.background.clone(),
        grid: spec.grid.clone(),
        frame: spec.frame,
        states,
        steps,
        config_digest: None,
    })
}

/// Reconstruction of `u(t) = e^{-t} ∫₀ᵗ e^s (u̇ + u) ds` from the recorded states.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialReconstruction {
    pub times: Vec<f64>,
    pub u: Vec<Vec<f64>>,
    /// Sup over states and nodes of the difference to the evolved potential.
    pub sup_difference: f64,
}

/// Trapezoidal reconstruction of the potential from the stored log-ratios.
pub fn potential_integral(traj: &Trajectory) -> Result<PotentialReconstruction> {
    const MIN_STATES: usize = 8;
    if traj.states.len() < MIN_STATES {
        return Err(FlowError::Resolution {
            needed: MIN_STATES,
            got: traj.states.len(),
        });
    }
    if traj.frame != Frame::Normalized {
        return Err(FlowError::Parameter("potential reconstruction needs a normalized trajectory".into()));
    }
    let n = traj.grid.n_nodes;
    let log_ratio = |s: &FlowState, i: usize| s.udot[i] + s.u[i];
    let first = &traj.states[0];
    // running integral of e^s L(s), started at the first recorded time
    let mut acc = vec![0.0; n];
    let mut out = vec![first.u.clone()];
    let mut sup = 0.0f64;
    let mut prev = first;
    let base: Vec<f64> = first.u.iter().map(|u| u * first.t.exp()).collect();
    for s in &traj.states[1..] {
        let h = s.t - prev.t;
        let (a, b) = (prev.t.exp(), s.t.exp());
        let mut row = Vec::with_capacity(n);
        for i in 0..n {
            acc[i] += 0.5 * h * (a * log_ratio(prev, i) + b * log_ratio(s, i));
            let u = (-s.t).exp() * (base[i] + acc[i]);
            sup = sup.max((u - s.u[i]).abs());
            row.push(u);
        }
        out.push(row);
        prev = s;
    }
    Ok(PotentialReconstruction {
        times: traj.times(),
        u: out,
        sup_difference: sup,
    })
}

use std::path::Path;

use crflow::diagnostics::{
    completeness, identity_residual, ke_residual, lower_bounds, scalar_lower_unnormalized, trace_bound,
    udot_lower_longtime, uniform_equivalence, upper_bounds, BoundReport, Extremum,
};
use crflow::flow::{from_unnormalized, run as run_flow, to_unnormalized, Frame, Trajectory};
use crflow::geometry::HypothesisSpec;
use crflow::io::TrajectoryDocument;
use crflow::ladder::{sweep as run_sweep, LadderConfig, SweepManifest};
use crflow::FlowError;
use serde::Serialize;
use serde_json::Value;

use crate::config::{self, LoadedConfig};
use crate::output::{self, join};
use crate::Direction;

pub const EXIT_OK: u8 = 0;
pub const EXIT_INPUT: u8 = 1;
pub const EXIT_SOLVER: u8 = 2;
pub const EXIT_HYPOTHESIS: u8 = 3;
pub const EXIT_NO_LIMIT: u8 = 4;
pub const EXIT_CHECKS: u8 = 5;

#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl From<config::ConfigError> for CliError {
    fn from(e: config::ConfigError) -> Self {
        Self {
            code: EXIT_INPUT,
            message: e.0,
        }
    }
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        Self {
            code: EXIT_INPUT,
            message: format!("{e:#}"),
        }
    }
}

impl From<FlowError> for CliError {
    fn from(e: FlowError) -> Self {
        Self {
            code: flow_exit_code(&e),
            message: e.to_string(),
        }
    }
}

/// Exit status of a core error: parameter problems are input errors, failed
/// standing hypotheses are 3, everything the solver raises is 2.
pub fn flow_exit_code(e: &FlowError) -> u8 {
    match e {
        FlowError::Hypothesis(_) | FlowError::LadderRequired => EXIT_HYPOTHESIS,
        FlowError::Domain { .. } | FlowError::GridSize { .. } | FlowError::Parameter(_) | FlowError::Window { .. } => {
            EXIT_INPUT
        }
        FlowError::Positivity { .. } | FlowError::StepFailure { .. } | FlowError::Resolution { .. } => EXIT_SOLVER,
        FlowError::Ladder { source, .. } => flow_exit_code(source),
    }
}

type CmdResult = Result<u8, CliError>;

fn document(traj: &Trajectory, loaded: &LoadedConfig) -> TrajectoryDocument {
    let mut doc = TrajectoryDocument::from_trajectory(traj);
    doc.config = Some(loaded.raw.clone());
    doc
}

#[derive(Serialize)]
struct RunSummary<'a> {
    tool_version: &'a str,
    config_digest: &'a str,
    frame: Frame,
    t_final: f64,
    states: usize,
    steps: usize,
    sup_abs_u: f64,
    sup_abs_udot: f64,
    min_metric_ratio: f64,
    newton_iters_total: usize,
    newton_iters_max: usize,
    max_newton_residual: f64,
}

pub fn run(config_path: &Path, out: &Path) -> CmdResult {
    let loaded = config::load(config_path)?;
    let spec = loaded.config.run_spec()?;
    let mut traj = run_flow(&spec)?;
    traj.config_digest = Some(loaded.digest.clone());

    output::ensure_dir(out)?;
    output::write_json(&join(out, "trajectory.json"), &document(&traj, &loaded))?;
    output::write_trajectory_csv(&join(out, "trajectory.csv"), &traj)?;

    let dim = traj.background.dim;
    let sup = |f: &dyn Fn(&crflow::flow::FlowState) -> f64| traj.states.iter().map(f).fold(0.0, f64::max);
    let summary = RunSummary {
        tool_version: crflow::TOOL_VERSION,
        config_digest: &loaded.digest,
        frame: traj.frame,
        t_final: traj.last().t,
        states: traj.states.len(),
        steps: traj.steps.len(),
        sup_abs_u: sup(&|s| s.u.iter().fold(0.0, |m, v| m.max(v.abs()))),
        sup_abs_udot: sup(&|s| s.udot.iter().fold(0.0, |m, v| m.max(v.abs()))),
        min_metric_ratio: traj
            .states
            .iter()
            .filter(|s| s.t > 0.0)
            .map(|s| s.metric_ratio.min_with_node(dim).1)
            .fold(f64::INFINITY, f64::min),
        newton_iters_total: traj.steps.iter().map(|r| r.newton_iters).sum(),
        newton_iters_max: traj.steps.iter().map(|r| r.newton_iters).max().unwrap_or(0),
        max_newton_residual: traj.steps.iter().map(|r| r.residual).fold(0.0, f64::max),
    };
    output::write_json(&join(out, "summary.json"), &summary)?;
    println!(
        "run: t = {} after {} steps, sup|u| = {:.3e}, min ratio = {:.6}",
        summary.t_final, summary.steps, summary.sup_abs_u, summary.min_metric_ratio
    );
    Ok(EXIT_OK)
}

#[derive(Serialize)]
struct SweepOutput<'a> {
    config_digest: &'a str,
    /// Seconds since the Unix epoch; the only field that differs between repeats.
    timestamp: u64,
    files: Vec<String>,
    #[serde(flatten)]
    manifest: &'a SweepManifest,
}

pub fn sweep(config_path: &Path, out: &Path, strict: bool) -> CmdResult {
    let loaded = config::load(config_path)?;
    let base = loaded.config.run_spec()?;
    let ladder = loaded.config.ladder.clone().unwrap_or_default();
    let result = run_sweep(&ladder, &base)?;
    let manifest = SweepManifest::new(&result);

    output::ensure_dir(out)?;
    // computed in parallel, written here in canonical order
    let mut files = Vec::with_capacity(result.points.len());
    for p in &result.points {
        let name = output::ladder_file_name(p.eps, p.rho_hat_max);
        let mut traj = p.trajectory.clone();
        traj.config_digest = Some(loaded.digest.clone());
        output::write_json(&join(out, &name), &document(&traj, &loaded))?;
        files.push(name);
    }
    let timestamp = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    output::write_json(
        &join(out, "manifest.json"),
        &SweepOutput {
            config_digest: &loaded.digest,
            timestamp,
            files,
            manifest: &manifest,
        },
    )?;

    let d = &manifest.diagonal;
    println!("sweep: {} runs, uniformity {}", result.points.len(), verdict(manifest.uniformity.pass));
    for e in manifest.uniformity.entries.iter().filter(|e| !e.verdict.pass) {
        println!(
            "  uniformity FAIL {} at rho_hat_max = {}: factor {:.3} > {}",
            e.verdict.name, e.rho_hat_max, e.verdict.factor, e.verdict.threshold
        );
    }
    match (&d.candidate, &d.reason) {
        (Some([eps, rmax]), _) => println!("diagonal limit certified: candidate eps = {eps}, rho_hat_max = {rmax}"),
        (None, reason) => println!("no limit: {}", reason.as_deref().unwrap_or("not certified")),
    }
    if !d.certified {
        Ok(EXIT_NO_LIMIT)
    } else if strict && !manifest.uniformity.pass {
        Ok(EXIT_CHECKS)
    } else {
        Ok(EXIT_OK)
    }
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn read_trajectory(path: &Path) -> Result<(TrajectoryDocument, Trajectory), CliError> {
    let invalid = |msg: String| CliError {
        code: EXIT_INPUT,
        message: format!("invalid snapshot file {}: {msg}", path.display()),
    };
    let text = std::fs::read_to_string(path).map_err(|e| invalid(e.to_string()))?;
    let doc: TrajectoryDocument = serde_json::from_str(&text).map_err(|e| invalid(e.to_string()))?;
    let traj = doc.to_trajectory().map_err(|e| invalid(e.to_string()))?;
    Ok((doc, traj))
}

/// Every check `check` knows, in report order.
pub const CHECKS: [&str; 9] = [
    "upper_bounds",
    "lower_bounds",
    "trace_bound",
    "uniform_equivalence",
    "completeness",
    "ke_residual",
    "scalar_lower",
    "identity",
    "udot_longtime",
];

/// Horizon from which the long-time checks are meaningful.
const LONG_TIME: f64 = 6.0;

#[derive(Debug, Serialize)]
struct CheckResult {
    name: String,
    pass: bool,
    error: Option<String>,
    reports: Vec<BoundReport>,
}

struct CheckContext<'a> {
    traj: &'a Trajectory,
    ladder: LadderConfig,
    ke_threshold: f64,
}

impl CheckContext<'_> {
    fn normalized(&self) -> bool {
        self.traj.frame == Frame::Normalized
    }

    fn has_time_in(&self, lo: f64, hi: f64) -> bool {
        self.traj.states.iter().any(|s| s.t > 0.0 && s.t >= lo && s.t <= hi)
    }

    /// Whether `all` selects the check for this trajectory.
    fn applicable(&self, name: &str) -> bool {
        let c = &self.ladder;
        let horizon = self.traj.last().t;
        match name {
            "upper_bounds" => self.normalized() && horizon > 0.0,
            "lower_bounds" | "trace_bound" => self.normalized() && self.has_time_in(0.0, c.s1.min(1.0)),
            "uniform_equivalence" => self.normalized() && self.has_time_in(c.equivalence_window[0], c.equivalence_window[1]),
            "completeness" => self.normalized() && horizon >= c.completeness_t,
            "ke_residual" | "udot_longtime" => self.normalized() && horizon >= LONG_TIME,
            "scalar_lower" => !self.normalized(),
            "identity" => self.normalized() && self.traj.states.len() >= 3,
            _ => false,
        }
    }

    fn evaluate(&self, name: &str) -> crflow::Result<Vec<BoundReport>> {
        let traj = self.traj;
        let c = &self.ladder;
        if name != "scalar_lower" && !self.normalized() {
            return Err(FlowError::Parameter(format!("{name} is stated for the normalized flow")));
        }
        let hyp = HypothesisSpec {
            s: c.s,
            beta: f64::MIN_POSITIVE,
            f: Default::default(),
        };
        Ok(match name {
            "upper_bounds" => upper_bounds(traj),
            "lower_bounds" => lower_bounds(traj, &hyp, c.s1)?,
            "trace_bound" => vec![trace_bound(traj, c.s, c.s1)?],
            "uniform_equivalence" => {
                let [s0, s1] = c.equivalence_window;
                vec![uniform_equivalence(traj, s0, s1)?]
            }
            "completeness" => {
                let r = completeness(traj, c.completeness_t, c.completeness_kappa)?;
                vec![BoundReport {
                    name: "completeness".into(),
                    window: [r.t, r.t],
                    functional_trace: vec![[r.t, r.slope]],
                    extremum: Extremum::Inf,
                    sup_or_inf: r.slope,
                    threshold: Some(r.kappa),
                    pass: r.pass,
                }]
            }
            "ke_residual" => {
                let last = traj.last();
                let v = ke_residual(last, &traj.background, &traj.grid)?;
                vec![BoundReport {
                    name: "ke_residual".into(),
                    window: [last.t, last.t],
                    functional_trace: vec![[last.t, v]],
                    extremum: Extremum::Sup,
                    sup_or_inf: v,
                    threshold: Some(self.ke_threshold),
                    pass: v.is_finite() && v <= self.ke_threshold,
                }]
            }
            "scalar_lower" => vec![scalar_lower_unnormalized(traj, None)?],
            "identity" => vec![identity_residual(traj)?],
            "udot_longtime" => vec![udot_lower_longtime(traj)?],
            other => return Err(FlowError::Parameter(format!("unknown check `{other}`"))),
        })
    }
}

/// Bound parameters the producing configuration carried, else the defaults.
fn ladder_of(doc: &TrajectoryDocument) -> LadderConfig {
    doc.config
        .as_ref()
        .and_then(|c| c.get("ladder"))
        .and_then(|l| serde_json::from_value::<LadderConfig>(l.clone()).ok())
        .unwrap_or_default()
}

#[derive(Serialize)]
struct CheckSummary<'a> {
    tool_version: &'a str,
    config_digest: Option<&'a str>,
    trajectory: String,
    checks: Vec<(&'a str, bool)>,
    pass: bool,
}

pub fn check(path: &Path, out: &Path, selected: &[String], ke_threshold: f64) -> CmdResult {
    let (doc, traj) = read_trajectory(path)?;
    let ctx = CheckContext {
        traj: &traj,
        ladder: ladder_of(&doc),
        ke_threshold,
    };
    let names: Vec<&str> = if selected.iter().any(|s| s == "all") {
        CHECKS.iter().copied().filter(|n| ctx.applicable(n)).collect()
    } else {
        let mut names = Vec::new();
        for s in selected {
            let s = s.trim();
            let known = CHECKS.iter().copied().find(|n| *n == s).ok_or_else(|| CliError {
                code: EXIT_INPUT,
                message: format!("unknown check `{s}`; known checks: {}", CHECKS.join(", ")),
            })?;
            names.push(known);
        }
        names
    };

    output::ensure_dir(out)?;
    let digest = doc.config_digest.as_deref();
    let mut outcomes = Vec::new();
    for name in &names {
        let result = match ctx.evaluate(name) {
            Ok(reports) => CheckResult {
                name: name.to_string(),
                pass: !reports.is_empty() && reports.iter().all(|r| r.pass),
                error: None,
                reports,
            },
            Err(e) => CheckResult {
                name: name.to_string(),
                pass: false,
                error: Some(e.to_string()),
                reports: Vec::new(),
            },
        };
        #[derive(Serialize)]
        struct Stamped<'a> {
            tool_version: &'a str,
            config_digest: Option<&'a str>,
            #[serde(flatten)]
            result: &'a CheckResult,
        }
        output::write_json(
            &join(out, &format!("check_{name}.json")),
            &Stamped {
                tool_version: crflow::TOOL_VERSION,
                config_digest: digest,
                result: &result,
            },
        )?;
        for r in &result.reports {
            output::write_report_csv(&join(out, &format!("check_{}.csv", r.name)), r, digest)?;
        }
        match &result.error {
            Some(e) => println!("check {name}: FAIL ({e})"),
            None => {
                let detail: Vec<String> = result
                    .reports
                    .iter()
                    .map(|r| format!("{} = {:.4e}{}", r.name, r.sup_or_inf, if r.pass { "" } else { " (fail)" }))
                    .collect();
                println!("check {name}: {} [{}]", verdict(result.pass), detail.join(", "));
            }
        }
        outcomes.push((*name, result.pass));
    }
    let pass = outcomes.iter().all(|(_, p)| *p);
    output::write_json(
        &join(out, "check_summary.json"),
        &CheckSummary {
            tool_version: crflow::TOOL_VERSION,
            config_digest: digest,
            trajectory: path.display().to_string(),
            checks: outcomes,
            pass,
        },
    )?;
    Ok(if pass { EXIT_OK } else { EXIT_CHECKS })
}

pub fn convert(path: &Path, out: &Path, direction: Direction) -> CmdResult {
    let (doc, traj) = read_trajectory(path)?;
    let (converted, suffix) = match direction {
        Direction::Unnormalized => (to_unnormalized(&traj)?, "unnormalized"),
        Direction::Normalized => (from_unnormalized(&traj)?, "normalized"),
    };
    let mut converted_doc = TrajectoryDocument::from_trajectory(&converted);
    converted_doc.config = doc.config.clone().filter(|c: &Value| !c.is_null());
    let stem = path.file_stem().and_then(|s| s.to_str()).unwrap_or("trajectory");
    let name = format!("{stem}_{suffix}.json");
    output::ensure_dir(out)?;
    output::write_json(&join(out, &name), &converted_doc)?;
    println!("convert: {} states written to {}", converted.states.len(), join(out, &name).display());
    Ok(EXIT_OK)
}

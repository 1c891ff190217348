//! JSON snapshot documents for trajectories.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{FlowError, Result};
use crate::flow::{FlowState, Frame, StepRecord, Trajectory};
use crate::geometry::{Background, BackgroundKind, EigenField};
use crate::grid::RadialGrid;

/// Hex SHA-256 of a byte string.
pub fn digest(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub n_nodes: usize,
    pub rho_hat_max: f64,
}

/// One recorded state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Snapshot {
    pub t: f64,
    pub eps: f64,
    pub rho0: Option<f64>,
    pub grid: GridSpec,
    pub u: Vec<f64>,
    pub udot: Vec<f64>,
    /// Radial eigenvalue ratio (the only one in dimension one).
    pub metric_ratio: Vec<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub metric_ratio_spherical: Option<Vec<f64>>,
}

impl Snapshot {
    pub fn from_state(state: &FlowState, grid: &RadialGrid, dim: usize) -> Self {
        Self {
            t: state.t,
            eps: state.eps,
            rho0: state.rho0,
            grid: GridSpec {
                n_nodes: grid.n_nodes,
                rho_hat_max: grid.rho_hat_max,
            },
            u: state.u.clone(),
            udot: state.udot.clone(),
            metric_ratio: state.metric_ratio.radial.clone(),
            metric_ratio_spherical: (dim > 1).then(|| state.metric_ratio.spherical.clone()),
        }
    }

    /// Validates array lengths and positivity, then rebuilds the state.
    pub fn to_state(&self, dim: usize) -> Result<FlowState> {
        let n = self.grid.n_nodes;
        let lengths_ok = self.u.len() == n && self.udot.len() == n && self.metric_ratio.len() == n;
        if !lengths_ok {
            return Err(FlowError::Parameter(format!("snapshot at t = {} has arrays of the wrong length", self.t)));
        }
        let spherical = match (&self.metric_ratio_spherical, dim) {
            (Some(s), _) if s.len() == n => s.clone(),
            (None, 1) => self.metric_ratio.clone(),
            _ => {
                return Err(FlowError::Parameter(format!(
                    "snapshot at t = {} lacks a valid spherical ratio",
                    self.t
                )))
            }
        };
        let ratio = EigenField {
            radial: self.metric_ratio.clone(),
            spherical,
        };
        let (node, value) = ratio.min_with_node(dim);
        if !(value > 0.0) {
            return Err(FlowError::Positivity { node, value });
        }
        let finite = self.u.iter().chain(&self.udot).all(|v| v.is_finite()) && self.t.is_finite();
        if !finite {
            return Err(FlowError::Parameter(format!("snapshot at t = {} has non-finite entries", self.t)));
        }
        Ok(FlowState {
            t: self.t,
            u: self.u.clone(),
            udot: self.udot.clone(),
            metric_ratio: ratio,
            eps: self.eps,
            rho0: self.rho0,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundSpec {
    pub kind: BackgroundKind,
    pub dim: usize,
}

/// Serialized trajectory with provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryDocument {
    pub tool_version: String,
    pub config_digest: Option<String>,
    /// The run configuration the trajectory was produced from, verbatim.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub config: Option<serde_json::Value>,
    pub background: BackgroundSpec,
    pub frame: Frame,
    pub steps: Vec<StepRecord>,
    pub snapshots: Vec<Snapshot>,
}

impl TrajectoryDocument {
    pub fn from_trajectory(traj: &Trajectory) -> Self {
        let dim = traj.background.dim;
        Self {
            tool_version: crate::TOOL_VERSION.to_string(),
            config_digest: traj.config_digest.clone(),
            config: None,
            background: BackgroundSpec {
                kind: traj.background.kind,
                dim,
            },
            frame: traj.frame,
            steps: traj.steps.clone(),
            snapshots: traj
                .states
                .iter()
                .map(|s| Snapshot::from_state(s, &traj.grid, dim))
                .collect(),
        }
    }

    pub fn to_trajectory(&self) -> Result<Trajectory> {
        let background = Background::new(self.background.kind, self.background.dim)?;
        let first = self
            .snapshots
            .first()
            .ok_or(FlowError::Resolution { needed: 1, got: 0 })?;
        let grid = RadialGrid::new(first.grid.n_nodes, first.grid.rho_hat_max)?;
        let mut states = Vec::with_capacity(self.snapshots.len());
        for s in &self.snapshots {
            if s.grid != first.grid {
                return Err(FlowError::Parameter("snapshots disagree on the grid".into()));
            }
            let state = s.to_state(background.dim)?;
            if let Some(prev) = states.last() {
                let prev: &FlowState = prev;
                if !(state.t > prev.t) {
                    return Err(FlowError::Parameter(format!("snapshot times not increasing at t = {}", state.t)));
                }
            }
            states.push(state);
        }
        Ok(Trajectory {
            background,
            grid,
            frame: self.frame,
            states,
            steps: self.steps.clone(),
            config_digest: self.config_digest.clone(),
        })
    }
}

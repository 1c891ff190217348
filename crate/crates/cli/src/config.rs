//! Run configuration: schema validation, typed parsing, digest.

use std::path::Path;

use crflow::flow::{Frame, Regularization, RunSpec, SchemeConfig};
use crflow::geometry::{Background, BackgroundKind, HypothesisSpec, InitialData};
use crflow::io::{digest, GridSpec};
use crflow::ladder::LadderConfig;
use crflow::RadialGrid;
use jsonschema::JSONSchema;
use serde::{Deserialize, Serialize};
use serde_json::Value;

pub const SCHEMA: &str = include_str!("../../../schemas/run_config.schema.json");

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BackgroundConfig {
    pub kind: BackgroundKind,
    pub dim: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub background: BackgroundConfig,
    pub initial: InitialData,
    #[serde(default)]
    pub hypothesis: Option<HypothesisSpec>,
    pub grid: GridSpec,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default)]
    pub regularization: Regularization,
    #[serde(default)]
    pub frame: Frame,
    pub horizon: f64,
    #[serde(default)]
    pub checkpoints: Vec<f64>,
    #[serde(default)]
    pub record_all: bool,
    #[serde(default)]
    pub ladder: Option<LadderConfig>,
}

/// A parsed configuration together with its source document.
#[derive(Debug, Clone)]
pub struct LoadedConfig {
    pub config: RunConfig,
    pub raw: Value,
    /// SHA-256 of the canonical (key-sorted, compact) JSON form.
    pub digest: String,
}

/// Malformed configuration, with the offending location when known.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn pointer_or_root(p: &str) -> &str {
    if p.is_empty() {
        "/"
    } else {
        p
    }
}

pub fn parse(text: &str) -> Result<LoadedConfig, ConfigError> {
    let raw: Value = serde_json::from_str(text)
        .map_err(|e| ConfigError(format!("config is not valid JSON (line {}, column {}): {e}", e.line(), e.column())))?;

    let schema: Value = serde_json::from_str(SCHEMA).expect("bundled schema is valid JSON");
    let compiled = JSONSchema::compile(&schema).expect("bundled schema compiles");
    if let Err(errors) = compiled.validate(&raw) {
        let lines: Vec<String> = errors
            .map(|e| format!("at {}: {}", pointer_or_root(&e.instance_path.to_string()), e))
            .collect();
        return Err(ConfigError(format!("config fails schema validation\n  {}", lines.join("\n  "))));
    }

    let config: RunConfig = serde_path_to_error::deserialize(&raw)
        .map_err(|e| ConfigError(format!("config field `{}`: {}", e.path(), e.inner())))?;
    let canonical = serde_json::to_vec(&raw).expect("value serializes");
    Ok(LoadedConfig {
        config,
        digest: digest(&canonical),
        raw,
    })
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    parse(&text)
}

impl RunConfig {
    /// Builds the solver input; semantic errors here are configuration errors.
    pub fn run_spec(&self) -> crflow::Result<RunSpec> {
        let background = Background::new(self.background.kind, self.background.dim)?;
        let grid = RadialGrid::new(self.grid.n_nodes, self.grid.rho_hat_max)?;
        let mut spec = RunSpec::new(background, grid, InitialData::new(self.initial.profile.clone())?, self.horizon)
            .with_scheme(self.scheme.clone())
            .with_checkpoints(self.checkpoints.clone())
            .with_frame(self.frame)
            .with_reg(self.regularization.eps, self.regularization.rho0);
        spec.hypothesis = self.hypothesis.clone();
        spec.record_all = self.record_all;
        Ok(spec)
    }
}

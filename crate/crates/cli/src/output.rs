//! Artifact writers. All files of one invocation go through these helpers
//! from the main thread, so manifests never interleave.

use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use crflow::flow::Trajectory;
use serde::Serialize;

/// Fixed CSV column order of trajectory dumps.
pub const TRAJECTORY_COLUMNS: [&str; 6] = ["t", "node", "rho_hat", "u", "udot", "metric_ratio"];

pub fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create output directory {}", dir.display()))
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let file = File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    let mut w = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut w, value)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

/// Provenance line opening every CSV file; readers skip it as a `#` comment.
fn provenance(digest: Option<&str>) -> String {
    format!("# {} config_digest={}\n", crflow::TOOL_VERSION, digest.unwrap_or("none"))
}

pub fn write_trajectory_csv(path: &Path, traj: &Trajectory) -> Result<()> {
    let mut file = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    file.write_all(provenance(traj.config_digest.as_deref()).as_bytes())?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(TRAJECTORY_COLUMNS)?;
    let x = traj.grid.nodes();
    for s in &traj.states {
        for (i, xi) in x.iter().enumerate() {
            w.write_record(&[
                s.t.to_string(),
                i.to_string(),
                xi.to_string(),
                s.u[i].to_string(),
                s.udot[i].to_string(),
                s.metric_ratio.radial[i].to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_csv(path: &Path, report: &crflow::diagnostics::BoundReport, digest: Option<&str>) -> Result<()> {
    let mut file = BufWriter::new(File::create(path).with_context(|| format!("cannot create {}", path.display()))?);
    file.write_all(provenance(digest).as_bytes())?;
    report.write_csv(&mut file)?;
    file.flush()?;
    Ok(())
}

/// `traj_eps1.000e-3_rmax0040.000.json`
pub fn ladder_file_name(eps: f64, rho_hat_max: f64) -> String {
    format!("traj_eps{eps:.3e}_rmax{rho_hat_max:08.3}.json")
}

pub fn join(dir: &Path, name: &str) -> PathBuf {
    dir.join(name)
}

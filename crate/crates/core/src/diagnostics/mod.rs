//! Quantified checks of the a priori estimates, identities and convergence
//! statements on recorded trajectories.
//!
//! The constants in the estimates are existential, so every report carries the
//! measured functional and passes on finiteness; ε-uniformity is judged across
//! a ladder by [`uniformity_gate`].

mod bounds;
mod comparison;
mod geometric;
mod identity;

use serde::{Deserialize, Serialize};

pub use bounds::{
    lower_bounds, trace_bound, trace_constant, udot_lower_longtime, uniform_equivalence, upper_bounds,
};
pub use comparison::{comparison_test, m_matrix_check, ComparisonOutcome};
pub use geometric::{
    completeness, initial_attainment, ke_residual, scalar_curvature, scalar_lower_unnormalized,
    CompletenessReport,
};
pub use identity::{identity_order, identity_residual};

/// Whether the functional of a report is a supremum or an infimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Extremum {
    Sup,
    Inf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub name: String,
    pub window: [f64; 2],
    /// `(t, value)` per checkpoint.
    pub functional_trace: Vec<[f64; 2]>,
    pub extremum: Extremum,
    pub sup_or_inf: f64,
    pub threshold: Option<f64>,
    pub pass: bool,
}

impl BoundReport {
    pub(crate) fn from_trace(
        name: &str,
        extremum: Extremum,
        trace: Vec<[f64; 2]>,
        threshold: Option<f64>,
    ) -> Self {
        let window = match (trace.first(), trace.last()) {
            (Some(a), Some(b)) => [a[0], b[0]],
            _ => [f64::NAN, f64::NAN],
        };
        let value = match extremum {
            Extremum::Sup => trace.iter().map(|p| p[1]).fold(f64::NEG_INFINITY, f64::max),
            Extremum::Inf => trace.iter().map(|p| p[1]).fold(f64::INFINITY, f64::min),
        };
        let finite = !trace.is_empty() && trace.iter().all(|p| p[1].is_finite());
        let within = match (threshold, extremum) {
            (None, _) => true,
            (Some(th), Extremum::Sup) => value <= th,
            (Some(th), Extremum::Inf) => value >= th,
        };
        Self {
            name: name.to_string(),
            window,
            functional_trace: trace,
            extremum,
            sup_or_inf: value,
            threshold,
            pass: finite && within,
        }
    }

    /// One CSV row per checkpoint: `name,t,value`.
    pub fn write_csv<W: std::io::Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "name,t,value")?;
        for [t, v] in &self.functional_trace {
            writeln!(out, "{},{t},{v}", self.name)?;
        }
        Ok(())
    }

    /// Size of the functional in the direction the estimate controls.
    fn magnitude(&self) -> f64 {
        match self.extremum {
            Extremum::Sup => self.sup_or_inf.max(0.0),
            Extremum::Inf => (-self.sup_or_inf).max(0.0),
        }
    }
}

/// Default ε-uniformity factor.
pub const UNIFORMITY_FACTOR: f64 = 1.25;

/// Functionals below this magnitude count as zero in the uniformity gate.
pub const UNIFORMITY_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UniformityVerdict {
    pub name: String,
    /// Controlled magnitude at the reference (largest) ε.
    pub reference: f64,
    /// Largest controlled magnitude over the ladder.
    pub worst: f64,
    pub factor: f64,
    pub threshold: f64,
    pub pass: bool,
}

/// ε-uniformity of one functional: the largest magnitude over the ladder may
/// exceed the magnitude at the reference level by at most `factor`.
///
/// `reports[0]` is the reference level. For inf-type functionals the magnitude
/// is the depth below zero.
pub fn uniformity_gate(reports: &[&BoundReport], factor: f64) -> UniformityVerdict {
    let name = reports.first().map(|r| r.name.clone()).unwrap_or_default();
    let finite = !reports.is_empty() && reports.iter().all(|r| r.sup_or_inf.is_finite());
    let reference = reports.first().map(|r| r.magnitude()).unwrap_or(f64::NAN);
    let worst = reports.iter().map(|r| r.magnitude()).fold(0.0, f64::max);
    let ratio = (worst + UNIFORMITY_FLOOR) / (reference + UNIFORMITY_FLOOR);
    UniformityVerdict {
        name,
        reference,
        worst,
        factor: ratio,
        threshold: factor,
        pass: finite && ratio <= factor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn report(value: f64, extremum: Extremum) -> BoundReport {
        BoundReport::from_trace("x", extremum, vec![[0.1, value], [0.2, value]], None)
    }

    #[test]
    fn aggregation_and_window() {
        let r = BoundReport::from_trace("a", Extremum::Inf, vec![[0.5, 2.0], [1.0, -1.0]], Some(-2.0));
        assert_eq!(r.window, [0.5, 1.0]);
        assert_eq!(r.sup_or_inf, -1.0);
        assert!(r.pass);
        let bad = BoundReport::from_trace("b", Extremum::Sup, vec![[0.5, f64::NAN]], None);
        assert!(!bad.pass);
    }

    #[test]
    fn gate_uses_controlled_direction() {
        let a = report(1.0, Extremum::Sup);
        let b = report(1.2, Extremum::Sup);
        let c = report(2.0, Extremum::Sup);
        assert!(uniformity_gate(&[&a, &b], 1.25).pass);
        assert!(!uniformity_gate(&[&a, &c], 1.25).pass);
        // a lower bound that rises is harmless
        let d = report(-1.0, Extremum::Inf);
        let e = report(0.5, Extremum::Inf);
        assert!(uniformity_gate(&[&d, &e], 1.25).pass);
        let f = report(-3.0, Extremum::Inf);
        assert!(!uniformity_gate(&[&d, &f], 1.25).pass);
    }

    #[test]
    fn csv_has_one_row_per_checkpoint() {
        let mut buf = Vec::new();
        report(1.5, Extremum::Sup).write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 3);
        assert!(text.contains("x,0.1,1.5"));
    }
}

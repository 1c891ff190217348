//! Model backgrounds, initial data and the standing-hypothesis checks.

mod background;
mod curvature;
mod hypotheses;
mod initial;

pub use background::{metric_profile, Background, BackgroundKind, MetricCoefficient};
pub use curvature::{background_metric, einstein_defect, ric_of_metric, EigenField};
pub use hypotheses::{
    check_hypotheses, tr_growth_check, AuxPotential, GrowthReport, HypothesisReport, HypothesisSpec,
    Verdict, GROWTH_LIMIT_TOL,
};
pub use initial::{InitialData, Profile};

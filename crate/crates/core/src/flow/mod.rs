//! Discretization and time stepping of the potential flow.

mod boundary;
mod convert;
mod cutoff;
mod run;
mod scheme;

pub use boundary::{boundary_value, homogeneous_potential, homogeneous_velocity};
pub use convert::{
    from_unnormalized, state_from_unnormalized, state_to_unnormalized, step_unnormalized, to_unnormalized,
};
pub use cutoff::{cutoff_eta, cutoff_eta_derivatives, CUTOFF_C1};
pub use run::{potential_integral, run, PotentialReconstruction, RunSpec, Trajectory};
pub use scheme::{
    build_alpha, chern_laplacian_radial, hessian_ratios, ma_log_ratio, regularize_initial, FlowProblem,
    FlowState, Frame, Regularization, SchemeConfig, StepRecord,
};
pub(crate) use scheme::Operators;

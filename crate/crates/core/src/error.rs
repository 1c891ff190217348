use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FlowError {
    #[error("coordinate {value} outside the model domain [0, 1)")]
    Domain { value: f64 },

    #[error("grid needs at least {min} nodes, got {got}")]
    GridSize { min: usize, got: usize },

    #[error("invalid parameter: {0}")]
    Parameter(String),

    #[error("non-positive metric eigenvalue {value:e} at node {node}")]
    Positivity { node: usize, value: f64 },

    #[error("Newton failed to converge at t = {t}: residual {residual:e} after {iterations} iterations")]
    StepFailure {
        t: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("hypothesis check failed: {0}")]
    Hypothesis(String),

    #[error("degenerate initial data with eps = 0 requires the regularization ladder")]
    LadderRequired,

    #[error("trajectory too short: need {needed} states, got {got}")]
    Resolution { needed: usize, got: usize },

    #[error("window [{lo}, {hi}] is not inside the positivity set of the initial data")]
    Window { lo: f64, hi: f64 },

    #[error("run eps = {eps}, rho_hat_max = {rho_hat_max} failed: {source}")]
    Ladder {
        eps: f64,
        rho_hat_max: f64,
        #[source]
        source: Box<FlowError>,
    },
}

pub type Result<T> = std::result::Result<T, FlowError>;

use thiserror::Error;

/// Errors raised across the solver pipeline.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("singular matrix: pivot {pivot:e} below threshold {threshold:e} at column {column}")]
    SingularMatrix {
        column: usize,
        pivot: f64,
        threshold: f64,
    },
    #[error("matrix is not symmetric (relative asymmetry {0:e})")]
    NotSymmetric(f64),
    #[error("matrix is not positive definite (failed at pivot {0})")]
    NotSpd(usize),
    #[error("eigenvalue iteration did not converge")]
    NoConvergence,
    #[error("non-finite value in {0}")]
    NonFinite(&'static str),
    #[error("algebraic block is singular, the DAE is not of index one")]
    IndexTooHigh,
    #[error("model failed validation: {0}")]
    InvalidModel(String),
    #[error("invalid time grid: {0}")]
    InvalidGrid(String),
    #[error("time step system singular on interval {interval}")]
    SingularStep { interval: usize },
    #[error("grid mismatch between primal and adjoint")]
    GridMismatch,
    #[error("all indicators vanish, nothing to mark")]
    AllZero,
    #[error("bisection would produce a step below {min_step:e}")]
    StepUnderflow { min_step: f64 },
    #[error("marked set did not stabilize before the sweep limit")]
    NoStabilization,
    #[error("reference error |J_ref - J_k| = {0:e} too small for an effectivity index")]
    DegenerateError(f64),
    #[error("invalid circuit topology: {0}")]
    TopologyError(String),
    #[error("target {target:e} not reached within N <= {max_n}")]
    TargetUnreachable { target: f64, max_n: usize },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("input signal: {0}")]
    InvalidInput(String),
    #[error("model file: {0}")]
    ModelFile(String),
}

pub type Result<T> = std::result::Result<T, Error>;

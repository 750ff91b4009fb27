//! Discrete adjoint: backward recursion, Block-Jacobi iteration and contraction diagnostics.

mod contraction;
mod solve;
mod stabilization;

pub use contraction::{amplification_radius, contraction_report, ContractionReport};
pub use solve::{
    adjoint_stability_bound, adjoint_stability_functional, block_residual, jacobi_solve, solve_adjoint_direct,
    AdjointMethod, AdjointSolve, JacobiIteration, JACOBI_STOP_TOL,
};
pub use stabilization::{marked_set_stabilization, Stabilization, SweepRecord, DEFAULT_WINDOW};

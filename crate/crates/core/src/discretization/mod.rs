//! Time grids, the dG(0) primal scheme and the energy-balance goal functional.

mod goal;
mod grid;
mod primal;

pub use goal::{goal_value, local_residuals, trajectory_table, GoalEvaluation};
pub use grid::{PiecewiseConstant, TimeGrid, MIN_STEP_REL};
pub use primal::{
    energy_identity, interval_forcing, interval_moments, primal_stability_bound, scaled_recursion_pair,
    shift_constant, solve_primal, stability_functional, StepCache,
};

//! Benchmark systems and the studies run on them.

mod random;
mod studies;
mod systems;

pub use studies::{
    convergence_study, cost_table, cost_to_target, jacobi_study, jacobi_table, loglog_interpolate, loglog_slope,
    state_energy_error, tail_slope, StateReference, tradeoff_study, tradeoff_table, uniform_threshold, waveform, ConvergenceStudy,
    CostRow, JacobiRow, TradeoffTrajectory, Waveform, FIT_TAIL, THRESHOLD_REL,
};
pub use random::random_system;
pub use systems::{build_academic, build_transmission_line, ladder_incidence, TransmissionLineSpec};

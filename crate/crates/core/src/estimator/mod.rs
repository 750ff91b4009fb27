//! Weight reconstruction, DWR indicators, marking, refinement and the adaptive loop.

mod adaptive;
mod indicators;
mod marking;
mod residuals;
mod weights;

pub use adaptive::{
    adaptive_loop, adaptive_loop_observed, effectivity, effectivity_index, reference_qoi, AdaptiveConfig,
    AdaptiveRun, EffectivityRow, IterationRecord, IterationState, Problem, Termination, DEFAULT_REFERENCE_N,
};
pub use indicators::{indicator_table, indicators, IndicatorSet, IndicatorVariant};
pub use marking::{bisect, dorfler_mark};
pub use residuals::{dual_residual_diagnostic, primal_residual, Probe};
pub use weights::{reconstruct_weight, WeightFunction};

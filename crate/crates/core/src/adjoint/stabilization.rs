use crate::discretization::{GoalEvaluation, PiecewiseConstant};
use crate::error::{Error, Result};
use crate::estimator::{dorfler_mark, indicators, IndicatorVariant};
use crate::model::ReducedSystem;
use crate::numerics;
use crate::scalar::Real;

use super::solve::{solve_adjoint_direct, JacobiIteration};

/// Number of consecutive sweeps whose marked set must equal the exact one.
pub const DEFAULT_WINDOW: usize = 4;

#[derive(Clone, Debug, PartialEq)]
pub struct SweepRecord<T> {
    pub sweep: usize,
    /// `‖Z^(ℓ) - Z‖ / ‖Z‖` in the E11-norm summed over intervals.
    pub adjoint_error: T,
    /// `Σ|η^(ℓ) - η| / Σ|η|`.
    pub indicator_error: T,
    pub matches: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stabilization<T> {
    /// First sweep from which the marked set agrees with the exact one over the whole window.
    pub k_star: usize,
    pub marked_exact: Vec<usize>,
    pub history: Vec<SweepRecord<T>>,
}

impl<T> Stabilization<T> {
    /// `N / k*`.
    pub fn speedup(&self, n: usize) -> f64 {
        n as f64 / self.k_star as f64
    }
}

/// Runs Jacobi sweeps until the Dörfler set of the iterate matches the exact one for `window` sweeps.
///
/// After `N` sweeps the iterate is exact, so without `max_sweeps` the result always has `k* ≤ N`.
/// [`Error::NoStabilization`] is returned only when `max_sweeps` cuts the run short.
#[allow(clippy::too_many_arguments)]
pub fn marked_set_stabilization<T: Real>(
    red: &ReducedSystem<T>,
    xk: &PiecewiseConstant<T>,
    goal: &GoalEvaluation<T>,
    variant: IndicatorVariant,
    theta: T,
    window: usize,
    max_sweeps: Option<usize>,
) -> Result<Stabilization<T>> {
    if window == 0 {
        return Err(Error::InvalidParameter("window must be at least 1".into()));
    }
    let grid = xk.grid();
    let n = grid.len();
    let exact = solve_adjoint_direct(red, grid, &goal.sources)?;
    let eta_exact = indicators(red, xk, &exact.z, variant)?;
    let marked_exact = dorfler_mark(&eta_exact, theta)?;
    let z_norm = exact.z.values().iter().map(|v| red.e11().quad_form(v)).sum::<T>().sqrt();
    let eta_norm = eta_exact.abs_sum();
    let rel = |num: T, den: T| if den > T::zero() { num / den } else { num };

    let mut it = JacobiIteration::new(red, grid, &goal.sources)?;
    let mut history = Vec::new();
    let mut streak_start: Option<usize> = None;
    loop {
        if max_sweeps.is_some_and(|m| it.sweeps() >= m) {
            return Err(Error::NoStabilization);
        }
        it.sweep()?;
        let l = it.sweeps();
        let z = PiecewiseConstant::new(grid.clone(), vec![T::zero(); red.dim()], it.current().to_vec())?;
        let eta = indicators(red, xk, &z, variant)?;
        let marked = match dorfler_mark(&eta, theta) {
            Ok(m) => m,
            Err(Error::AllZero) => Vec::new(),
            Err(e) => return Err(e),
        };
        let dz: T = it
            .current()
            .iter()
            .zip(exact.z.values())
            .map(|(a, b)| red.e11().quad_form(&numerics::sub(a, b)))
            .sum();
        let deta: T = eta.eta.iter().zip(&eta_exact.eta).map(|(a, b)| (*a - *b).abs()).sum();
        let matches = marked == marked_exact;
        history.push(SweepRecord {
            sweep: l,
            adjoint_error: rel(dz.sqrt(), z_norm),
            indicator_error: rel(deta, eta_norm),
            matches,
        });
        streak_start = match (matches, streak_start) {
            (true, None) => Some(l),
            (true, s) => s,
            (false, _) => None,
        };
        if let Some(s) = streak_start {
            if l + 1 - s >= window || l >= n {
                return Ok(Stabilization {
                    k_star: s,
                    marked_exact,
                    history,
                });
            }
        }
        if l >= n {
            // Exact iterate, yet the marked set differs: ties resolved differently by round-off.
            return Ok(Stabilization {
                k_star: n,
                marked_exact,
                history,
            });
        }
    }
}

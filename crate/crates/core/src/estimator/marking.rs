use crate::discretization::{TimeGrid, MIN_STEP_REL};
use crate::error::{Error, Result};
use crate::scalar::Real;

use super::indicators::IndicatorSet;

/// Smallest greedy prefix of intervals, by decreasing `|η_j|`, carrying a `theta` share of `Σ|η_j|`.
///
/// Ties go to the lower index. The result is sorted ascending.
pub fn dorfler_mark<T: Real>(ind: &IndicatorSet<T>, theta: T) -> Result<Vec<usize>> {
    if !(theta > T::zero() && theta < T::one()) {
        return Err(Error::InvalidParameter("theta must lie in (0, 1)".into()));
    }
    let abs = ind.abs();
    if abs.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("indicators"));
    }
    let mut order: Vec<usize> = (0..abs.len()).filter(|&j| abs[j] > T::zero()).collect();
    if order.is_empty() {
        return Err(Error::AllZero);
    }
    order.sort_by(|&a, &b| abs[b].partial_cmp(&abs[a]).expect("finite").then(a.cmp(&b)));
    let total: T = order.iter().map(|&j| abs[j]).sum();
    let goal = theta * total;
    let mut acc = T::zero();
    let mut marked = Vec::new();
    for &j in &order {
        acc += abs[j];
        marked.push(j);
        if acc >= goal {
            break;
        }
    }
    marked.sort_unstable();
    Ok(marked)
}

/// Splits each marked interval at its midpoint.
pub fn bisect<T: Real>(grid: &TimeGrid<T>, marked: &[usize]) -> Result<TimeGrid<T>> {
    let n = grid.len();
    if marked.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("marked set must be strictly increasing".into()));
    }
    if marked.last().is_some_and(|&j| j >= n) {
        return Err(Error::InvalidParameter("marked interval out of range".into()));
    }
    let min_step = T::lit(MIN_STEP_REL) * grid.horizon();
    let nodes = grid.nodes();
    let mut out = Vec::with_capacity(nodes.len() + marked.len());
    out.push(nodes[0]);
    let mut it = marked.iter().peekable();
    for j in 0..n {
        if it.peek() == Some(&&j) {
            it.next();
            let half = T::lit(0.5) * grid.step(j);
            if half < min_step {
                return Err(Error::StepUnderflow {
                    min_step: min_step.to_f64_lossy(),
                });
            }
            out.push(nodes[j] + half);
        }
        out.push(nodes[j + 1]);
    }
    TimeGrid::new(out)
}

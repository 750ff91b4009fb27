use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{interval_forcing, GoalEvaluation, PiecewiseConstant};
use crate::error::{Error, Result};
use crate::export::CsvTable;
use crate::model::ReducedSystem;
use crate::numerics;
use crate::scalar::Real;

use super::weights::reconstruct_weight;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum IndicatorVariant {
    /// Primal residual tested against the reconstructed weight `z̃ - z`.
    Full,
    /// Adjoint differences `Δz_j = z^j - z^{j-1}` (zero on the first interval).
    #[default]
    Simplified,
}

/// Signed DWR indicators on one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct IndicatorSet<T> {
    pub eta: Vec<T>,
    pub variant: IndicatorVariant,
}

impl<T: Real> IndicatorSet<T> {
    pub fn new(eta: Vec<T>, variant: IndicatorVariant) -> Self {
        Self { eta, variant }
    }

    pub fn len(&self) -> usize {
        self.eta.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eta.is_empty()
    }

    /// `Σ η_j`.
    pub fn sum(&self) -> T {
        self.eta.iter().copied().sum()
    }

    /// `|Σ η_j|`, the stopping quantity.
    pub fn total(&self) -> T {
        self.sum().abs()
    }

    pub fn abs(&self) -> Vec<T> {
        self.eta.iter().map(|e| e.abs()).collect()
    }

    pub fn abs_sum(&self) -> T {
        self.eta.iter().map(|e| e.abs()).sum()
    }
}

/// Signed indicators of a primal/adjoint pair sharing a grid.
pub fn indicators<T: Real>(
    red: &ReducedSystem<T>,
    xk: &PiecewiseConstant<T>,
    z: &PiecewiseConstant<T>,
    variant: IndicatorVariant,
) -> Result<IndicatorSet<T>> {
    if xk.grid() != z.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = xk.grid();
    let half = T::lit(0.5);
    let weights = match variant {
        IndicatorVariant::Full => Some(reconstruct_weight(z)),
        IndicatorVariant::Simplified => None,
    };
    let eta = (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let (a, b) = grid.interval(j);
            let k = b - a;
            let (_, fbar) = interval_forcing(red, a, b);
            let interior = numerics::sub(&fbar, &red.s().mul_vec(xk.value(j)));
            let ejump = red.e11().mul_vec(&xk.jump(j));
            match &weights {
                Some(w) => {
                    let avg = numerics::scaled(half * k, &numerics::add(&w.left[j], &w.right[j]));
                    numerics::dot(&interior, &avg) - numerics::dot(&ejump, &w.left[j])
                }
                None => {
                    if j == 0 {
                        return T::zero();
                    }
                    let dz = numerics::sub(z.value(j), z.value(j - 1));
                    half * k * numerics::dot(&interior, &dz) + numerics::dot(&ejump, &dz)
                }
            }
        })
        .collect();
    Ok(IndicatorSet { eta, variant })
}

/// Columns `t_mid, k, eta, abs_G, norm_z, abs_G_times_norm_z`.
pub fn indicator_table<T: Real>(
    ind: &IndicatorSet<T>,
    goal: &GoalEvaluation<T>,
    z: &PiecewiseConstant<T>,
) -> CsvTable {
    let grid = z.grid();
    let mut t = CsvTable::new(["t_mid", "k", "eta", "abs_G", "norm_z", "abs_G_times_norm_z"]);
    for j in 0..grid.len() {
        let g = goal.residuals[j].abs();
        let nz = numerics::norm2(z.value(j));
        t.push_nums(&[
            grid.midpoint(j).to_f64_lossy(),
            grid.step(j).to_f64_lossy(),
            ind.eta[j].to_f64_lossy(),
            g.to_f64_lossy(),
            nz.to_f64_lossy(),
            (g * nz).to_f64_lossy(),
        ]);
    }
    t
}

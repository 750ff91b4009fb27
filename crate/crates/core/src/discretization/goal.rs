use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::export::{fmt_num, CsvTable};
use crate::model::ReducedSystem;
use crate::numerics;
use crate::scalar::Real;

use super::grid::PiecewiseConstant;

/// Energy-balance residuals of a discrete trajectory and the adjoint sources they induce.
#[derive(Clone, Debug, PartialEq)]
pub struct GoalEvaluation<T> {
    /// `G_j` per interval.
    pub residuals: Vec<T>,
    /// `Σ G_j²`.
    pub qoi: T,
    pub rho: T,
    /// `qoi + ρ Σ k_j H(x^j)`.
    pub augmented: T,
    /// Derivative of the augmented functional in `x^j`.
    pub sources: Vec<Vec<T>>,
}

/// `G_j = ∫ g(t, x^j) dt + H(x^j) - H(x^{j-1})`, the qoi and the adjoint sources.
pub fn local_residuals<T: Real>(red: &ReducedSystem<T>, xk: &PiecewiseConstant<T>, rho: T) -> Result<GoalEvaluation<T>> {
    if !(rho >= T::zero()) {
        return Err(Error::InvalidParameter("rho must be non-negative".into()));
    }
    if xk.dim() != red.dim() {
        return Err(Error::Dimension("trajectory dimension".into()));
    }
    let grid = xk.grid();
    let n = grid.len();
    let per: Vec<(T, Vec<T>, T)> = (0..n)
        .into_par_iter()
        .map(|j| {
            let (a, b) = grid.interval(j);
            let x = xk.value(j);
            let (gint, grad) = red.imbalance_integral(a, b, x);
            let h = red.reduced_hamiltonian(x);
            let g = gint + h - red.reduced_hamiltonian(xk.previous(j));
            (g, grad, h)
        })
        .collect();
    let residuals: Vec<T> = per.iter().map(|p| p.0).collect();
    let qoi: T = residuals.iter().map(|&g| g * g).sum();
    let energy: T = (0..n).map(|j| grid.step(j) * per[j].2).sum();
    let two = T::lit(2.0);
    let sources: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|j| {
            let g = residuals[j];
            let g_next = if j + 1 < n { residuals[j + 1] } else { T::zero() };
            let ex = red.hamiltonian_grad(xk.value(j));
            let mut src = numerics::scaled(two * g, &per[j].1);
            numerics::axpy(two * (g - g_next) + rho * grid.step(j), &ex, &mut src);
            src
        })
        .collect();
    Ok(GoalEvaluation {
        residuals,
        qoi,
        rho,
        augmented: qoi + rho * energy,
        sources,
    })
}

/// Augmented goal value alone, used by gradient checks.
pub fn goal_value<T: Real>(red: &ReducedSystem<T>, xk: &PiecewiseConstant<T>, rho: T) -> Result<T> {
    Ok(local_residuals(red, xk, rho)?.augmented)
}

/// Trajectory table with columns `t, k, x_1..x_r, G`.
pub fn trajectory_table<T: Real>(xk: &PiecewiseConstant<T>, goal: &GoalEvaluation<T>) -> CsvTable {
    let r = xk.dim();
    let mut header = vec!["t".to_string(), "k".to_string()];
    header.extend((1..=r).map(|i| format!("x{i}")));
    header.push("G".into());
    let mut table = CsvTable::new(header);
    let grid = xk.grid();
    for j in 0..grid.len() {
        let mut row = vec![fmt_num(grid.nodes()[j + 1].to_f64_lossy()), fmt_num(grid.step(j).to_f64_lossy())];
        row.extend(xk.value(j).iter().map(|v| fmt_num(v.to_f64_lossy())));
        row.push(fmt_num(goal.residuals[j].to_f64_lossy()));
        table.push_row(row);
    }
    table
}

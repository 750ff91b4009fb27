use crate::discretization::{PiecewiseConstant, TimeGrid};
use crate::numerics;
use crate::scalar::Real;

/// Continuous piecewise linear adjoint reconstruction and the endpoint weights `w = z̃ - z`.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightFunction<T> {
    pub grid: TimeGrid<T>,
    /// `z̃(t_i)` for `i = 0..=N`.
    pub nodal: Vec<Vec<T>>,
    /// `w(t_j⁺)` on interval `j`.
    pub left: Vec<Vec<T>>,
    /// `w(t_{j+1}⁻)` on interval `j`.
    pub right: Vec<Vec<T>>,
}

/// Nodal values `z̃(t_0) = z^0`, interior midpoint averages, `z̃(t_N) = 0`.
pub fn reconstruct_weight<T: Real>(z: &PiecewiseConstant<T>) -> WeightFunction<T> {
    let grid = z.grid().clone();
    let n = grid.len();
    let r = z.dim();
    let half = T::lit(0.5);
    let mut nodal = Vec::with_capacity(n + 1);
    nodal.push(z.value(0).to_vec());
    for i in 1..n {
        nodal.push(numerics::scaled(half, &numerics::add(z.value(i - 1), z.value(i))));
    }
    nodal.push(vec![T::zero(); r]);
    let left = (0..n).map(|j| numerics::sub(&nodal[j], z.value(j))).collect();
    let right = (0..n).map(|j| numerics::sub(&nodal[j + 1], z.value(j))).collect();
    WeightFunction {
        grid,
        nodal,
        left,
        right,
    }
}

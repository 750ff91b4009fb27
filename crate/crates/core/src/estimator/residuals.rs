use rayon::prelude::*;

use crate::discretization::{local_residuals, PiecewiseConstant};
use crate::error::{Error, Result};
use crate::model::ReducedSystem;
use crate::numerics;
use crate::scalar::Real;

/// Test function for the residual functionals.
#[derive(Clone, Debug, PartialEq)]
pub enum Probe<T> {
    /// One value per interval.
    Constant(Vec<Vec<T>>),
    /// Continuous, piecewise linear; one value per node `t_0..t_N`.
    Linear(Vec<Vec<T>>),
}

impl<T: Real> Probe<T> {
    fn check(&self, n: usize, r: usize) -> Result<()> {
        let (vals, want) = match self {
            Probe::Constant(v) => (v, n),
            Probe::Linear(v) => (v, n + 1),
        };
        if vals.len() != want {
            return Err(Error::GridMismatch);
        }
        if vals.iter().any(|v| v.len() != r) {
            return Err(Error::Dimension("probe vector length".into()));
        }
        Ok(())
    }

    /// `v(t_j⁺)` on interval `j`.
    pub fn left(&self, j: usize) -> &[T] {
        match self {
            Probe::Constant(v) | Probe::Linear(v) => &v[j],
        }
    }

    /// `v(t_{j+1}⁻)` on interval `j`.
    pub fn right(&self, j: usize) -> &[T] {
        match self {
            Probe::Constant(v) => &v[j],
            Probe::Linear(v) => &v[j + 1],
        }
    }
}

// ∫ u(t) (t - a)/(b - a) dt by three-point Gauss-Legendre.
fn first_weighted_moment<T: Real>(red: &ReducedSystem<T>, a: T, b: T) -> T {
    let h = b - a;
    let c = T::lit(0.5) * (a + b);
    let s = T::lit((0.6f64).sqrt()) * T::lit(0.5) * h;
    let nodes = [(c - s, T::lit(5.0 / 18.0)), (c, T::lit(8.0 / 18.0)), (c + s, T::lit(5.0 / 18.0))];
    nodes
        .iter()
        .map(|&(t, w)| w * h * red.u(t) * (t - a) / h)
        .sum()
}

/// `∫_a^b ⟨u(t) f, v(t)⟩ dt` for `v` linear between `vl` and `vr`, exact in the constant part.
fn forcing_pairing<T: Real>(red: &ReducedSystem<T>, a: T, b: T, f: &[T], vl: &[T], vr: &[T]) -> T {
    let (m1, _) = red.moments(a, b);
    let base = m1 * numerics::dot(f, vl);
    if vl == vr {
        return base;
    }
    base + first_weighted_moment(red, a, b) * numerics::dot(f, &numerics::sub(vr, vl))
}

fn trapezoid<T: Real>(k: T, vl: &[T], vr: &[T]) -> Vec<T> {
    numerics::scaled(T::lit(0.5) * k, &numerics::add(vl, vr))
}

/// Primal residual `Σ ∫⟨F - S x^j, v⟩ - ⟨E11 [x]_j, v(t_j⁺)⟩`.
///
/// Vanishes for constant probes up to round-off.
pub fn primal_residual<T: Real>(red: &ReducedSystem<T>, xk: &PiecewiseConstant<T>, probe: &Probe<T>) -> Result<T> {
    let grid = xk.grid();
    probe.check(grid.len(), red.dim())?;
    let f = red.forcing_vector();
    Ok((0..grid.len())
        .into_par_iter()
        .map(|j| {
            let (a, b) = grid.interval(j);
            let (vl, vr) = (probe.left(j), probe.right(j));
            let sx = red.s().mul_vec(xk.value(j));
            forcing_pairing(red, a, b, f, vl, vr)
                - numerics::dot(&sx, &trapezoid(b - a, vl, vr))
                - numerics::dot(&red.e11().mul_vec(&xk.jump(j)), vl)
        })
        .sum())
}

/// Dual residual of the adjoint pair for goal weight `rho`.
///
/// Interior terms `∫⟨2G_j ∇g(t, x^j) + ρ E11 x^j - Sᵀ z^j, v⟩`, then at each right endpoint
/// `⟨2(G_j - G_{j+1}) E11 x^j - E11 (z^j - z^{j+1}), v(t_{j+1}⁻)⟩` with `G_N = 0`, `z^N = 0`.
/// The last of these is the terminal term at `T`.
pub fn dual_residual_diagnostic<T: Real>(
    red: &ReducedSystem<T>,
    xk: &PiecewiseConstant<T>,
    z: &PiecewiseConstant<T>,
    rho: T,
    probe: &Probe<T>,
) -> Result<T> {
    if xk.grid() != z.grid() {
        return Err(Error::GridMismatch);
    }
    let grid = xk.grid();
    let n = grid.len();
    probe.check(n, red.dim())?;
    let goal = local_residuals(red, xk, rho)?;
    let two = T::lit(2.0);
    let st = red.s().transpose();
    Ok((0..n)
        .into_par_iter()
        .map(|j| {
            let (a, b) = grid.interval(j);
            let k = b - a;
            let (vl, vr) = (probe.left(j), probe.right(j));
            let x = xk.value(j);
            let g = goal.residuals[j];
            let g_next = if j + 1 < n { goal.residuals[j + 1] } else { T::zero() };
            let ex = red.e11().mul_vec(x);
            let vint = trapezoid(k, vl, vr);

            // ∇g(t, x) = 2 Kxx x + u(t) cx
            let (_, kx2) = red.imbalance_from_moments(T::one(), T::zero(), T::zero(), x);
            let (_, cx) = red.imbalance_from_moments(T::zero(), T::one(), T::zero(), x);
            let mut interior = two * g * (numerics::dot(&kx2, &vint) + forcing_pairing(red, a, b, &cx, vl, vr));
            interior += rho * numerics::dot(&ex, &vint);
            interior -= numerics::dot(&st.mul_vec(z.value(j)), &vint);

            let mut dz = z.value(j).to_vec();
            if j + 1 < n {
                numerics::axpy(-T::one(), z.value(j + 1), &mut dz);
            }
            let mut nodal = numerics::scaled(two * (g - g_next), &ex);
            numerics::axpy(-T::one(), &red.e11().mul_vec(&dz), &mut nodal);
            interior + numerics::dot(&nodal, vr)
        })
        .sum())
}

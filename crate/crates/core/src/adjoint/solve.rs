use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::discretization::{PiecewiseConstant, StepCache, TimeGrid};
use crate::error::{Error, Result};
use crate::model::ReducedSystem;
use crate::numerics::{self, lambda_min_sym};
use crate::scalar::Real;

/// Relative E11-norm update below which a standalone Jacobi run stops.
pub const JACOBI_STOP_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum AdjointMethod {
    Direct,
    Jacobi { sweeps: usize },
}

/// Discrete adjoint on a grid.
#[derive(Clone, Debug)]
pub struct AdjointSolve<T> {
    /// `z^j` per interval; the left datum is unused and zero.
    pub z: PiecewiseConstant<T>,
    pub method: AdjointMethod,
    /// `‖Aᵀz - R‖ / ‖R‖` of the assembled block system (absolute when `R = 0`).
    pub residual: T,
}

fn check_sources<T: Real>(red: &ReducedSystem<T>, grid: &TimeGrid<T>, sources: &[Vec<T>]) -> Result<()> {
    if sources.len() != grid.len() {
        return Err(Error::GridMismatch);
    }
    if sources.iter().any(|s| s.len() != red.dim()) {
        return Err(Error::Dimension("source vector length".into()));
    }
    Ok(())
}

fn adjoint_cache<T: Real>(red: &ReducedSystem<T>, grid: &TimeGrid<T>) -> Result<StepCache<T>> {
    StepCache::build(red.e11(), &red.s().transpose(), &grid.steps()).map_err(|_| Error::SingularStep { interval: 0 })
}

fn wrap<T: Real>(
    red: &ReducedSystem<T>,
    grid: &TimeGrid<T>,
    sources: &[Vec<T>],
    values: Vec<Vec<T>>,
    method: AdjointMethod,
) -> Result<AdjointSolve<T>> {
    let z = PiecewiseConstant::new(grid.clone(), vec![T::zero(); red.dim()], values)?;
    let residual = block_residual(red, &z, sources)?;
    Ok(AdjointSolve { z, method, residual })
}

/// Backward recursion `(E11 + k_j Sᵀ) z^j = E11 z^{j+1} + R_j` with `z^{N+1} = 0`.
pub fn solve_adjoint_direct<T: Real>(
    red: &ReducedSystem<T>,
    grid: &TimeGrid<T>,
    sources: &[Vec<T>],
) -> Result<AdjointSolve<T>> {
    check_sources(red, grid, sources)?;
    let cache = adjoint_cache(red, grid)?;
    let n = grid.len();
    let mut values = vec![Vec::new(); n];
    let mut next = vec![T::zero(); red.dim()];
    for j in (0..n).rev() {
        let rhs = numerics::add(&red.e11().mul_vec(&next), &sources[j]);
        let lu = cache.get(grid.step(j)).ok_or(Error::SingularStep { interval: j })?;
        next = lu.solve(&rhs).map_err(|_| Error::SingularStep { interval: j })?;
        values[j] = next.clone();
    }
    wrap(red, grid, sources, values, AdjointMethod::Direct)
}

/// `‖Aᵀz - R‖ / ‖R‖` for the bidiagonal block system.
pub fn block_residual<T: Real>(red: &ReducedSystem<T>, z: &PiecewiseConstant<T>, sources: &[Vec<T>]) -> Result<T> {
    let grid = z.grid();
    check_sources(red, grid, sources)?;
    let n = grid.len();
    let st = red.s().transpose();
    let (num, den) = (0..n)
        .into_par_iter()
        .map(|j| {
            let zj = z.value(j);
            let mut r = red.e11().mul_vec(zj);
            numerics::axpy(grid.step(j), &st.mul_vec(zj), &mut r);
            if j + 1 < n {
                let e_next = red.e11().mul_vec(z.value(j + 1));
                numerics::axpy(-T::one(), &e_next, &mut r);
            }
            numerics::axpy(-T::one(), &sources[j], &mut r);
            (numerics::dot(&r, &r), numerics::dot(&sources[j], &sources[j]))
        })
        .reduce(|| (T::zero(), T::zero()), |a, b| (a.0 + b.0, a.1 + b.1));
    let num = num.sqrt();
    let den = den.sqrt();
    Ok(if den > T::zero() { num / den } else { num })
}

/// Block-Jacobi iteration `D Z^(ℓ+1) = U Z^(ℓ) + R` from `Z^(0) = 0`.
///
/// Factorizations are built once; each sweep is a parallel map over intervals.
pub struct JacobiIteration<'a, T> {
    red: &'a ReducedSystem<T>,
    grid: &'a TimeGrid<T>,
    sources: &'a [Vec<T>],
    cache: StepCache<T>,
    current: Vec<Vec<T>>,
    sweeps: usize,
}

impl<'a, T: Real> JacobiIteration<'a, T> {
    pub fn new(red: &'a ReducedSystem<T>, grid: &'a TimeGrid<T>, sources: &'a [Vec<T>]) -> Result<Self> {
        check_sources(red, grid, sources)?;
        Ok(Self {
            red,
            grid,
            sources,
            cache: adjoint_cache(red, grid)?,
            current: vec![vec![T::zero(); red.dim()]; grid.len()],
            sweeps: 0,
        })
    }

    pub fn sweeps(&self) -> usize {
        self.sweeps
    }

    pub fn current(&self) -> &[Vec<T>] {
        &self.current
    }

    /// One sweep; returns the relative E11-norm of the update.
    pub fn sweep(&mut self) -> Result<T> {
        let n = self.grid.len();
        let e11 = self.red.e11();
        let prev = &self.current;
        let next: Result<Vec<Vec<T>>> = (0..n)
            .into_par_iter()
            .map(|j| {
                let mut rhs = self.sources[j].clone();
                if j + 1 < n {
                    numerics::axpy(T::one(), &e11.mul_vec(&prev[j + 1]), &mut rhs);
                }
                let lu = self.cache.get(self.grid.step(j)).ok_or(Error::SingularStep { interval: j })?;
                lu.solve(&rhs).map_err(|_| Error::SingularStep { interval: j })
            })
            .collect();
        let next = next?;
        let (du, nz) = next
            .iter()
            .zip(prev)
            .map(|(a, b)| {
                let d = numerics::sub(a, b);
                (e11.quad_form(&d), e11.quad_form(a))
            })
            .fold((T::zero(), T::zero()), |s, v| (s.0 + v.0, s.1 + v.1));
        self.current = next;
        self.sweeps += 1;
        Ok(if nz > T::zero() { (du / nz).sqrt() } else { du.sqrt() })
    }

    pub fn into_solve(self) -> Result<AdjointSolve<T>> {
        let method = AdjointMethod::Jacobi { sweeps: self.sweeps };
        wrap(self.red, self.grid, self.sources, self.current, method)
    }
}

/// At most `sweeps` Jacobi sweeps, stopping early once the update is below [`JACOBI_STOP_TOL`].
pub fn jacobi_solve<T: Real>(
    red: &ReducedSystem<T>,
    grid: &TimeGrid<T>,
    sources: &[Vec<T>],
    sweeps: usize,
) -> Result<AdjointSolve<T>> {
    if sweeps == 0 {
        return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
    }
    let mut it = JacobiIteration::new(red, grid, sources)?;
    for _ in 0..sweeps {
        let upd = it.sweep()?;
        if upd < T::lit(JACOBI_STOP_TOL) {
            break;
        }
    }
    it.into_solve()
}

/// `‖z^1‖² + Σ_{j<N} ‖z^{j+1} - z^j‖² + Σ_{j<N} k_j ‖z^j‖²` (Euclidean, 1-based intervals).
pub fn adjoint_stability_functional<T: Real>(z: &PiecewiseConstant<T>) -> T {
    let n = z.grid().len();
    let sq = |v: &[T]| numerics::dot(v, v);
    let mut total = sq(z.value(0));
    for j in 0..n.saturating_sub(1) {
        total += sq(&numerics::sub(z.value(j + 1), z.value(j))) + z.grid().step(j) * sq(z.value(j));
    }
    total
}

/// Right-hand side of the adjoint stability estimate with shift `mu`.
pub fn adjoint_stability_bound<T: Real>(
    red: &ReducedSystem<T>,
    grid: &TimeGrid<T>,
    sources: &[Vec<T>],
    mu: T,
) -> Result<T> {
    let am = red.alpha() + mu;
    if !(am > T::zero()) {
        return Err(Error::InvalidParameter("alpha + mu must be positive".into()));
    }
    let lmin = lambda_min_sym(red.e11())?;
    let weighted: T = sources
        .iter()
        .enumerate()
        .map(|(j, r)| numerics::dot(r, r) / grid.step(j))
        .sum();
    let c = crate::discretization::shift_constant(mu, grid.horizon());
    Ok(c / ((am * T::lit(0.5)).min(lmin) * am) * weighted)
}

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::model::ReducedSystem;
use crate::numerics::{self, lambda_min_sym, DenseMatrix, LuFactor};
use crate::scalar::Real;

use super::grid::{PiecewiseConstant, TimeGrid};

/// Factorizations of `E11 + k A`, one per distinct step `k`.
#[derive(Clone, Debug)]
pub struct StepCache<T> {
    factors: HashMap<u64, LuFactor<T>>,
}

impl<T: Real> StepCache<T> {
    pub fn build(e11: &DenseMatrix<T>, a: &DenseMatrix<T>, steps: &[T]) -> Result<Self> {
        let mut distinct: Vec<T> = Vec::new();
        let mut seen = std::collections::HashSet::new();
        for &k in steps {
            if seen.insert(k.cache_key()) {
                distinct.push(k);
            }
        }
        let built: Result<Vec<(u64, LuFactor<T>)>> = distinct
            .par_iter()
            .map(|&k| {
                let m = e11.add_scaled(k, a)?;
                LuFactor::new(&m).map(|lu| (k.cache_key(), lu))
            })
            .collect();
        Ok(Self {
            factors: built?.into_iter().collect(),
        })
    }

    pub fn get(&self, k: T) -> Option<&LuFactor<T>> {
        self.factors.get(&k.cache_key())
    }

    pub fn len(&self) -> usize {
        self.factors.len()
    }

    pub fn is_empty(&self) -> bool {
        self.factors.is_empty()
    }
}

/// `(∫F, F̄)` over `(a, b)`.
pub fn interval_forcing<T: Real>(red: &ReducedSystem<T>, a: T, b: T) -> (Vec<T>, Vec<T>) {
    let (m1, _) = red.moments(a, b);
    let integral = numerics::scaled(m1, red.forcing_vector());
    let average = numerics::scaled(T::one() / (b - a), &integral);
    (integral, average)
}

/// Input moments `(∫u, ∫u²)` on every interval.
pub fn interval_moments<T: Real>(red: &ReducedSystem<T>, grid: &TimeGrid<T>) -> Vec<(T, T)> {
    (0..grid.len())
        .into_par_iter()
        .map(|j| {
            let (a, b) = grid.interval(j);
            red.moments(a, b)
        })
        .collect()
}

fn step_recursion<T: Real>(
    red: &ReducedSystem<T>,
    grid: &TimeGrid<T>,
    x10: &[T],
    a: &DenseMatrix<T>,
) -> Result<PiecewiseConstant<T>> {
    if x10.len() != red.dim() {
        return Err(Error::Dimension("initial value length".into()));
    }
    if x10.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("initial value"));
    }
    let steps = grid.steps();
    let cache = StepCache::build(red.e11(), a, &steps).map_err(|_| Error::SingularStep { interval: 0 })?;
    let moments = interval_moments(red, grid);
    let f = red.forcing_vector();
    let mut values = Vec::with_capacity(grid.len());
    let mut prev = x10.to_vec();
    for (j, &k) in steps.iter().enumerate() {
        let mut rhs = red.e11().mul_vec(&prev);
        numerics::axpy(moments[j].0, f, &mut rhs);
        let lu = cache.get(k).ok_or(Error::SingularStep { interval: j })?;
        let x = lu.solve(&rhs).map_err(|_| Error::SingularStep { interval: j })?;
        prev = x.clone();
        values.push(x);
    }
    PiecewiseConstant::new(grid.clone(), x10.to_vec(), values)
}

/// dG(0) primal solve `(E11 + k S) x^j = E11 x^{j-1} + ∫F`.
pub fn solve_primal<T: Real>(red: &ReducedSystem<T>, grid: &TimeGrid<T>, x10: &[T]) -> Result<PiecewiseConstant<T>> {
    step_recursion(red, grid, x10, red.s())
}

/// The primal recursion and its shift by `mu E11`, sharing sources and initial value.
pub fn scaled_recursion_pair<T: Real>(
    red: &ReducedSystem<T>,
    grid: &TimeGrid<T>,
    x10: &[T],
    mu: T,
) -> Result<(PiecewiseConstant<T>, PiecewiseConstant<T>)> {
    if mu < T::zero() {
        return Err(Error::InvalidParameter("mu must be non-negative".into()));
    }
    let plain = solve_primal(red, grid, x10)?;
    let shifted_op = red.s().add_scaled(mu, red.e11())?;
    let shifted = step_recursion(red, grid, x10, &shifted_op)?;
    Ok((plain, shifted))
}

/// `1 + μT + μ max{μT + ½μT², 2μT + 2}`.
pub fn shift_constant<T: Real>(mu: T, horizon: T) -> T {
    let mt = mu * horizon;
    let a = mt + T::lit(0.5) * mt * horizon;
    let b = T::lit(2.0) * mt + T::lit(2.0);
    T::one() + mt + mu * a.max(b)
}

/// `‖x^N‖² + Σ_{j≥1} ‖x^j - x^{j-1}‖² + Σ k_j ‖x^j‖²` over the computed values.
pub fn stability_functional<T: Real>(xs: &PiecewiseConstant<T>) -> T {
    let n = xs.grid().len();
    let sq = |v: &[T]| numerics::dot(v, v);
    let mut total = sq(xs.value(n - 1));
    for j in 1..n {
        total += sq(&numerics::sub(xs.value(j), xs.value(j - 1)));
    }
    for j in 0..n {
        total += xs.grid().step(j) * sq(xs.value(j));
    }
    total
}

/// Right-hand side of the unconditional primal stability estimate for shift `mu`.
pub fn primal_stability_bound<T: Real>(red: &ReducedSystem<T>, grid: &TimeGrid<T>, x10: &[T], mu: T) -> Result<T> {
    let am = red.alpha() + mu;
    if !(am > T::zero()) {
        return Err(Error::InvalidParameter("alpha + mu must be positive".into()));
    }
    let lmin = lambda_min_sym(red.e11())?;
    let f = red.forcing_vector();
    let f_sq = numerics::dot(f, f);
    let (_, u_sq) = red.moments(T::zero(), grid.horizon());
    let rhs = f_sq * u_sq / am + red.e11().quad_form(x10);
    Ok(shift_constant(mu, grid.horizon()) / am.min(lmin) * rhs)
}

/// Both sides of the telescoped energy identity of the primal scheme.
///
/// `½‖x^N‖² + ½Σ‖Δx‖² + Σ k ⟨S̃x, x⟩` (E11-norms) against `½‖x^0‖² + Σ⟨∫F, x^j⟩`.
pub fn energy_identity<T: Real>(red: &ReducedSystem<T>, xs: &PiecewiseConstant<T>) -> (T, T) {
    let grid = xs.grid();
    let n = grid.len();
    let half = T::lit(0.5);
    let e = red.e11();
    let mut lhs = half * e.quad_form(xs.value(n - 1));
    let mut rhs = half * e.quad_form(xs.initial());
    for j in 0..n {
        lhs += half * e.quad_form(&xs.jump(j)) + grid.step(j) * red.s_tilde().quad_form(xs.value(j));
        let (a, b) = grid.interval(j);
        let (fint, _) = interval_forcing(red, a, b);
        rhs += numerics::dot(&fint, xs.value(j));
    }
    (lhs, rhs)
}

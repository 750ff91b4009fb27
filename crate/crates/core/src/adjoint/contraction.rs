use std::collections::HashMap;

use rayon::prelude::*;

use crate::discretization::TimeGrid;
use crate::error::Result;
use crate::export::{fmt_num, CsvTable};
use crate::model::ReducedSystem;
use crate::numerics::{lambda_min_pair, spectral_radius, LuFactor};
use crate::scalar::Real;

/// Spectral radii of the amplification matrices `Γ_j = (E11 + k_j Sᵀ)⁻¹ E11`.
#[derive(Clone, Debug, PartialEq)]
pub struct ContractionReport<T> {
    pub grid: TimeGrid<T>,
    /// `λmin(S̃, E11)`.
    pub mu_min: T,
    pub alpha: T,
    pub radii: Vec<T>,
    /// `(1 + k_j μmin)⁻¹`.
    pub bounds: Vec<T>,
    pub worst: T,
    /// `false` when `α ≤ 0`, in which case contraction is not guaranteed.
    pub guaranteed: bool,
}

/// Spectral radius of `Γ(k)` for one step size.
pub fn amplification_radius<T: Real>(red: &ReducedSystem<T>, k: T) -> Result<T> {
    let m = red.e11().add_scaled(k, &red.s().transpose())?;
    let gamma = LuFactor::new(&m)?.solve_matrix(red.e11())?;
    spectral_radius(&gamma)
}

pub fn contraction_report<T: Real>(red: &ReducedSystem<T>, grid: &TimeGrid<T>) -> Result<ContractionReport<T>> {
    let mu_min = lambda_min_pair(red.s_tilde(), red.e11())?;
    let steps = grid.steps();
    let mut distinct: Vec<T> = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for &k in &steps {
        if seen.insert(k.cache_key()) {
            distinct.push(k);
        }
    }
    let radii: Result<Vec<(u64, T)>> = distinct
        .par_iter()
        .map(|&k| amplification_radius(red, k).map(|r| (k.cache_key(), r)))
        .collect();
    let by_k: HashMap<u64, T> = radii?.into_iter().collect();
    let radii: Vec<T> = steps.iter().map(|k| by_k[&k.cache_key()]).collect();
    let bounds: Vec<T> = steps.iter().map(|&k| T::one() / (T::one() + k * mu_min)).collect();
    let worst = radii.iter().copied().fold(T::zero(), T::max);
    Ok(ContractionReport {
        grid: grid.clone(),
        mu_min,
        alpha: red.alpha(),
        radii,
        bounds,
        worst,
        guaranteed: red.alpha() > T::zero(),
    })
}

impl<T: Real> ContractionReport<T> {
    /// Largest `ρ(Γ_j) - bound_j`.
    pub fn max_excess(&self) -> T {
        self.radii
            .iter()
            .zip(&self.bounds)
            .map(|(&r, &b)| r - b)
            .fold(T::neg_infinity(), T::max)
    }

    /// Columns `t_mid, k, rho, bound`.
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["t_mid", "k", "rho", "bound"]);
        for j in 0..self.grid.len() {
            t.push_row(vec![
                fmt_num(self.grid.midpoint(j).to_f64_lossy()),
                fmt_num(self.grid.step(j).to_f64_lossy()),
                fmt_num(self.radii[j].to_f64_lossy()),
                fmt_num(self.bounds[j].to_f64_lossy()),
            ]);
        }
        t
    }
}

use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::adjoint::{jacobi_solve, solve_adjoint_direct, AdjointMethod};
use crate::discretization::{local_residuals, solve_primal, GoalEvaluation, PiecewiseConstant, TimeGrid};
use crate::error::{Error, Result};
use crate::model::{reduce, validate_structure, PhDaeSystem, ReducedSystem};
use crate::scalar::Real;

use super::indicators::{indicators, IndicatorSet, IndicatorVariant};
use super::marking::{bisect, dorfler_mark};

/// A validated, reduced system together with its consistent initial value.
#[derive(Clone, Debug)]
pub struct Problem<T> {
    pub red: ReducedSystem<T>,
    pub x10: Vec<T>,
}

impl<T: Real> Problem<T> {
    /// Runs the structural checks, then reduces.
    pub fn new(sys: &PhDaeSystem<T>) -> Result<Self> {
        validate_structure(sys).into_result()?;
        let red = reduce(sys)?;
        let x10 = red.project_initial(&sys.x0)?;
        Ok(Self { red, x10 })
    }

    pub fn horizon(&self) -> T {
        self.red.horizon()
    }

    pub fn solve(&self, grid: &TimeGrid<T>) -> Result<PiecewiseConstant<T>> {
        solve_primal(&self.red, grid, &self.x10)
    }

    /// Augmented goal value on a uniform grid.
    pub fn uniform_goal(&self, n: usize, rho: T) -> Result<GoalEvaluation<T>> {
        let grid = TimeGrid::uniform(self.horizon(), n)?;
        local_residuals(&self.red, &self.solve(&grid)?, rho)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdaptiveConfig {
    /// Stop once `|Σ η_j| ≤ tol`.
    pub tol: f64,
    /// Stop once the goal value is at or below this.
    pub qoi_target: Option<f64>,
    pub theta: f64,
    pub rho: f64,
    pub initial_n: usize,
    pub max_iter: usize,
    pub max_n: usize,
    pub variant: IndicatorVariant,
    pub adjoint: AdjointMethod,
}

impl Default for AdaptiveConfig {
    fn default() -> Self {
        Self {
            tol: 0.0,
            qoi_target: None,
            theta: 0.5,
            rho: 0.0,
            initial_n: 50,
            max_iter: 60,
            max_n: 1_000_000,
            variant: IndicatorVariant::Simplified,
            adjoint: AdjointMethod::Direct,
        }
    }
}

impl AdaptiveConfig {
    pub fn validate(&self) -> Result<()> {
        if self.tol.is_nan() || self.tol < 0.0 {
            return Err(Error::InvalidParameter("tol must be non-negative".into()));
        }
        if !(self.theta > 0.0 && self.theta < 1.0) {
            return Err(Error::InvalidParameter("theta must lie in (0, 1)".into()));
        }
        if !(self.rho >= 0.0) || !self.rho.is_finite() {
            return Err(Error::InvalidParameter("rho must be non-negative".into()));
        }
        if self.initial_n == 0 {
            return Err(Error::InvalidParameter("initial_n must be positive".into()));
        }
        if let AdjointMethod::Jacobi { sweeps: 0 } = self.adjoint {
            return Err(Error::InvalidParameter("sweeps must be at least 1".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    TolReached,
    TargetReached,
    MaxIter,
    MaxN,
    /// Every indicator vanished, nothing left to mark.
    AllZero,
}

#[derive(Clone, Debug, PartialEq)]
pub struct IterationRecord<T> {
    pub iteration: usize,
    pub grid: TimeGrid<T>,
    pub qoi: T,
    pub augmented: T,
    /// `Σ η_j`.
    pub eta_sum: T,
    /// `Σ |η_j|`.
    pub eta_abs_sum: T,
    /// Empty on the final iteration.
    pub marked: Vec<usize>,
    pub seconds: f64,
}

impl<T: Real> IterationRecord<T> {
    pub fn n(&self) -> usize {
        self.grid.len()
    }

    pub fn eta_tot(&self) -> T {
        self.eta_sum.abs()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AdaptiveRun<T> {
    pub config: AdaptiveConfig,
    pub records: Vec<IterationRecord<T>>,
    pub termination: Termination,
}

impl<T: Real> AdaptiveRun<T> {
    pub fn final_grid(&self) -> &TimeGrid<T> {
        &self.records.last().expect("at least one iteration").grid
    }

    pub fn last(&self) -> &IterationRecord<T> {
        self.records.last().expect("at least one iteration")
    }

    /// First record whose goal value is at or below `target`.
    pub fn first_below(&self, target: T) -> Option<&IterationRecord<T>> {
        self.records.iter().find(|r| r.augmented <= target)
    }

    /// Run record; `i_eff` is filled from `reference` when given.
    pub fn to_json(&self, reference: Option<T>) -> serde_json::Value {
        let iterations: Vec<_> = self
            .records
            .iter()
            .map(|r| {
                let i_eff = reference
                    .and_then(|j| effectivity_index(r.eta_sum, r.augmented, j).ok())
                    .map(|v| v.to_f64_lossy());
                json!({
                    "iteration": r.iteration,
                    "N": r.n(),
                    "qoi": r.qoi.to_f64_lossy(),
                    "augmented": r.augmented.to_f64_lossy(),
                    "eta_sum": r.eta_sum.to_f64_lossy(),
                    "eta_tot": r.eta_tot().to_f64_lossy(),
                    "eta_abs_sum": r.eta_abs_sum.to_f64_lossy(),
                    "I_eff": i_eff,
                    "marked": r.marked,
                    "seconds": r.seconds,
                })
            })
            .collect();
        json!({
            "config": self.config,
            "termination": self.termination,
            "reference_qoi": reference.map(|v| v.to_f64_lossy()),
            "final_nodes": self.final_grid().nodes().iter().map(|t| t.to_f64_lossy()).collect::<Vec<_>>(),
            "iterations": iterations,
        })
    }
}

/// Everything computed in one adaptive iteration, handed to observers.
pub struct IterationState<'a, T> {
    pub iteration: usize,
    pub xk: &'a PiecewiseConstant<T>,
    pub goal: &'a GoalEvaluation<T>,
    pub z: &'a PiecewiseConstant<T>,
    pub indicators: &'a IndicatorSet<T>,
}

pub fn adaptive_loop<T: Real>(problem: &Problem<T>, config: &AdaptiveConfig) -> Result<AdaptiveRun<T>> {
    adaptive_loop_observed(problem, config, |_| Ok(()))
}

/// Primal solve, sources, adjoint, indicators, then stop or mark and bisect.
pub fn adaptive_loop_observed<T: Real>(
    problem: &Problem<T>,
    config: &AdaptiveConfig,
    mut observer: impl FnMut(&IterationState<'_, T>) -> Result<()>,
) -> Result<AdaptiveRun<T>> {
    config.validate()?;
    let red = &problem.red;
    let rho = T::lit(config.rho);
    let theta = T::lit(config.theta);
    let mut grid = TimeGrid::uniform(problem.horizon(), config.initial_n)?;
    let mut records = Vec::new();
    let mut iteration = 0;
    loop {
        let start = Instant::now();
        let xk = problem.solve(&grid)?;
        let goal = local_residuals(red, &xk, rho)?;
        let adj = match config.adjoint {
            AdjointMethod::Direct => solve_adjoint_direct(red, &grid, &goal.sources)?,
            AdjointMethod::Jacobi { sweeps } => jacobi_solve(red, &grid, &goal.sources, sweeps)?,
        };
        let ind = indicators(red, &xk, &adj.z, config.variant)?;
        observer(&IterationState {
            iteration,
            xk: &xk,
            goal: &goal,
            z: &adj.z,
            indicators: &ind,
        })?;

        let stop = if ind.total().to_f64_lossy() <= config.tol {
            Some(Termination::TolReached)
        } else if config.qoi_target.is_some_and(|t| goal.augmented.to_f64_lossy() <= t) {
            Some(Termination::TargetReached)
        } else if iteration + 1 >= config.max_iter {
            Some(Termination::MaxIter)
        } else {
            None
        };
        let marked = match stop {
            Some(_) => Vec::new(),
            None => match dorfler_mark(&ind, theta) {
                Ok(m) => m,
                Err(Error::AllZero) => Vec::new(),
                Err(e) => return Err(e),
            },
        };
        let stop = match stop {
            None if marked.is_empty() => Some(Termination::AllZero),
            None if grid.len() + marked.len() > config.max_n => Some(Termination::MaxN),
            s => s,
        };
        let next = match stop {
            None => Some(bisect(&grid, &marked)?),
            Some(_) => None,
        };
        records.push(IterationRecord {
            iteration,
            grid: grid.clone(),
            qoi: goal.qoi,
            augmented: goal.augmented,
            eta_sum: ind.sum(),
            eta_abs_sum: ind.abs_sum(),
            marked: if stop.is_some() { Vec::new() } else { marked },
            seconds: start.elapsed().as_secs_f64(),
        });
        match (stop, next) {
            (Some(termination), _) => {
                return Ok(AdaptiveRun {
                    config: config.clone(),
                    records,
                    termination,
                })
            }
            (None, Some(g)) => grid = g,
            (None, None) => unreachable!(),
        }
        iteration += 1;
    }
}

/// `|Σ η| / |J_ref - J_k|`.
pub fn effectivity_index<T: Real>(eta_sum: T, qoi: T, reference: T) -> Result<T> {
    let err = (reference - qoi).abs();
    let floor = T::lit(1e2) * T::epsilon() * reference.abs();
    if !(err > floor) {
        return Err(Error::DegenerateError(err.to_f64_lossy()));
    }
    Ok(eta_sum.abs() / err)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EffectivityRow<T> {
    pub iteration: usize,
    pub n: usize,
    pub error: T,
    pub eta_sum: T,
    /// `None` when the error is at round-off level.
    pub i_eff: Option<T>,
}

pub fn effectivity<T: Real>(run: &AdaptiveRun<T>, reference: T) -> Vec<EffectivityRow<T>> {
    run.records
        .iter()
        .map(|r| EffectivityRow {
            iteration: r.iteration,
            n: r.n(),
            error: (reference - r.augmented).abs(),
            eta_sum: r.eta_sum,
            i_eff: effectivity_index(r.eta_sum, r.augmented, reference).ok(),
        })
        .collect()
}

/// Goal value on a uniform reference grid.
pub const DEFAULT_REFERENCE_N: usize = 50_000;

pub fn reference_qoi<T: Real>(problem: &Problem<T>, n_ref: usize, rho: T) -> Result<T> {
    Ok(problem.uniform_goal(n_ref, rho)?.augmented)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::{build_academic, random_system};

    #[test]
    fn infinite_tolerance_accepts_initial_grid() {
        let p = Problem::new(&build_academic::<f64>()).unwrap();
        let cfg = AdaptiveConfig {
            tol: f64::INFINITY,
            initial_n: 20,
            ..Default::default()
        };
        let run = adaptive_loop(&p, &cfg).unwrap();
        assert_eq!(run.records.len(), 1);
        assert_eq!(run.termination, Termination::TolReached);
        assert_eq!(run.final_grid().len(), 20);
        assert!(run.last().marked.is_empty());
    }

    #[test]
    fn history_is_consistent() {
        let p = Problem::new(&random_system::<f64>(5, 3, 2)).unwrap();
        let cfg = AdaptiveConfig {
            initial_n: 8,
            max_iter: 6,
            ..Default::default()
        };
        let mut seen = 0;
        let run = adaptive_loop_observed(&p, &cfg, |s| {
            assert_eq!(s.iteration, seen);
            seen += 1;
            Ok(())
        })
        .unwrap();
        assert_eq!(run.termination, Termination::MaxIter);
        assert_eq!(run.records.len(), 6);
        for w in run.records.windows(2) {
            assert!(!w[0].marked.is_empty());
            assert_eq!(w[1].n(), w[0].n() + w[0].marked.len());
            assert!(w[0].grid.nodes().iter().all(|t| w[1].grid.nodes().contains(t)));
        }
        let json = run.to_json(Some(0.0));
        assert_eq!(json["iterations"].as_array().unwrap().len(), 6);
        assert_eq!(json["termination"], "max_iter");
    }

    #[test]
    fn max_n_and_target_stop() {
        let p = Problem::new(&build_academic::<f64>()).unwrap();
        let cfg = AdaptiveConfig {
            initial_n: 10,
            max_n: 12,
            ..Default::default()
        };
        let run = adaptive_loop(&p, &cfg).unwrap();
        assert_eq!(run.termination, Termination::MaxN);
        assert!(run.final_grid().len() <= 12);
        let first = run.records[0].augmented;
        let cfg = AdaptiveConfig {
            initial_n: 10,
            qoi_target: Some(first * 2.0),
            ..Default::default()
        };
        let run = adaptive_loop(&p, &cfg).unwrap();
        assert_eq!(run.termination, Termination::TargetReached);
        assert_eq!(run.records.len(), 1);
    }

    #[test]
    fn config_validation() {
        let p = Problem::new(&build_academic::<f64>()).unwrap();
        for cfg in [
            AdaptiveConfig { theta: 1.0, ..Default::default() },
            AdaptiveConfig { rho: -1.0, ..Default::default() },
            AdaptiveConfig { initial_n: 0, ..Default::default() },
            AdaptiveConfig { tol: f64::NAN, ..Default::default() },
            AdaptiveConfig { adjoint: AdjointMethod::Jacobi { sweeps: 0 }, ..Default::default() },
        ] {
            assert!(matches!(adaptive_loop(&p, &cfg), Err(Error::InvalidParameter(_))));
        }
    }

    #[test]
    fn jacobi_adjoint_matches_direct_with_enough_sweeps() {
        let p = Problem::new(&random_system::<f64>(9, 2, 1)).unwrap();
        let base = AdaptiveConfig {
            initial_n: 6,
            max_iter: 3,
            ..Default::default()
        };
        let direct = adaptive_loop(&p, &base).unwrap();
        let jac = adaptive_loop(
            &p,
            &AdaptiveConfig {
                adjoint: AdjointMethod::Jacobi { sweeps: 1000 },
                ..base
            },
        )
        .unwrap();
        for (a, b) in direct.records.iter().zip(&jac.records) {
            assert_eq!(a.marked, b.marked);
            assert!((a.eta_sum - b.eta_sum).abs() <= 1e-10 * a.eta_abs_sum);
        }
    }

    #[test]
    fn effectivity_cases() {
        assert_eq!(effectivity_index(-0.5, 1.5, 1.0).unwrap(), 1.0);
        assert_eq!(effectivity_index(2.0f64, 1.0, 2.0).unwrap(), 2.0);
        assert!(matches!(effectivity_index(1.0, 1.0, 1.0), Err(Error::DegenerateError(_))));
        let p = Problem::new(&build_academic::<f64>()).unwrap();
        let run = adaptive_loop(&p, &AdaptiveConfig { max_iter: 2, ..Default::default() }).unwrap();
        let rows = effectivity(&run, run.records[0].augmented);
        assert!(rows[0].i_eff.is_none());
        assert!(rows[1].i_eff.is_some());
    }
}

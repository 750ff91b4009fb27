use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::adjoint::{contraction_report, marked_set_stabilization, DEFAULT_WINDOW};
use crate::discretization::{local_residuals, PiecewiseConstant, TimeGrid};
use crate::error::{Error, Result};
use crate::estimator::{adaptive_loop, adaptive_loop_observed, AdaptiveConfig, AdaptiveRun, Problem};
use crate::export::{fmt_num, CsvTable};
use crate::numerics;
use crate::scalar::Real;

/// Number of trailing points used for rate fits.
pub const FIT_TAIL: usize = 4;
/// Relative width at which the uniform threshold search stops.
pub const THRESHOLD_REL: f64 = 0.02;

/// Least-squares slope of `log y` against `log x`.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return Err(Error::InvalidParameter("need at least two points".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let m = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / m;
    let my = ly.iter().sum::<f64>() / m;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("abscissae coincide".into()));
    }
    Ok(sxy / sxx)
}

/// Slope over the last [`FIT_TAIL`] points.
pub fn tail_slope(points: &[(usize, f64)]) -> Result<f64> {
    let tail = &points[points.len().saturating_sub(FIT_TAIL)..];
    let x: Vec<f64> = tail.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = tail.iter().map(|p| p.1).collect();
    loglog_slope(&x, &y)
}

/// Linear interpolation of `log y` in `log N`; `None` outside the sampled range.
pub fn loglog_interpolate(points: &[(usize, f64)], n: f64) -> Option<f64> {
    points.windows(2).find_map(|w| {
        let (a, b) = (w[0].0 as f64, w[1].0 as f64);
        if a <= n && n <= b && a < b {
            let s = (n.ln() - a.ln()) / (b.ln() - a.ln());
            Some((w[0].1.ln() * (1.0 - s) + w[1].1.ln() * s).exp())
        } else {
            None
        }
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceStudy {
    /// `(N, goal value)` on uniform grids.
    pub uniform: Vec<(usize, f64)>,
    /// `(N, goal value)` along one adaptive run; empty when not requested.
    pub adaptive: Vec<(usize, f64)>,
    pub uniform_slope: f64,
    pub adaptive_slope: Option<f64>,
}

impl ConvergenceStudy {
    /// Columns `method, N, qoi`.
    pub fn to_table(&self) -> CsvTable {
        let mut t = CsvTable::new(["method", "N", "qoi"]);
        for (m, pts) in [("uniform", &self.uniform), ("dwr", &self.adaptive)] {
            for &(n, q) in pts {
                t.push_row(vec![m.into(), n.to_string(), fmt_num(q)]);
            }
        }
        t
    }
}

/// Uniform runs at each `N` (in parallel) and, optionally, one adaptive run.
pub fn convergence_study<T: Real>(
    problem: &Problem<T>,
    n_list: &[usize],
    rho: T,
    adaptive: Option<&AdaptiveConfig>,
) -> Result<ConvergenceStudy> {
    if n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidParameter("N list must be increasing".into()));
    }
    let uniform: Result<Vec<(usize, f64)>> = n_list
        .par_iter()
        .map(|&n| Ok((n, problem.uniform_goal(n, rho)?.augmented.to_f64_lossy())))
        .collect();
    let uniform = uniform?;
    let uniform_slope = tail_slope(&uniform)?;
    let (adaptive, adaptive_slope) = match adaptive {
        Some(cfg) => {
            let mut cfg = cfg.clone();
            cfg.rho = rho.to_f64_lossy();
            let run = adaptive_loop(problem, &cfg)?;
            let pts: Vec<(usize, f64)> = run.records.iter().map(|r| (r.n(), r.augmented.to_f64_lossy())).collect();
            let slope = tail_slope(&pts).ok();
            (pts, slope)
        }
        None => (Vec::new(), None),
    };
    Ok(ConvergenceStudy {
        uniform,
        adaptive,
        uniform_slope,
        adaptive_slope,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CostRow {
    pub target: f64,
    pub n_uniform: usize,
    pub n_dwr: usize,
    /// `1 - N_dwr / N_uniform`.
    pub savings: f64,
}

/// Smallest uniform `N ≥ n0` with goal value at most `target`, located to [`THRESHOLD_REL`].
///
/// Doubling sweep `n0 · 2^j`, then bisection on `N`.
pub fn uniform_threshold<T: Real>(problem: &Problem<T>, target: f64, rho: T, n0: usize, max_n: usize) -> Result<usize> {
    let below = |n: usize| -> Result<bool> { Ok(problem.uniform_goal(n, rho)?.augmented.to_f64_lossy() <= target) };
    let unreachable = || Error::TargetUnreachable { target, max_n };
    if below(n0)? {
        return Ok(n0);
    }
    let mut lo = n0;
    let mut hi = n0;
    loop {
        hi = hi.checked_mul(2).ok_or_else(unreachable)?;
        if hi > max_n {
            return Err(unreachable());
        }
        if below(hi)? {
            break;
        }
        lo = hi;
    }
    while (hi - lo) as f64 > THRESHOLD_REL * hi as f64 && hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}

/// Interval counts needed by uniform and adaptive refinement to reach each target.
pub fn cost_to_target<T: Real>(problem: &Problem<T>, targets: &[f64], config: &AdaptiveConfig) -> Result<Vec<CostRow>> {
    if targets.is_empty() || targets.windows(2).any(|w| w[0] <= w[1]) {
        return Err(Error::InvalidParameter("targets must be decreasing".into()));
    }
    let tightest = *targets.last().expect("non-empty");
    let mut cfg = config.clone();
    cfg.qoi_target = Some(tightest);
    cfg.tol = 0.0;
    let rho = T::lit(cfg.rho);
    let (run, uniform) = rayon::join(
        || adaptive_loop(problem, &cfg),
        || -> Result<Vec<usize>> {
            targets
                .par_iter()
                .map(|&t| uniform_threshold(problem, t, rho, cfg.initial_n, cfg.max_n))
                .collect()
        },
    );
    let (run, uniform) = (run?, uniform?);
    targets
        .iter()
        .zip(uniform)
        .map(|(&target, n_uniform)| {
            let rec = run
                .first_below(T::lit(target))
                .ok_or(Error::TargetUnreachable { target, max_n: cfg.max_n })?;
            let n_dwr = rec.n();
            Ok(CostRow {
                target,
                n_uniform,
                n_dwr,
                savings: 1.0 - n_dwr as f64 / n_uniform as f64,
            })
        })
        .collect()
}

/// Columns `target, N_uniform, N_dwr, savings`.
pub fn cost_table(rows: &[CostRow]) -> CsvTable {
    let mut t = CsvTable::new(["target", "N_uniform", "N_dwr", "savings"]);
    for r in rows {
        t.push_row(vec![
            fmt_num(r.target),
            r.n_uniform.to_string(),
            r.n_dwr.to_string(),
            fmt_num(r.savings),
        ]);
    }
    t
}

/// Reference trajectory with `E11 x_ref` and `x_refᵀ E11 x_ref` cached per interval.
#[derive(Clone, Debug)]
pub struct StateReference<T> {
    reference: PiecewiseConstant<T>,
    e11: numerics::DenseMatrix<T>,
    e_ref: Vec<Vec<T>>,
    quad: Vec<T>,
}

impl<T: Real> StateReference<T> {
    pub fn new(e11: &numerics::DenseMatrix<T>, reference: PiecewiseConstant<T>) -> Self {
        let e_ref: Vec<Vec<T>> = reference.values().par_iter().map(|v| e11.mul_vec(v)).collect();
        let quad = reference.values().iter().zip(&e_ref).map(|(v, ev)| numerics::dot(v, ev)).collect();
        Self {
            reference,
            e11: e11.clone(),
            e_ref,
            quad,
        }
    }

    /// `∫ H(x_ref - x_k) dt` on the union of both grids with `H = ½‖·‖²_{E11}`.
    pub fn error(&self, xk: &PiecewiseConstant<T>) -> Result<T> {
        let (ga, gb) = (xk.grid(), self.reference.grid());
        if ga.horizon() != gb.horizon() || xk.dim() != self.reference.dim() {
            return Err(Error::GridMismatch);
        }
        let e_x: Vec<Vec<T>> = xk.values().par_iter().map(|v| self.e11.mul_vec(v)).collect();
        let quad_x: Vec<T> = xk.values().iter().zip(&e_x).map(|(v, ev)| numerics::dot(v, ev)).collect();
        let (na, nb) = (ga.nodes(), gb.nodes());
        let (mut i, mut j) = (0usize, 0usize);
        let mut t = T::zero();
        let mut total = T::zero();
        let two = T::lit(2.0);
        while i < ga.len() && j < gb.len() {
            let end = na[i + 1].min(nb[j + 1]);
            let d = self.quad[j] - two * numerics::dot(&self.e_ref[j], xk.value(i)) + quad_x[i];
            total += (end - t) * d.max(T::zero());
            t = end;
            if na[i + 1] <= end {
                i += 1;
            }
            if nb[j + 1] <= end {
                j += 1;
            }
        }
        Ok(T::lit(0.5) * total)
    }
}

/// One-off [`StateReference::error`].
pub fn state_energy_error<T: Real>(
    e11: &numerics::DenseMatrix<T>,
    xk: &PiecewiseConstant<T>,
    reference: &PiecewiseConstant<T>,
) -> Result<T> {
    StateReference::new(e11, reference.clone()).error(xk)
}

#[derive(Clone, Debug, PartialEq)]
pub struct TradeoffTrajectory {
    pub rho: f64,
    /// `(N, energy-balance qoi, state energy error)` per adaptive iteration.
    pub points: Vec<(usize, f64, f64)>,
}

impl TradeoffTrajectory {
    pub fn qoi_at(&self, n: f64) -> Option<f64> {
        let p: Vec<(usize, f64)> = self.points.iter().map(|p| (p.0, p.1)).collect();
        loglog_interpolate(&p, n)
    }

    pub fn state_error_at(&self, n: f64) -> Option<f64> {
        let p: Vec<(usize, f64)> = self.points.iter().map(|p| (p.0, p.2)).collect();
        loglog_interpolate(&p, n)
    }
}

/// Adaptive runs for each goal weight, scored against a uniform reference solution.
pub fn tradeoff_study<T: Real>(
    problem: &Problem<T>,
    rhos: &[f64],
    config: &AdaptiveConfig,
    reference_n: usize,
) -> Result<Vec<TradeoffTrajectory>> {
    let ref_grid = TimeGrid::uniform(problem.horizon(), reference_n)?;
    let reference = StateReference::new(problem.red.e11(), problem.solve(&ref_grid)?);
    rhos.par_iter()
        .map(|&rho| {
            let mut cfg = config.clone();
            cfg.rho = rho;
            let mut points = Vec::new();
            adaptive_loop_observed(problem, &cfg, |s| {
                let err = reference.error(s.xk)?;
                points.push((s.xk.grid().len(), s.goal.qoi.to_f64_lossy(), err.to_f64_lossy()));
                Ok(())
            })?;
            Ok(TradeoffTrajectory { rho, points })
        })
        .collect()
}

/// Columns `rho, N, qoi, state_error`.
pub fn tradeoff_table(runs: &[TradeoffTrajectory]) -> CsvTable {
    let mut t = CsvTable::new(["rho", "N", "qoi", "state_error"]);
    for r in runs {
        for &(n, q, e) in &r.points {
            t.push_row(vec![fmt_num(r.rho), n.to_string(), fmt_num(q), fmt_num(e)]);
        }
    }
    t
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct JacobiRow {
    pub iteration: usize,
    pub n: usize,
    pub marked_exact: usize,
    pub k_star: usize,
    pub speedup: f64,
    pub rho_worst: f64,
}

/// Marked-set stabilization of the Jacobi adjoint along an adaptive run, up to `max_n` intervals.
pub fn jacobi_study<T: Real>(problem: &Problem<T>, config: &AdaptiveConfig, max_n: usize) -> Result<(AdaptiveRun<T>, Vec<JacobiRow>)> {
    let mut cfg = config.clone();
    cfg.max_n = cfg.max_n.min(max_n);
    let run = adaptive_loop(problem, &cfg)?;
    let rho = T::lit(cfg.rho);
    let theta = T::lit(cfg.theta);
    let rows: Result<Vec<JacobiRow>> = run
        .records
        .par_iter()
        .map(|r| {
            let xs = problem.solve(&r.grid)?;
            let goal = local_residuals(&problem.red, &xs, rho)?;
            let st = marked_set_stabilization(&problem.red, &xs, &goal, cfg.variant, theta, DEFAULT_WINDOW, None)?;
            let c = contraction_report(&problem.red, &r.grid)?;
            Ok(JacobiRow {
                iteration: r.iteration,
                n: r.n(),
                marked_exact: st.marked_exact.len(),
                k_star: st.k_star,
                speedup: st.speedup(r.n()),
                rho_worst: c.worst.to_f64_lossy(),
            })
        })
        .collect();
    Ok((run, rows?))
}

/// Columns `l, N, M_ex, k_star, speedup, rho_worst`.
pub fn jacobi_table(rows: &[JacobiRow]) -> CsvTable {
    let mut t = CsvTable::new(["l", "N", "M_ex", "k_star", "speedup", "rho_worst"]);
    for r in rows {
        t.push_row(vec![
            r.iteration.to_string(),
            r.n.to_string(),
            r.marked_exact.to_string(),
            r.k_star.to_string(),
            fmt_num(r.speedup),
            fmt_num(r.rho_worst),
        ]);
    }
    t
}

#[derive(Clone, Debug, PartialEq)]
pub struct Waveform {
    pub times: Vec<f64>,
    pub nodes: Vec<usize>,
    /// `voltages[i][m]` is node `nodes[i]` at `times[m]`.
    pub voltages: Vec<Vec<f64>>,
}

impl Waveform {
    /// `(time, value)` of the maximum per node.
    pub fn peaks(&self) -> Vec<(f64, f64)> {
        self.voltages
            .iter()
            .map(|v| {
                let (m, &a) = v
                    .iter()
                    .enumerate()
                    .fold((0, &f64::NEG_INFINITY), |best, (m, a)| if *a > *best.1 { (m, a) } else { best });
                (self.times[m], a)
            })
            .collect()
    }

    /// Columns `t, v<node>...`.
    pub fn to_table(&self) -> CsvTable {
        let mut header = vec!["t".to_string()];
        header.extend(self.nodes.iter().map(|n| format!("v{n}")));
        let mut t = CsvTable::new(header);
        for (m, &time) in self.times.iter().enumerate() {
            let mut row = vec![time];
            row.extend(self.voltages.iter().map(|v| v[m]));
            t.push_nums(&row);
        }
        t
    }
}

/// Node voltages `e_node` at the right end of every interval of a uniform grid.
///
/// Node voltages are the leading entries of the full state.
pub fn waveform<T: Real>(problem: &Problem<T>, n: usize, nodes: &[usize]) -> Result<Waveform> {
    let full = problem.red.full_dim();
    if nodes.iter().any(|&m| m >= full) {
        return Err(Error::InvalidParameter("node index outside the state".into()));
    }
    let grid = TimeGrid::uniform(problem.horizon(), n)?;
    let xs = problem.solve(&grid)?;
    let states: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|j| problem.red.full_state(xs.value(j), grid.nodes()[j + 1]))
        .collect();
    Ok(Waveform {
        times: grid.nodes()[1..].iter().map(|t| t.to_f64_lossy()).collect(),
        nodes: nodes.to_vec(),
        voltages: nodes
            .iter()
            .map(|&m| states.iter().map(|x| x[m].to_f64_lossy()).collect())
            .collect(),
    })
}

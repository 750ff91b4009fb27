//! One pass/fail line per acceptance criterion.

use std::time::Instant;

use phdae_core::adjoint::{
    adjoint_stability_bound, adjoint_stability_functional, contraction_report, jacobi_solve,
    marked_set_stabilization, solve_adjoint_direct, DEFAULT_WINDOW,
};
use phdae_core::bench::{
    build_academic, build_transmission_line, cost_to_target, jacobi_study, loglog_slope, random_system, tail_slope,
    tradeoff_study, TransmissionLineSpec,
};
use phdae_core::discretization::{
    local_residuals, primal_stability_bound, scaled_recursion_pair, shift_constant, solve_primal,
    stability_functional, PiecewiseConstant, TimeGrid,
};
use phdae_core::estimator::{
    adaptive_loop, effectivity, reference_qoi, AdaptiveConfig, IndicatorVariant, Problem, DEFAULT_REFERENCE_N,
};
use phdae_core::model::{reduce, ReducedSystem};
use phdae_core::numerics::{self, DenseMatrix, LuFactor};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

fn academic() -> Problem<f64> {
    Problem::new(&build_academic::<f64>()).expect("academic example")
}

fn tline_reg() -> Problem<f64> {
    Problem::new(&build_transmission_line::<f64>(&TransmissionLineSpec::convergence()).unwrap()).expect("tline-reg")
}

fn tline() -> Problem<f64> {
    Problem::new(&build_transmission_line::<f64>(&TransmissionLineSpec::waveform()).unwrap()).expect("tline")
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let q = academic().uniform_goal(20_000, 0.0).unwrap().qoi;
    let secs = start.elapsed().as_secs_f64();
    outcome(q <= 1e-11 && secs < 10.0, format!("qoi(N=20000) = {q:.4e} (<= 1e-11), {secs:.2} s (< 10 s)"))
}

fn criterion_2() -> Outcome {
    let p = academic();
    let ns: Vec<usize> = (0..6).map(|j| 100 << j).collect();
    let pts: Vec<(usize, f64)> = ns.iter().map(|&n| (n, p.uniform_goal(n, 0.0).unwrap().qoi)).collect();
    let x: Vec<f64> = pts.iter().map(|p| p.0 as f64).collect();
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let slope = loglog_slope(&x, &y).unwrap();
    let tail = tail_slope(&pts).unwrap();
    outcome(
        (slope + 3.0).abs() <= 0.3,
        format!("slope over N = 100..3200: {slope:.4} (tail {tail:.4}), expected -3.0 +- 0.3"),
    )
}

fn criterion_3(p: &Problem<f64>) -> Outcome {
    let start = Instant::now();
    let targets = [1e2, 1e1, 1e0, 1e-1, 1e-2];
    let rows = cost_to_target(p, &targets, &AdaptiveConfig::default()).unwrap();
    let secs = start.elapsed().as_secs_f64();
    let strong = rows.iter().filter(|r| r.target <= 1.0).all(|r| r.savings >= 0.7);
    let monotone = rows.windows(2).all(|w| w[1].savings >= w[0].savings);
    let table: Vec<String> = rows
        .iter()
        .map(|r| format!("{:.0e}: {}/{} ({:.1}%)", r.target, r.n_uniform, r.n_dwr, 100.0 * r.savings))
        .collect();
    outcome(
        strong && monotone && secs < 600.0,
        format!("uniform/dwr {}; {secs:.1} s", table.join(", ")),
    )
}

fn criterion_4(p: &Problem<f64>) -> Outcome {
    let j_ref = reference_qoi(p, DEFAULT_REFERENCE_N, 0.0).unwrap();
    let cfg = AdaptiveConfig {
        initial_n: 49,
        max_n: 400,
        ..Default::default()
    };
    let run = adaptive_loop(p, &cfg).unwrap();
    let rows = effectivity(&run, j_ref);
    let end = rows.iter().position(|r| r.n >= 300).unwrap_or(rows.len() - 1);
    let window = &rows[1..=end];
    let ieff: Vec<f64> = window.iter().map(|r| r.i_eff.unwrap_or(f64::NAN)).collect();
    let bounded = ieff.iter().all(|v| (0.3..=8.0).contains(v));
    let trend_rows = &ieff[1..];
    let mean = |s: &[f64]| s.iter().sum::<f64>() / s.len() as f64;
    let first = mean(&trend_rows[..5]);
    let last = mean(&trend_rows[trend_rows.len() - 5..]);
    let (lo, hi) = ieff.iter().fold((f64::INFINITY, 0.0f64), |a, &v| (a.0.min(v), a.1.max(v)));
    outcome(
        bounded && last <= 2.0 * first,
        format!(
            "l = 1..{} (N {}..{}): I_eff in [{lo:.3}, {hi:.3}]; last-5 mean {last:.3} vs 2 x first-5 mean (l >= 2) {:.3}",
            window.last().unwrap().iteration,
            window[0].n,
            window.last().unwrap().n,
            2.0 * first
        ),
    )
}

fn criterion_5(p: &Problem<f64>, grids: &[TimeGrid<f64>]) -> Outcome {
    let uniform = TimeGrid::uniform(p.horizon(), 50).unwrap();
    let rep = contraction_report(&p.red, &uniform).unwrap();
    let mut excess = rep.max_excess();
    for g in grids {
        excess = excess.max(contraction_report(&p.red, g).unwrap().max_excess());
    }
    outcome(
        excess <= 1e-10 && (0.90..=0.96).contains(&rep.worst),
        format!(
            "max rho - bound = {excess:.3e} over {} grids; worst rho (N=50) = {:.4}",
            grids.len() + 1,
            rep.worst
        ),
    )
}

fn jacobi_matches_direct(p: &Problem<f64>, grid: &TimeGrid<f64>) -> f64 {
    let xs = p.solve(grid).unwrap();
    let goal = local_residuals(&p.red, &xs, 0.0).unwrap();
    let direct = solve_adjoint_direct(&p.red, grid, &goal.sources).unwrap();
    let jac = jacobi_solve(&p.red, grid, &goal.sources, grid.len()).unwrap();
    let num: f64 = jac
        .z
        .values()
        .iter()
        .zip(direct.z.values())
        .map(|(a, b)| numerics::dot(&numerics::sub(a, b), &numerics::sub(a, b)))
        .sum();
    let den: f64 = direct.z.values().iter().map(|v| numerics::dot(v, v)).sum();
    (num / den).sqrt()
}

fn criterion_6(reg: &Problem<f64>, late: &[(usize, usize)], adaptive_grids: &[TimeGrid<f64>]) -> Outcome {
    let ac = academic();
    let tl = tline();
    let mut worst: f64 = 0.0;
    for (p, n) in [(&ac, 50), (&ac, 400), (reg, 50), (reg, 200), (&tl, 50), (&tl, 200)] {
        worst = worst.max(jacobi_matches_direct(p, &TimeGrid::uniform(p.horizon(), n).unwrap()));
    }
    for g in adaptive_grids {
        worst = worst.max(jacobi_matches_direct(reg, g));
    }
    let g50 = TimeGrid::uniform(reg.horizon(), 50).unwrap();
    let xs = reg.solve(&g50).unwrap();
    let goal = local_residuals(&reg.red, &xs, 0.0).unwrap();
    let st = marked_set_stabilization(&reg.red, &xs, &goal, IndicatorVariant::Full, 0.5, DEFAULT_WINDOW, None).unwrap();
    let bounded = late.iter().all(|&(n, k)| k <= n);
    let last = late.last().copied().unwrap_or((0, 0));
    outcome(
        worst <= 1e-10 && st.k_star == 1 && bounded,
        format!(
            "max rel. diff (sweeps = N) {worst:.2e}; uniform N=50: k* = {}, |M_ex| = {}; {} adaptive grids with k* <= N (last N = {}, k* = {})",
            st.k_star,
            st.marked_exact.len(),
            late.len(),
            last.0,
            last.1
        ),
    )
}

fn dense_block_solve(red: &ReducedSystem<f64>, grid: &TimeGrid<f64>, sources: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let r = red.dim();
    let n = grid.len();
    let st = red.s().transpose();
    let mut a = DenseMatrix::zeros(n * r, n * r);
    for j in 0..n {
        let m = red.e11().add_scaled(grid.step(j), &st).unwrap();
        for p in 0..r {
            for q in 0..r {
                a[(j * r + p, j * r + q)] = m[(p, q)];
                if j + 1 < n {
                    a[(j * r + p, (j + 1) * r + q)] = -red.e11()[(p, q)];
                }
            }
        }
    }
    let z = LuFactor::new(&a).unwrap().solve(&sources.concat()).unwrap();
    z.chunks(r).map(|c| c.to_vec()).collect()
}

fn criterion_7() -> Outcome {
    let mut worst_solve: f64 = 0.0;
    let mut worst_fd: f64 = 0.0;
    for seed in 0..50u64 {
        let r = 2 + (seed as usize % 5);
        let m = 1 + (seed as usize % 3);
        let n = 3 + (seed as usize % 6);
        let sys = random_system::<f64>(1000 + seed, r, m);
        let red = reduce(&sys).unwrap();
        let x10 = red.project_initial(&sys.x0).unwrap();
        let nodes: Vec<f64> = (0..=n).map(|i| (i as f64 / n as f64).powf(1.3)).collect();
        let grid = TimeGrid::new(nodes).unwrap();
        let xs = solve_primal(&red, &grid, &x10).unwrap();
        let rho = 0.25 * (seed % 3) as f64;
        let goal = local_residuals(&red, &xs, rho).unwrap();
        let z = solve_adjoint_direct(&red, &grid, &goal.sources).unwrap();
        let dense = dense_block_solve(&red, &grid, &goal.sources);
        let scale = dense.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for (a, b) in z.z.values().iter().flatten().zip(dense.iter().flatten()) {
            worst_solve = worst_solve.max((a - b).abs() / scale);
        }
        let smax = goal.sources.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()));
        for j in 0..n {
            for c in 0..r {
                let h = 1e-5 * (1.0 + xs.value(j)[c].abs());
                let eval = |d: f64| {
                    let mut vals = xs.values().to_vec();
                    vals[j][c] += d;
                    let pc = PiecewiseConstant::new(grid.clone(), x10.clone(), vals).unwrap();
                    local_residuals(&red, &pc, rho).unwrap().augmented
                };
                let fd = (eval(h) - eval(-h)) / (2.0 * h);
                worst_fd = worst_fd.max((fd - goal.sources[j][c]).abs() / smax);
            }
        }
    }
    outcome(
        worst_solve <= 1e-12 && worst_fd <= 1e-6,
        format!("50 systems: recursion vs dense block solve {worst_solve:.2e} (<= 1e-12); sources vs finite differences {worst_fd:.2e} (<= 1e-6)"),
    )
}

fn criterion_8(reg: &Problem<f64>, adaptive_grids: &[TimeGrid<f64>]) -> Outcome {
    let mut grids: Vec<TimeGrid<f64>> = [25, 50, 200, 1000].iter().map(|&n| TimeGrid::uniform(reg.horizon(), n).unwrap()).collect();
    grids.extend(adaptive_grids.iter().cloned());
    let (mut primal, mut dual) = (0.0f64, 0.0f64);
    for g in &grids {
        let xs = reg.solve(g).unwrap();
        primal = primal.max(stability_functional(&xs) / primal_stability_bound(&reg.red, g, &reg.x10, 0.0).unwrap());
        let goal = local_residuals(&reg.red, &xs, 0.0).unwrap();
        let z = solve_adjoint_direct(&reg.red, g, &goal.sources).unwrap();
        dual = dual.max(adjoint_stability_functional(&z.z) / adjoint_stability_bound(&reg.red, g, &goal.sources, 0.0).unwrap());
    }
    let ac = academic();
    let mut shifted: f64 = 0.0;
    for mu in [0.1, 1.0] {
        for n in [10, 100, 1000] {
            let g = TimeGrid::uniform(ac.horizon(), n).unwrap();
            let (plain, sh) = scaled_recursion_pair(&ac.red, &g, &ac.x10, mu).unwrap();
            let c = shift_constant(mu, ac.horizon());
            shifted = shifted.max(stability_functional(&plain) / (c * stability_functional(&sh)));
        }
    }
    outcome(
        primal <= 1.0 && dual <= 1.0 && shifted <= 1.0,
        format!(
            "lhs/rhs ratios over {} grids: primal {primal:.3e}, adjoint {dual:.3e}; shifted estimate (mu = 0.1, 1) {shifted:.4}",
            grids.len()
        ),
    )
}

fn criterion_9(p: &Problem<f64>) -> Outcome {
    let cfg = AdaptiveConfig {
        max_n: 2600,
        max_iter: 400,
        ..Default::default()
    };
    let runs = tradeoff_study(p, &[0.0, 10.0], &cfg, DEFAULT_REFERENCE_N).unwrap();
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [1000.0, 1500.0, 2000.0] {
        match (runs[0].qoi_at(n), runs[1].qoi_at(n), runs[0].state_error_at(n), runs[1].state_error_at(n)) {
            (Some(q0), Some(q10), Some(e0), Some(e10)) => {
                ok &= e10 < e0 && q10 > q0;
                parts.push(format!(
                    "N={n}: state error ratio {:.2}, qoi ratio 10^{:.2}",
                    e0 / e10,
                    (q10 / q0).log10()
                ));
            }
            _ => {
                ok = false;
                parts.push(format!("N={n}: not reached"));
            }
        }
    }
    outcome(ok, parts.join("; "))
}

fn criterion_10() -> Outcome {
    let p = academic();
    let run = adaptive_loop(&p, &AdaptiveConfig { max_iter: 11, ..Default::default() }).unwrap();
    let g = &run.records[10].grid;
    let density = |a: f64, b: f64| g.nodes().iter().filter(|&&t| t >= a && t <= b).count() as f64 / (b - a);
    let (near, far) = (density(0.0, 0.1), density(0.6, 1.0));
    outcome(
        near >= 3.0 * far,
        format!("after 10 iterations (N = {}): density [0, 0.1] {near:.1}, [0.6, 1] {far:.1}, ratio {:.2}", g.len(), near / far),
    )
}

fn main() {
    let start = Instant::now();
    let reg = tline_reg();
    let study_cfg = AdaptiveConfig {
        variant: IndicatorVariant::Full,
        ..Default::default()
    };
    let (run, jrows) = jacobi_study(&reg, &study_cfg, 160).unwrap();
    let late: Vec<(usize, usize)> = jrows.iter().map(|r| (r.n, r.k_star)).collect();
    let adaptive_grids: Vec<TimeGrid<f64>> = run.records.iter().step_by(4).map(|r| r.grid.clone()).collect();

    let checks: Vec<(usize, Box<dyn Fn() -> Outcome + '_>)> = vec![
        (1, Box::new(criterion_1)),
        (2, Box::new(criterion_2)),
        (3, Box::new(|| criterion_3(&reg))),
        (4, Box::new(|| criterion_4(&reg))),
        (5, Box::new(|| criterion_5(&reg, &adaptive_grids))),
        (6, Box::new(|| criterion_6(&reg, &late, &adaptive_grids))),
        (7, Box::new(criterion_7)),
        (8, Box::new(|| criterion_8(&reg, &adaptive_grids))),
        (9, Box::new(|| criterion_9(&reg))),
        (10, Box::new(criterion_10)),
    ];
    let mut failed = 0;
    for (id, check) in checks {
        let t = Instant::now();
        let o = check();
        if !o.pass {
            failed += 1;
        }
        println!(
            "criterion {id:>2} [PRIMARY] {}: {} ({:.1} s)",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail,
            t.elapsed().as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 passed in {:.1} s", 10 - failed, start.elapsed().as_secs_f64());
    if failed > 0 {
        std::process::exit(1);
    }
}

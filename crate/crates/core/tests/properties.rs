use phdae_core::adjoint::{
    adjoint_stability_bound, adjoint_stability_functional, contraction_report, solve_adjoint_direct, JacobiIteration,
};
use phdae_core::bench::random_system;
use phdae_core::discretization::{
    energy_identity, local_residuals, primal_stability_bound, solve_primal, stability_functional, PiecewiseConstant,
    TimeGrid,
};
use phdae_core::estimator::{
    bisect, dorfler_mark, indicators, primal_residual, reconstruct_weight, IndicatorSet, IndicatorVariant, Probe,
};
use phdae_core::model::{reduce, reduce_with_basis, ReducedSystem};
use phdae_core::numerics::{kernel_basis, DenseMatrix, LuFactor};
use proptest::prelude::*;

fn config() -> ProptestConfig {
    ProptestConfig::with_cases(32)
}

fn grid_from(fracs: &[f64]) -> TimeGrid<f64> {
    let total: f64 = fracs.iter().sum();
    let mut nodes = vec![0.0];
    let mut acc = 0.0;
    for f in fracs {
        acc += f / total;
        nodes.push(acc);
    }
    *nodes.last_mut().unwrap() = 1.0;
    TimeGrid::new(nodes).unwrap()
}

struct Case {
    red: ReducedSystem<f64>,
    x10: Vec<f64>,
    grid: TimeGrid<f64>,
}

fn case(seed: u64, r: usize, m: usize, fracs: &[f64]) -> Case {
    let sys = random_system::<f64>(seed, r, m);
    let red = reduce(&sys).unwrap();
    let x10 = red.project_initial(&sys.x0).unwrap();
    Case {
        red,
        x10,
        grid: grid_from(fracs),
    }
}

fn steps() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.1f64..1.0, 3..9)
}

proptest! {
    #![proptest_config(config())]

    #[test]
    fn marking_is_scale_invariant(eta in prop::collection::vec(-5.0f64..5.0, 1..30), scale in 1e-3f64..1e3, theta in 0.05f64..0.95) {
        let a = IndicatorSet::new(eta.clone(), IndicatorVariant::Full);
        let b = IndicatorSet::new(eta.iter().map(|e| e * scale).collect(), IndicatorVariant::Full);
        prop_assert_eq!(dorfler_mark(&a, theta).ok(), dorfler_mark(&b, theta).ok());
    }

    #[test]
    fn marking_is_minimal(eta in prop::collection::vec(-5.0f64..5.0, 1..30), theta in 0.05f64..0.95) {
        let set = IndicatorSet::new(eta.clone(), IndicatorVariant::Full);
        prop_assume!(set.abs_sum() > 0.0);
        let m = dorfler_mark(&set, theta).unwrap();
        let abs: Vec<f64> = eta.iter().map(|e| e.abs()).collect();
        let total: f64 = abs.iter().sum();
        let marked: f64 = m.iter().map(|&j| abs[j]).sum();
        prop_assert!(marked >= theta * total * (1.0 - 1e-12));
        prop_assert!(m.windows(2).all(|w| w[0] < w[1]));
        // Dropping the smallest marked entry falls short of the bulk.
        let smallest = m.iter().map(|&j| abs[j]).fold(f64::INFINITY, f64::min);
        prop_assert!(marked - smallest < theta * total);
        // Every unmarked entry is at most the smallest marked one.
        for j in 0..abs.len() {
            if !m.contains(&j) {
                prop_assert!(abs[j] <= smallest);
            }
        }
    }

    #[test]
    fn bisection_keeps_nodes(fracs in steps(), mask in prop::collection::vec(any::<bool>(), 8)) {
        let g = grid_from(&fracs);
        let marked: Vec<usize> = (0..g.len()).filter(|&j| mask[j]).collect();
        let h = bisect(&g, &marked).unwrap();
        prop_assert_eq!(h.len(), g.len() + marked.len());
        prop_assert!(g.nodes().iter().all(|t| h.nodes().contains(t)));
        for &j in &marked {
            let (a, b) = g.interval(j);
            prop_assert!(h.nodes().contains(&(a + 0.5 * (b - a))));
        }
    }

    #[test]
    fn weight_endpoints(vals in prop::collection::vec(-3.0f64..3.0, 2..10)) {
        let g = TimeGrid::uniform(1.0, vals.len()).unwrap();
        let z = PiecewiseConstant::new(g, vec![0.0], vals.iter().map(|v| vec![*v]).collect()).unwrap();
        let w = reconstruct_weight(&z);
        let n = vals.len();
        prop_assert_eq!(w.nodal[0][0], vals[0]);
        prop_assert_eq!(w.nodal[n][0], 0.0);
        prop_assert_eq!(w.left[0][0], 0.0);
        for i in 1..n {
            prop_assert_eq!(w.nodal[i][0], 0.5 * (vals[i - 1] + vals[i]));
            prop_assert!((w.left[i][0] + 0.5 * (vals[i] - vals[i - 1])).abs() < 1e-15);
        }
    }

    #[test]
    fn galerkin_orthogonality(seed in 0u64..1000, fracs in steps(), probe_seed in 0u64..1000) {
        let c = case(seed, 3, 2, &fracs);
        let xs = solve_primal(&c.red, &c.grid, &c.x10).unwrap();
        let n = c.grid.len();
        let vals: Vec<Vec<f64>> = (0..n)
            .map(|j| (0..3).map(|i| (((probe_seed + 7 * j as u64 + 3 * i as u64) % 11) as f64) - 5.0).collect())
            .collect();
        let scale: f64 = xs.values().iter().flatten().map(|v| v.abs()).sum::<f64>() + 1.0;
        let res = primal_residual(&c.red, &xs, &Probe::Constant(vals)).unwrap();
        prop_assert!(res.abs() <= 1e-10 * scale);
    }

    #[test]
    fn estimator_sum_bounded_by_absolute_sum(seed in 0u64..1000, fracs in steps()) {
        let c = case(seed, 2, 1, &fracs);
        let xs = solve_primal(&c.red, &c.grid, &c.x10).unwrap();
        let goal = local_residuals(&c.red, &xs, 0.0).unwrap();
        let z = solve_adjoint_direct(&c.red, &c.grid, &goal.sources).unwrap();
        for v in [IndicatorVariant::Full, IndicatorVariant::Simplified] {
            let ind = indicators(&c.red, &xs, &z.z, v).unwrap();
            prop_assert_eq!(ind.len(), c.grid.len());
            prop_assert!(ind.total() <= ind.abs_sum() * (1.0 + 1e-14));
        }
    }

    #[test]
    fn sources_are_goal_gradients(seed in 0u64..1000, fracs in steps(), rho in 0.0f64..2.0) {
        let c = case(seed, 2, 2, &fracs);
        let xs = solve_primal(&c.red, &c.grid, &c.x10).unwrap();
        let goal = local_residuals(&c.red, &xs, rho).unwrap();
        let j = seed as usize % c.grid.len();
        for comp in 0..2 {
            let h = 1e-5 * (1.0 + xs.value(j)[comp].abs());
            let eval = |d: f64| {
                let mut vals = xs.values().to_vec();
                vals[j][comp] += d;
                let p = PiecewiseConstant::new(c.grid.clone(), c.x10.clone(), vals).unwrap();
                local_residuals(&c.red, &p, rho).unwrap().augmented
            };
            let fd = (eval(h) - eval(-h)) / (2.0 * h);
            let an = goal.sources[j][comp];
            let scale = an.abs().max(goal.augmented.abs()).max(1e-6);
            prop_assert!((fd - an).abs() <= 1e-6 * scale, "fd {} an {}", fd, an);
        }
    }

    #[test]
    fn basis_invariance(seed in 0u64..1000, fracs in steps(), mix in -1.0f64..1.0) {
        let sys = random_system::<f64>(seed, 3, 2);
        let (v, w) = kernel_basis(&sys.e);
        // V' = V G + W K, W' = W H with G, H invertible.
        let g = DenseMatrix::from_fn(3, 3, |i, j| if i == j { 2.0 } else { mix * ((i + 2 * j) as f64 * 0.3).sin() });
        let h = DenseMatrix::from_fn(2, 2, |i, j| if i == j { 1.5 } else { mix });
        let k = DenseMatrix::from_fn(2, 3, |i, j| mix * (i as f64 - j as f64));
        let v2 = v.matmul(&g).unwrap().add(&w.matmul(&k).unwrap()).unwrap();
        let w2 = w.matmul(&h).unwrap();
        let grid = grid_from(&fracs);
        let mut out = Vec::new();
        for red in [reduce_with_basis(&sys, v, w).unwrap(), reduce_with_basis(&sys, v2, w2).unwrap()] {
            let x10 = red.project_initial(&sys.x0).unwrap();
            let xs = solve_primal(&red, &grid, &x10).unwrap();
            let goal = local_residuals(&red, &xs, 0.4).unwrap();
            let z = solve_adjoint_direct(&red, &grid, &goal.sources).unwrap();
            let full = indicators(&red, &xs, &z.z, IndicatorVariant::Full).unwrap().sum();
            let simp = indicators(&red, &xs, &z.z, IndicatorVariant::Simplified).unwrap().sum();
            let last = red.full_state(xs.value(grid.len() - 1), 1.0);
            out.push((goal.augmented, full, simp, last));
        }
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-8 * a.abs().max(b.abs()).max(1e-12);
        prop_assert!(close(out[0].0, out[1].0));
        prop_assert!(close(out[0].1, out[1].1));
        prop_assert!(close(out[0].2, out[1].2));
        for (a, b) in out[0].3.iter().zip(&out[1].3) {
            prop_assert!((a - b).abs() <= 1e-8 * (1.0 + a.abs()));
        }
    }

    #[test]
    fn amplification_contracts(seed in 0u64..1000, k in 1e-3f64..2.0, vseed in 0u64..100) {
        let sys = random_system::<f64>(seed, 4, 1);
        let red = reduce(&sys).unwrap();
        let m = red.e11().add_scaled(k, &red.s().transpose()).unwrap();
        let gamma = LuFactor::new(&m).unwrap().solve_matrix(red.e11()).unwrap();
        let v: Vec<f64> = (0..4).map(|i| ((vseed * 13 + i * 7) as f64).sin() + 0.1).collect();
        let gv = gamma.mul_vec(&v);
        let (ng, nv) = (red.e11().quad_form(&gv), red.e11().quad_form(&v));
        let margin = 2.0 * k * red.alpha() * phdae_core::numerics::dot(&gv, &gv);
        prop_assert!(ng + margin <= nv * (1.0 + 1e-12));
        let grid = TimeGrid::new(vec![0.0, k.min(0.5), 1.0]).unwrap();
        prop_assert!(contraction_report(&red, &grid).unwrap().max_excess() <= 1e-10);
    }

    #[test]
    fn jacobi_influence_cone(seed in 0u64..1000, n in 4usize..10, src in 0usize..10, sweeps in 1usize..6) {
        let src = src % n;
        let c = case(seed, 2, 1, &vec![1.0; n]);
        let mut sources = vec![vec![0.0; 2]; n];
        sources[src] = vec![1.0, -0.5];
        let mut it = JacobiIteration::new(&c.red, &c.grid, &sources).unwrap();
        for _ in 0..sweeps {
            it.sweep().unwrap();
        }
        for (j, z) in it.current().iter().enumerate() {
            let reachable = j <= src && src < j + sweeps;
            prop_assert_eq!(z.iter().any(|v| *v != 0.0), reachable);
        }
    }

    #[test]
    fn stability_estimates(seed in 0u64..1000, fracs in steps()) {
        let c = case(seed, 3, 1, &fracs);
        let xs = solve_primal(&c.red, &c.grid, &c.x10).unwrap();
        prop_assert!(stability_functional(&xs) <= primal_stability_bound(&c.red, &c.grid, &c.x10, 0.0).unwrap());
        let (lhs, rhs) = energy_identity(&c.red, &xs);
        prop_assert!((lhs - rhs).abs() <= 1e-10 * lhs.abs().max(1.0));
        let goal = local_residuals(&c.red, &xs, 0.0).unwrap();
        let z = solve_adjoint_direct(&c.red, &c.grid, &goal.sources).unwrap();
        prop_assert!(z.residual <= 1e-10);
        prop_assert!(adjoint_stability_functional(&z.z) <= adjoint_stability_bound(&c.red, &c.grid, &goal.sources, 0.0).unwrap());
    }
}

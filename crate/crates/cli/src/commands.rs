use std::path::Path;

use phdae_core::adjoint::{contraction_report, AdjointMethod};
use phdae_core::bench::{
    build_academic, build_transmission_line, convergence_study, cost_table, cost_to_target, jacobi_study,
    jacobi_table, waveform, TransmissionLineSpec,
};
use phdae_core::discretization::{local_residuals, trajectory_table, TimeGrid};
use phdae_core::estimator::{
    adaptive_loop, adaptive_loop_observed, effectivity, indicator_table, reference_qoi, AdaptiveConfig,
    IndicatorVariant, Problem,
};
use phdae_core::export::{fmt_num, CsvTable};
use phdae_core::model::{load_model, validate_structure_seeded, PhDaeSystem};
use serde_json::{json, Value};

use crate::args::{
    AdaptArgs, Command, ContractionArgs, ConvergeArgs, CostArgs, EffectivityArgs, JacobiArgs, Refinement, SolveArgs,
    WaveformArgs,
};
use crate::failure::Failure;
use crate::output::Artifacts;

pub const BUILTIN: [&str; 3] = ["academic", "tline", "tline-reg"];

fn line_spec(name: &str) -> Option<TransmissionLineSpec> {
    match name {
        "tline" => Some(TransmissionLineSpec::waveform()),
        "tline-reg" => Some(TransmissionLineSpec::convergence()),
        _ => None,
    }
}

pub fn load_system(source: &str) -> Result<PhDaeSystem<f64>, Failure> {
    if source == "academic" {
        return Ok(build_academic());
    }
    if let Some(spec) = line_spec(source) {
        return Ok(build_transmission_line(&spec)?);
    }
    let path = Path::new(source);
    if !path.is_file() {
        return Err(Failure::config(format!(
            "model `{source}` is neither a builtin ({}) nor a readable file",
            BUILTIN.join(", ")
        )));
    }
    Ok(load_model(path)?)
}

fn problem(source: &str, seed: u64) -> Result<Problem<f64>, Failure> {
    let sys = load_system(source)?;
    validate_structure_seeded(&sys, seed).into_result()?;
    Ok(Problem::new(&sys)?)
}

fn require(ok: bool, msg: &str) -> Result<(), Failure> {
    if ok {
        Ok(())
    } else {
        Err(Failure::config(msg))
    }
}

fn adaptive_config(r: &Refinement, default_variant: IndicatorVariant, default_max_n: usize) -> Result<AdaptiveConfig, Failure> {
    let cfg = AdaptiveConfig {
        theta: r.theta,
        rho: r.rho,
        initial_n: r.n,
        max_iter: r.max_iter,
        max_n: r.max_n.unwrap_or(default_max_n),
        variant: r.variant.map_or(default_variant, Into::into),
        adjoint: match r.sweeps {
            Some(sweeps) => AdjointMethod::Jacobi { sweeps },
            None => AdjointMethod::Direct,
        },
        ..Default::default()
    };
    cfg.validate()?;
    require(cfg.max_iter > 0, "max-iter must be positive")?;
    require(cfg.max_n >= cfg.initial_n, "max-n must be at least n")?;
    Ok(cfg)
}

/// Runs one command, writing artifacts and the manifest below its output directory.
pub fn run(command: &Command, args: &[String]) -> Result<Value, Failure> {
    let common = command.common();
    let mut out = Artifacts::create(&common.out)?;
    let summary = match command {
        Command::Solve(a) => solve(a, &mut out)?,
        Command::Adapt(a) => adapt(a, &mut out)?,
        Command::Converge(a) => converge(a, &mut out)?,
        Command::Cost(a) => cost(a, &mut out)?,
        Command::Effectivity(a) => effectivity_cmd(a, &mut out)?,
        Command::JacobiStudy(a) => jacobi(a, &mut out)?,
        Command::Contraction(a) => contraction(a, &mut out)?,
        Command::Waveform(a) => waveform_cmd(a, &mut out)?,
    };
    out.finish(command.name(), &common.model, args, summary.clone())?;
    Ok(summary)
}

fn solve(a: &SolveArgs, out: &mut Artifacts) -> Result<Value, Failure> {
    require(a.n > 0, "n must be positive")?;
    require(a.rho >= 0.0 && a.rho.is_finite(), "rho must be non-negative")?;
    let p = problem(&a.common.model, a.common.seed)?;
    let grid = TimeGrid::uniform(p.horizon(), a.n)?;
    let xk = p.solve(&grid)?;
    let goal = local_residuals(&p.red, &xk, a.rho)?;
    out.write_csv("trajectory.csv", &trajectory_table(&xk, &goal))?;
    Ok(json!({ "N": a.n, "qoi": goal.qoi, "augmented": goal.augmented }))
}

fn adapt(a: &AdaptArgs, out: &mut Artifacts) -> Result<Value, Failure> {
    let mut cfg = adaptive_config(&a.refine, IndicatorVariant::Simplified, 1_000_000)?;
    cfg.tol = a.tol;
    cfg.qoi_target = a.target;
    cfg.validate()?;
    if let Some(n) = a.n_ref {
        require(n > 0, "n-ref must be positive")?;
    }
    let p = problem(&a.common.model, a.common.seed)?;
    let mut tables = Vec::new();
    let run = adaptive_loop_observed(&p, &cfg, |s| {
        tables.push(indicator_table(s.indicators, s.goal, s.z));
        Ok(())
    })?;
    for (l, t) in tables.iter().enumerate() {
        out.write_csv(&format!("indicators/iter_{l:03}.csv"), t)?;
    }
    let reference = a.n_ref.map(|n| reference_qoi(&p, n, cfg.rho)).transpose()?;
    out.write_json("run.json", &run.to_json(reference))?;
    let last = run.last();
    Ok(json!({
        "iterations": run.records.len(),
        "termination": run.termination,
        "N": last.n(),
        "augmented": last.augmented,
        "eta_sum": last.eta_sum,
    }))
}

fn converge(a: &ConvergeArgs, out: &mut Artifacts) -> Result<Value, Failure> {
    require(a.ns.len() >= 2 && a.ns[0] > 0, "ns needs at least two positive entries")?;
    let p = problem(&a.common.model, a.common.seed)?;
    let cfg = AdaptiveConfig {
        theta: a.theta,
        rho: a.rho,
        initial_n: a.initial_n,
        max_n: a.max_n,
        ..Default::default()
    };
    if a.adaptive {
        cfg.validate()?;
    }
    let study = convergence_study(&p, &a.ns, a.rho, a.adaptive.then_some(&cfg))?;
    out.write_csv("convergence.csv", &study.to_table())?;
    Ok(json!({ "uniform_slope": study.uniform_slope, "adaptive_slope": study.adaptive_slope }))
}

fn cost(a: &CostArgs, out: &mut Artifacts) -> Result<Value, Failure> {
    let cfg = adaptive_config(&a.refine, IndicatorVariant::Simplified, 100_000)?;
    require(a.targets.iter().all(|t| t.is_finite()), "targets must be finite")?;
    let p = problem(&a.common.model, a.common.seed)?;
    let rows = cost_to_target(&p, &a.targets, &cfg)?;
    out.write_csv("cost.csv", &cost_table(&rows))?;
    Ok(json!({ "savings": rows.iter().map(|r| r.savings).collect::<Vec<_>>() }))
}

fn effectivity_cmd(a: &EffectivityArgs, out: &mut Artifacts) -> Result<Value, Failure> {
    let cfg = adaptive_config(&a.refine, IndicatorVariant::Simplified, 400)?;
    require(a.n_ref > 0, "n-ref must be positive")?;
    let p = problem(&a.common.model, a.common.seed)?;
    let run = adaptive_loop(&p, &cfg)?;
    let reference = reference_qoi(&p, a.n_ref, cfg.rho)?;
    let rows = effectivity(&run, reference);
    let mut t = CsvTable::new(["l", "N", "qoi", "error", "eta_sum", "I_eff"]);
    for (r, rec) in rows.iter().zip(&run.records) {
        t.push_row(vec![
            r.iteration.to_string(),
            r.n.to_string(),
            fmt_num(rec.augmented),
            fmt_num(r.error),
            fmt_num(r.eta_sum),
            r.i_eff.map_or_else(|| "nan".into(), fmt_num),
        ]);
    }
    out.write_csv("effectivity.csv", &t)?;
    out.write_json("run.json", &run.to_json(Some(reference)))?;
    let i_eff: Vec<f64> = rows.iter().skip(1).filter_map(|r| r.i_eff).collect();
    Ok(json!({
        "reference_qoi": reference,
        "i_eff_min": i_eff.iter().copied().reduce(f64::min),
        "i_eff_max": i_eff.iter().copied().reduce(f64::max),
    }))
}

fn jacobi(a: &JacobiArgs, out: &mut Artifacts) -> Result<Value, Failure> {
    let cfg = adaptive_config(&a.refine, IndicatorVariant::Full, 160)?;
    let p = problem(&a.common.model, a.common.seed)?;
    let (_, rows) = jacobi_study(&p, &cfg, cfg.max_n)?;
    out.write_csv("jacobi.csv", &jacobi_table(&rows))?;
    Ok(json!({
        "rows": rows.len(),
        "k_star": rows.iter().map(|r| r.k_star).collect::<Vec<_>>(),
    }))
}

fn contraction(a: &ContractionArgs, out: &mut Artifacts) -> Result<Value, Failure> {
    require(a.n > 0, "n must be positive")?;
    let p = problem(&a.common.model, a.common.seed)?;
    let grid = TimeGrid::uniform(p.horizon(), a.n)?;
    let c = contraction_report(&p.red, &grid)?;
    out.write_csv("contraction.csv", &c.to_table())?;
    Ok(json!({
        "mu_min": c.mu_min,
        "alpha": c.alpha,
        "rho_worst": c.worst,
        "max_excess": c.max_excess(),
        "guaranteed": c.guaranteed,
    }))
}

fn waveform_cmd(a: &WaveformArgs, out: &mut Artifacts) -> Result<Value, Failure> {
    require(a.n > 0, "n must be positive")?;
    let p = problem(&a.common.model, a.common.seed)?;
    let nodes = if !a.nodes.is_empty() {
        a.nodes.clone()
    } else if let Some(spec) = line_spec(&a.common.model) {
        let last = spec.nodes() - 1;
        (0..5).map(|i| i * last / 4).collect()
    } else {
        vec![0]
    };
    let w = waveform(&p, a.n, &nodes)?;
    out.write_csv("waveform.csv", &w.to_table())?;
    let peaks: Vec<Value> = w
        .nodes
        .iter()
        .zip(w.peaks())
        .map(|(n, (t, v))| json!({ "node": n, "t": t, "value": v }))
        .collect();
    Ok(json!({ "peaks": peaks }))
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use phdae_core::bench::build_academic;
use phdae_core::model::model_to_json;
use serde_json::Value;
use sha2::{Digest, Sha256};

fn phdae(args: &[&str], out: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phdae"))
        .args(args)
        .arg("--out")
        .arg(out)
        .env_remove("PHDAE_THREADS")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn error_line(o: &Output) -> Value {
    let stderr = String::from_utf8_lossy(&o.stderr);
    let last = stderr.lines().last().expect("stderr line");
    serde_json::from_str(last).expect("machine-readable error line")
}

fn schema(name: &str) -> jsonschema::JSONSchema {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../docs/schemas").join(name);
    let value: Value = serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap();
    jsonschema::JSONSchema::compile(&value).expect("schema compiles")
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(schema_name: &str, path: &Path) {
    let s = schema(schema_name);
    let v = read_json(path);
    let msgs: Vec<String> = match s.validate(&v) {
        Ok(()) => Vec::new(),
        Err(errors) => errors.map(|e| format!("{e} at {}", e.instance_path)).collect(),
    };
    assert!(msgs.is_empty(), "{} violates {schema_name}: {msgs:?}", path.display());
}

/// Checks the manifest against the files on disk and returns the CSV paths.
fn check_manifest(dir: &Path) -> Vec<PathBuf> {
    assert_valid("manifest.schema.json", &dir.join("manifest.json"));
    let m = read_json(&dir.join("manifest.json"));
    let mut csvs = Vec::new();
    for f in m["files"].as_array().unwrap() {
        let path = dir.join(f["path"].as_str().unwrap());
        let data = fs::read(&path).unwrap();
        assert_eq!(f["bytes"].as_u64().unwrap() as usize, data.len());
        let digest: String = Sha256::digest(&data).iter().map(|b| format!("{b:02x}")).collect();
        assert_eq!(f["sha256"], digest.as_str());
        if path.extension().is_some_and(|e| e == "csv") {
            let text = String::from_utf8(data).unwrap();
            let header = text.lines().next().unwrap();
            assert!(header.split(',').all(|c| !c.is_empty() && c.parse::<f64>().is_err()), "{header}");
            csvs.push(path);
        }
    }
    csvs
}

#[test]
fn adapt_writes_run_record_and_indicator_tables() {
    let dir = tempfile::tempdir().unwrap();
    let o = phdae(&["adapt", "--model", "academic", "--tol", "1e-10", "--theta", "0.5", "--max-iter", "6"], dir.path());
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid("run.schema.json", &dir.path().join("run.json"));
    let csvs = check_manifest(dir.path());
    let run = read_json(&dir.path().join("run.json"));
    assert_eq!(csvs.len(), run["iterations"].as_array().unwrap().len());
    assert_eq!(run["termination"], "max_iter");
    let first = fs::read_to_string(dir.path().join("indicators/iter_000.csv")).unwrap();
    assert_eq!(first.lines().count(), 51);
    let stdout: Value = serde_json::from_str(String::from_utf8_lossy(&o.stdout).trim()).unwrap();
    assert_eq!(stdout["status"], "ok");
}

#[test]
fn csv_bodies_are_deterministic_across_thread_counts() {
    let args = ["adapt", "--model", "tline-reg", "--max-iter", "4", "--threads"];
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let mut args_a = args.to_vec();
    args_a.push("1");
    let mut args_b = args.to_vec();
    args_b.push("4");
    assert_eq!(code(&phdae(&args_a, a.path())), 0);
    assert_eq!(code(&phdae(&args_b, b.path())), 0);
    let ca = check_manifest(a.path());
    let cb = check_manifest(b.path());
    assert_eq!(ca.len(), cb.len());
    for (x, y) in ca.iter().zip(&cb) {
        assert_eq!(fs::read(x).unwrap(), fs::read(y).unwrap(), "{}", x.display());
    }
}

#[test]
fn study_commands_emit_headed_tables() {
    let cases: [(&[&str], &str, &str); 6] = [
        (&["solve", "--model", "academic", "--n", "64"], "trajectory.csv", "t,k,x1,x2,G"),
        (&["converge", "--model", "academic", "--ns", "100,200,400"], "convergence.csv", "method,N,qoi"),
        (
            &["cost", "--model", "academic", "--targets", "1e-3,3e-4", "--max-n", "20000"],
            "cost.csv",
            "target,N_uniform,N_dwr,savings",
        ),
        (
            &["jacobi-study", "--model", "academic", "--theta", "0.5", "--max-n", "80"],
            "jacobi.csv",
            "l,N,M_ex,k_star,speedup,rho_worst",
        ),
        (&["contraction", "--model", "tline-reg", "--n", "50"], "contraction.csv", "t_mid,k,rho,bound"),
        (&["waveform", "--model", "tline", "--n", "200"], "waveform.csv", "t,v0,v25,v50,v75,v100"),
    ];
    for (args, file, header) in cases {
        let dir = tempfile::tempdir().unwrap();
        let o = phdae(args, dir.path());
        assert_eq!(code(&o), 0, "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
        check_manifest(dir.path());
        let text = fs::read_to_string(dir.path().join(file)).unwrap();
        assert_eq!(text.lines().next().unwrap(), header, "{args:?}");
        assert!(text.lines().count() > 1, "{args:?}");
    }
}

#[test]
fn effectivity_writes_indices_and_run_record() {
    let dir = tempfile::tempdir().unwrap();
    let o = phdae(
        &["effectivity", "--model", "academic", "--n-ref", "20000", "--max-iter", "5"],
        dir.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert_valid("run.schema.json", &dir.path().join("run.json"));
    check_manifest(dir.path());
    let run = read_json(&dir.path().join("run.json"));
    assert!(run["reference_qoi"].is_number());
    let text = fs::read_to_string(dir.path().join("effectivity.csv")).unwrap();
    assert_eq!(text.lines().next().unwrap(), "l,N,qoi,error,eta_sum,I_eff");
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn validation_failures_exit_one() {
    let dir = tempfile::tempdir().unwrap();

    let o = phdae(&["solve", "--model", "no-such-model"], dir.path());
    assert_eq!(code(&o), 1);
    assert_eq!(error_line(&o)["kind"], "config");

    let o = phdae(&["adapt", "--model", "academic", "--theta", "1.5"], dir.path());
    assert_eq!(code(&o), 1);
    assert_eq!(error_line(&o)["code"], "invalid_parameter");

    let o = phdae(&["solve", "--model", "academic", "--n", "abc"], dir.path());
    assert_eq!(code(&o), 1);
    assert_eq!(error_line(&o)["exit"], 1);

    let mut model: Value = serde_json::from_str(&model_to_json(&build_academic::<f64>())).unwrap();
    model["J"][0][1] = Value::from(5.0);
    let path = dir.path().join("broken.json");
    fs::write(&path, model.to_string()).unwrap();
    let o = phdae(&["solve", "--model", path.to_str().unwrap()], dir.path());
    assert_eq!(code(&o), 1);
    let line = error_line(&o);
    assert_eq!(line["kind"], "model");
    assert!(line["message"].as_str().unwrap().contains("j_skew"), "{line}");
}

#[test]
fn model_files_round_trip_through_the_cli() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("academic.json");
    fs::write(&path, model_to_json(&build_academic::<f64>())).unwrap();
    let a = dir.path().join("file");
    let b = dir.path().join("builtin");
    assert_eq!(code(&phdae(&["solve", "--model", path.to_str().unwrap(), "--n", "32"], &a)), 0);
    assert_eq!(code(&phdae(&["solve", "--model", "academic", "--n", "32"], &b)), 0);
    assert_eq!(
        fs::read(a.join("trajectory.csv")).unwrap(),
        fs::read(b.join("trajectory.csv")).unwrap()
    );
}

#[test]
fn unreachable_target_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = phdae(&["cost", "--model", "academic", "--targets", "1e-30", "--max-n", "400"], dir.path());
    assert_eq!(code(&o), 2);
    let line = error_line(&o);
    assert_eq!(line["kind"], "study");
    assert_eq!(line["code"], "target_unreachable");
}

#[test]
fn thread_env_fallback_is_validated() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_phdae"))
        .args(["solve", "--model", "academic", "--n", "8", "--out"])
        .arg(dir.path())
        .env("PHDAE_THREADS", "0")
        .output()
        .unwrap();
    assert_eq!(code(&o), 1);
    assert!(error_line(&o)["message"].as_str().unwrap().contains("threads"));
}

#[test]
fn help_exits_zero() {
    let o = Command::new(env!("CARGO_BIN_EXE_phdae")).arg("--help").output().unwrap();
    assert_eq!(code(&o), 0);
    let text = String::from_utf8_lossy(&o.stdout);
    for cmd in ["solve", "adapt", "converge", "cost", "effectivity", "jacobi-study", "contraction", "waveform"] {
        assert!(text.contains(cmd), "{cmd}");
    }
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use interplab::verify::ExperimentReport;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_interplab"));
    c.env_remove("INTERPLAB_OUTPUT_DIR");
    c
}

fn here(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join(rel)
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

#[test]
fn sample_oracle_matches_sidecar() {
    let sample = here("samples/lattice_sample.json");
    let expected: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(here("samples/lattice_sample.expected.json")).unwrap()).unwrap();
    let theta = expected["theta"].as_f64().unwrap().to_string();
    let o = run(&["norm", "--input", sample.to_str().unwrap(), "--norm", "oracle", "--theta", &theta]);
    assert_eq!(code(&o), 0);
    let got = stdout_json(&o)["bracket"]["upper"].as_f64().unwrap();
    let want = expected["value"].as_f64().unwrap();
    assert!((got - want).abs() <= 1e-12 * want, "{got} vs {want}");
}

#[test]
fn complex_norm_of_sample_lies_above_the_oracle() {
    let sample = here("samples/lattice_sample.json");
    let o = run(&["norm", "--input", sample.to_str().unwrap(), "--norm", "complex", "--degree", "16", "--points", "128"]);
    assert!(matches!(code(&o), 0 | 3));
    let v = stdout_json(&o);
    let upper = v["bracket"]["upper"].as_f64().unwrap();
    assert!(upper >= 2.52866327229658 * (1.0 - 1e-9) && upper <= 2.52866327229658 * 1.15);
}

#[test]
fn zero_vector_is_zero_for_every_norm() {
    let input = here("tests/fixtures/zero_vector.json");
    for norm in ["oracle", "kfunc", "complex", "peetre", "gp"] {
        let o = run(&["norm", "--input", input.to_str().unwrap(), "--norm", norm]);
        assert_eq!(code(&o), 0, "{norm}: {}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout_json(&o)["bracket"]["upper"].as_f64().unwrap(), 0.0, "{norm}");
    }
}

#[test]
fn bad_input_exits_2() {
    for f in ["malformed.json", "dimension_mismatch.json"] {
        let input = here(&format!("tests/fixtures/{f}"));
        let o = run(&["norm", "--input", input.to_str().unwrap()]);
        assert_eq!(code(&o), 2, "{f}");
        assert!(!o.stderr.is_empty());
    }
    assert_eq!(code(&run(&["norm"])), 2);
    assert_eq!(code(&run(&["norm", "--input", "/nonexistent/input.json"])), 2);
    let cfg = here("tests/fixtures/unknown_key.json");
    assert_eq!(code(&run(&["gen", "--config", cfg.to_str().unwrap()])), 2);
    assert_eq!(code(&run(&["gen", "--theta", "2"])), 2);
    assert_eq!(code(&run(&["frobnicate"])), 2);
    assert_eq!(code(&run(&["suite", "--select", "nothing*"])), 2);
}

#[test]
fn solver_budget_too_small_exits_3_with_bracket() {
    let cfg = here("tests/fixtures/nonconvergent.json");
    let sample = here("samples/lattice_sample.json");
    let o = run(&["norm", "--config", cfg.to_str().unwrap(), "--input", sample.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let v = stdout_json(&o);
    assert_eq!(v["bracket"]["converged"], serde_json::Value::Bool(false));
    assert!(v["bracket"]["lower"].as_f64().unwrap() <= v["bracket"]["upper"].as_f64().unwrap());
}

#[test]
fn unknown_experiment_exits_2() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["experiment", "nope", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn reiteration_default_config_passes_and_writes_reports() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["experiment", "reiteration", "--output-dir", dir.path().to_str().unwrap(), "--threads", "1"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let r = ExperimentReport::from_json(&fs::read_to_string(dir.path().join("reiteration.json")).unwrap()).unwrap();
    assert!(r.passed);
    assert_eq!(r.trials.len() + 1, fs::read_to_string(dir.path().join("reiteration.csv")).unwrap().lines().count());
    assert!(dir.path().join("timings.csv").exists());
    assert!(dir.path().join("config.json").exists());
}

#[test]
fn forced_failure_exits_4_and_still_writes_the_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = here("tests/fixtures/forced_failure.json");
    let out = dir.path().to_str().unwrap();
    let o = run(&["experiment", "coefficient_decay", "--config", cfg.to_str().unwrap(), "--output-dir", out]);
    assert_eq!(code(&o), 4);
    let r = ExperimentReport::from_json(&fs::read_to_string(dir.path().join("coefficient_decay.json")).unwrap()).unwrap();
    assert!(!r.passed);
    assert!(!r.check_named("decay_at_k_far").unwrap().passed);
}

#[test]
fn suite_subset_is_reproducible_and_honours_env_dir() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let o = bin().args(["suite", "--select", "r*"]).env("INTERPLAB_OUTPUT_DIR", a.path()).output().unwrap();
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
    let o = run(&["suite", "--select", "r*", "--output-dir", b.path().to_str().unwrap(), "--threads", "1"]);
    assert_eq!(code(&o), 0);
    let summary = fs::read_to_string(a.path().join("summary.csv")).unwrap();
    assert_eq!(summary.lines().count(), 3);
    assert!(summary.contains("reiteration,true") && summary.contains("riesz_lemma8,true"));
    for f in ["summary.csv", "reiteration.json", "reiteration.csv", "riesz_lemma8.json", "riesz_lemma8.csv"] {
        assert_eq!(fs::read(a.path().join(f)).unwrap(), fs::read(b.path().join(f)).unwrap(), "{f}");
    }
}

#[test]
fn csv_format_writes_only_the_table() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["experiment", "riesz_lemma8", "--format", "csv", "--output-dir", dir.path().to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(dir.path().join("riesz_lemma8.csv").exists());
    assert!(!dir.path().join("riesz_lemma8.json").exists());
}

#[test]
fn gen_is_deterministic_and_feeds_norm() {
    let a = run(&["gen", "--count", "4", "--seed", "11"]);
    let b = run(&["gen", "--count", "4", "--seed", "11"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    let doc = stdout_json(&a);
    let dir = tempfile::tempdir().unwrap();
    for (i, inst) in doc["instances"].as_array().unwrap().iter().enumerate() {
        let p = dir.path().join(format!("{i}.json"));
        fs::write(&p, serde_json::to_string(inst).unwrap()).unwrap();
        let o = run(&["norm", "--input", p.to_str().unwrap(), "--norm", "kfunc", "--t", "0.5"]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stdout));
        let b = &stdout_json(&o)["bracket"];
        assert!(b["lower"].as_f64().unwrap() <= b["upper"].as_f64().unwrap());
    }
}

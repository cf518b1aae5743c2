use serde_json::Value;
use std::fs;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weightcalc"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn single_value(o: &Output) -> f64 {
    assert_eq!(code(o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    stdout(o).trim().parse().unwrap()
}

#[test]
fn gevrey_associated_function_at_three() {
    // sup_p 3^p/p! is reached at p = 2 and p = 3, both giving 27/6.
    let v = single_value(&run(&["assoc", "--family", "gevrey", "--s", "1", "--eval", "3"]));
    assert!((v - (4.5f64).ln()).abs() < 1e-12, "{v}");
}

#[test]
fn conjugate_of_square_at_two() {
    // (t²)* (s) = s²/4.
    let v = single_value(&run(&["conj-fn", "--family", "power", "--alpha", "0.5", "--eval", "2"]));
    assert!((v - 1.0).abs() < 1e-9, "{v}");
}

#[test]
fn every_default_check_passes() {
    let o = run(&["verify", "--all"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let reports: Vec<Value> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(reports.len() >= 15);
    assert!(reports.iter().all(|r| r["status"] != "FAIL"));
}

#[test]
fn failing_check_exits_one() {
    let o = run(&["verify", "--check", "UNIFORM_BOUND", "--param", "family=literal"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(code(&run(&["assoc", "--family", "nope", "--eval", "1"])), 2);
    assert_eq!(code(&run(&["assoc"])), 2);
    assert_eq!(code(&run(&["--no-such-flag"])), 2);
    assert_eq!(code(&run(&["assoc", "--family", "gevrey", "--s", "1", "--n", "8"])), 2);
    assert_eq!(code(&run(&["verify", "--check", "NOT_A_CHECK"])), 2);
}

#[test]
fn infinite_envelope_is_refused() {
    let o = run(&["envelope", "--kind", "upper", "--sigma", "power:0.25", "--tau", "power:0.3", "--eval", "10"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("not well-defined"));
}

#[test]
fn help_exits_zero() {
    assert_eq!(code(&run(&["--help"])), 0);
}

#[test]
fn sequence_round_trips_through_files() {
    let dir = tempfile::tempdir().unwrap();
    for ext in ["json", "csv"] {
        let first = dir.path().join(format!("conj.{ext}"));
        let second = dir.path().join(format!("conj2.{ext}"));
        let fmt = if ext == "csv" { "csv" } else { "json" };
        let o = run(&[
            "conj-seq", "--family", "gevrey", "--s", "0.5", "--P-max", "50", "--format", fmt, "--output",
            first.to_str().unwrap(),
        ]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        // Conjugating twice gives back p!^(1/2).
        let o = run(&["conj-seq", "--input", first.to_str().unwrap(), "--format", fmt, "--output", second.to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        let back = run(&["assoc", "--input", second.to_str().unwrap(), "--eval", "5"]);
        let direct = run(&["assoc", "--family", "gevrey", "--s", "0.5", "--P-max", "50", "--eval", "5"]);
        assert!((single_value(&back) - single_value(&direct)).abs() < 1e-12);
    }
}

#[test]
fn output_file_is_written_whole_and_leaves_no_temporaries() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("indices.json");
    fs::write(&out, "stale").unwrap();
    let o = run(&["indices", "--family", "power", "--alpha", "0.5", "--output", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert!((v["gamma"].as_f64().unwrap() - 0.5).abs() < 0.01);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1);
}

#[test]
fn failed_command_does_not_touch_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("env.json");
    fs::write(&out, "previous").unwrap();
    let o = run(&[
        "envelope", "--kind", "upper", "--sigma", "power:0.25", "--tau", "power:0.3", "--output",
        out.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 2);
    assert_eq!(fs::read_to_string(&out).unwrap(), "previous");
}

#[test]
fn seed_is_recorded_in_meta() {
    let o = run(&["slowly-varying", "--family", "gevrey", "--s", "1", "--seed", "42"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["meta"]["seed"], 42);
    assert_eq!(v["meta"]["command"], "slowly-varying");
}

#[test]
fn manifest_runs_entries_and_reports_the_worst_code() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a.txt");
    let manifest = dir.path().join("runs.json");
    let entries = serde_json::json!([
        ["assoc", "--family", "gevrey", "--s", "1", "--eval", "3", "--output", out.to_str().unwrap()],
        ["verify", "--check", "GEVREY_CONJ"],
    ]);
    fs::write(&manifest, entries.to_string()).unwrap();
    assert_eq!(code(&run(&["--manifest", manifest.to_str().unwrap()])), 0);
    assert!(fs::read_to_string(&out).unwrap().starts_with("1.504077"));

    let entries = serde_json::json!([
        ["verify", "--check", "UNIFORM_BOUND", "--param", "family=literal"],
        ["assoc", "--family", "nope"],
    ]);
    fs::write(&manifest, entries.to_string()).unwrap();
    assert_eq!(code(&run(&["--manifest", manifest.to_str().unwrap()])), 2);

    let nested = serde_json::json!([["--manifest", manifest.to_str().unwrap()]]);
    let outer = dir.path().join("outer.json");
    fs::write(&outer, nested.to_string()).unwrap();
    assert_eq!(code(&run(&["--manifest", outer.to_str().unwrap()])), 2);
}

#[test]
fn matrix_csv_has_a_block_per_parameter() {
    let o = run(&["matrix", "--family", "power", "--alpha", "0.5", "--ells", "0.5,1,2", "--P-max", "20", "--format", "csv"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.starts_with("ell,p,logM,logmu,logm"));
    assert_eq!(text.lines().count(), 1 + 3 * 21);
}

#[test]
fn sequence_relation_is_reported() {
    let o = run(&["relation", "--left", "gevrey:1", "--right", "gevrey:2"]);
    assert_eq!(code(&o), 0);
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["kind"], "TRIANGLE");
}

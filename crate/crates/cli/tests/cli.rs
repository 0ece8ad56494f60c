use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::{json, Value};

fn magsq(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_magsq")).args(args).output().expect("spawn magsq")
}

fn preset_json(name: &str) -> Value {
    let out = magsq(&["preset", "show", name]);
    assert!(out.status.success());
    serde_json::from_slice(&out.stdout).unwrap()
}

fn write_json(dir: &Path, name: &str, v: &Value) -> String {
    let path = dir.join(name);
    fs::write(&path, serde_json::to_string(v).unwrap()).unwrap();
    path.to_str().unwrap().to_owned()
}

/// Short effective-model window: enough to exercise the pipeline in well under a second.
fn small_scenario(mut s: Value) -> Value {
    s["model"] = json!("effective_eq9");
    s["params"]["magnon_trunc"] = json!(15);
    s["t_final"] = json!(40.0);
    s["n_samples"] = json!(21);
    s
}

#[test]
fn preset_list_names_every_preset() {
    let out = magsq(&["preset", "list"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for name in ["fig2a", "fig2b", "fig3a", "fig3b", "fig4", "fig4-inset", "fig5a", "fig5b"] {
        assert!(text.lines().any(|l| l.split_whitespace().next() == Some(name)), "{name} missing");
    }
}

#[test]
fn preset_show_output_is_a_valid_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "fig2a.json", &small_scenario(preset_json("fig2a")));
    let out = magsq(&["run", "--config", &cfg]);
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = String::from_utf8(out.stdout).unwrap();
    assert!(csv.starts_with("t_ns,"));
    assert_eq!(csv.lines().count(), 22);
}

#[test]
fn unknown_preset_and_bad_config_exit_with_2() {
    assert_eq!(magsq(&["run", "--preset", "fig9"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let mut bad = small_scenario(preset_json("fig2a"));
    bad["params"]["omega_typo"] = json!(1.0);
    let cfg = write_json(dir.path(), "bad.json", &bad);
    assert_eq!(magsq(&["run", "--config", &cfg]).status.code(), Some(2));
    bad = small_scenario(preset_json("fig2a"));
    bad["n_samples"] = json!(0);
    let cfg = write_json(dir.path(), "bad2.json", &bad);
    assert_eq!(magsq(&["run", "--config", &cfg]).status.code(), Some(2));
    let missing = dir.path().join("absent.json");
    assert_eq!(magsq(&["run", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn starved_truncation_exits_with_4() {
    let dir = tempfile::tempdir().unwrap();
    let mut s = small_scenario(preset_json("fig2a"));
    s["params"]["magnon_trunc"] = json!(4);
    s["t_final"] = json!(300.0);
    let cfg = write_json(dir.path(), "tiny.json", &s);
    let out = magsq(&["run", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn sweep_csv_does_not_depend_on_thread_count() {
    let dir = tempfile::tempdir().unwrap();
    let mut sw = preset_json("fig4");
    sw["base"] = small_scenario(sw["base"].clone());
    sw["axes"][0]["values"] = json!([2.0, 3.0, 4.0, 5.0, 6.0]);
    let cfg = write_json(dir.path(), "sweep.json", &sw);
    let run = |threads: &str| {
        let out = dir.path().join(format!("sweep_{threads}.csv"));
        let o = magsq(&["sweep", "--config", &cfg, "--threads", threads, "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let one = run("1");
    assert_eq!(one, run("2"));
    assert_eq!(String::from_utf8(one).unwrap().lines().count(), 6);
}

#[test]
fn wigner_writes_grid_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let mut w = preset_json("fig3b");
    w["scenario"] = small_scenario(w["scenario"].clone());
    w["t"] = json!(40.0);
    w["grid"]["nx"] = json!(21);
    w["grid"]["np"] = json!(21);
    let cfg = write_json(dir.path(), "w.json", &w);
    let out = dir.path().join("w.csv");
    let o = magsq(&["wigner", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(fs::read_to_string(&out).unwrap().lines().count(), 1 + 21 * 21);
    let side: Value = serde_json::from_str(&fs::read_to_string(dir.path().join("w.json")).unwrap()).unwrap();
    assert_eq!(side["t_ns"], json!(40.0));
    assert!(side["V_min"].as_f64().unwrap() < 0.5);
    // A coarse grid on [−4, 4]² still captures essentially all the quasi-probability.
    assert!((side["integral"].as_f64().unwrap() - 1.0).abs() < 1e-2);
}

#[test]
fn validate_emits_a_json_report() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_json(dir.path(), "v.json", &small_scenario(preset_json("fig2a")));
    let out = magsq(&["validate", "--config", &cfg]);
    assert!(out.status.success());
    let report: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(report["checks"].as_array().unwrap().iter().any(|c| c["name"] == json!("dispersive")));
    assert!(["pass", "warn", "fail"].contains(&report["overall"].as_str().unwrap()));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn twostage(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_twostage"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write(dir: &Path, name: &str, body: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

const SIMULATE: &str = r#"
[dgp]
design = "linear"

[study]
sample_sizes = [100, 200]
reps = 6
master_seed = 11

[grid]
axes = [{ lower = -5.0, upper = 5.0, count = 501 }]

[[variants]]
kind = "single"

[[variants]]
kind = "ols"

[[variants]]
kind = "kernel"
family = "gaussian2"
c = 0.8
"#;

const EXPORT: &str = "n = 250\nseed = 5\n\n[dgp]\ndesign = \"nonlinear\"\n";

const ESTIMATE: &str = r#"
[first_stage]
method = "ols"
trim_bound = 1.95
"#;

#[test]
fn simulate_writes_tables_and_is_byte_identical() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "sim.toml", SIMULATE);
    let mut outputs = Vec::new();
    for (dir, threads) in [("a", "1"), ("b", "0")] {
        let out_dir = tmp.path().join(dir);
        let out = twostage(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--threads", threads]);
        assert!(out.status.success(), "{}", stderr(&out));
        let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
        let edf = fs::read_to_string(out_dir.join("edf.csv")).unwrap();
        outputs.push((summary, edf));
    }
    assert_eq!(outputs[0], outputs[1]);
    let (summary, edf) = &outputs[0];
    let lines: Vec<&str> = summary.lines().collect();
    assert_eq!(lines[0], "variant,N,c,bias,rmse,median,mean_ad,median_ad,reps_used");
    assert_eq!(lines.len(), 1 + 3 * 2);
    assert!(lines.iter().any(|l| l.starts_with("kernel2,200,0.8,")));
    assert_eq!(edf.lines().next(), Some("variant,N,value,fraction"));
    assert_eq!(edf.lines().count(), 1 + 3 * 2 * 6);
}

#[test]
fn seed_flag_overrides_config() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "sim.toml", SIMULATE);
    let run = |dir: &str, seed: &str| {
        let out_dir = tmp.path().join(dir);
        let out = twostage(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap(), "--seed", seed]);
        assert!(out.status.success(), "{}", stderr(&out));
        fs::read_to_string(out_dir.join("summary.csv")).unwrap()
    };
    assert_eq!(run("a", "11"), run("b", "11"));
    assert_ne!(run("a", "11"), run("c", "12"));
}

#[test]
fn single_replication_smoke() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(
        tmp.path(),
        "sim.toml",
        &SIMULATE.replace("reps = 6", "reps = 1").replace("[100, 200]", "[100]"),
    );
    let out_dir = tmp.path().join("o");
    let out = twostage(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let summary = fs::read_to_string(out_dir.join("summary.csv")).unwrap();
    for line in summary.lines().skip(1) {
        let f: Vec<&str> = line.split(',').collect();
        // With one replicate the median equals the estimate and |bias| equals the RMSE.
        let bias: f64 = f[3].parse().unwrap();
        let rmse: f64 = f[4].parse().unwrap();
        assert_eq!(bias.abs(), rmse);
        assert_eq!(f[8], "1");
    }
}

#[test]
fn export_then_estimate_round_trip() {
    let tmp = TempDir::new().unwrap();
    let exp = write(tmp.path(), "exp.toml", EXPORT);
    let est = write(tmp.path(), "est.toml", ESTIMATE);
    let data_dir = tmp.path().join("data");
    let out = twostage(&["export-dgp", "--config", &exp, "--out", data_dir.to_str().unwrap()]);
    assert!(out.status.success(), "{}", stderr(&out));
    let csv_path = data_dir.join("dataset.csv");
    let csv = fs::read_to_string(&csv_path).unwrap();
    assert_eq!(csv.lines().next(), Some("d,y1,z1,x1"));
    assert_eq!(csv.lines().count(), 251);

    let res_dir = tmp.path().join("res");
    let run = || {
        let out = twostage(&[
            "estimate",
            "--data",
            csv_path.to_str().unwrap(),
            "--config",
            &est,
            "--out",
            res_dir.to_str().unwrap(),
        ]);
        assert!(out.status.success(), "{}", stderr(&out));
        (String::from_utf8(out.stdout).unwrap(), fs::read_to_string(res_dir.join("estimate.json")).unwrap())
    };
    let (stdout, json) = run();
    assert!(stdout.contains("b11"));
    assert!(stdout.contains("argmax set size"));
    let parsed: serde_json::Value = serde_json::from_str(&json).unwrap();
    assert!(parsed["b11"] == 1 || parsed["b11"] == -1);
    assert_eq!(parsed["btilde"].as_array().unwrap().len(), 1);
    assert_eq!(parsed["observations"], 250);
    assert_eq!(run(), (stdout, json));
}

#[test]
fn estimate_with_subsampling_reports_interval() {
    let tmp = TempDir::new().unwrap();
    let exp = write(tmp.path(), "exp.toml", EXPORT);
    let est = write(
        tmp.path(),
        "est.toml",
        &format!("{ESTIMATE}\n[subsampling]\nreplicates = 20\nlevel = 0.9\nseed = 3\n"),
    );
    let data_dir = tmp.path().join("data");
    assert!(twostage(&["export-dgp", "--config", &exp, "--out", data_dir.to_str().unwrap()])
        .status
        .success());
    let out = twostage(&["estimate", "--data", data_dir.join("dataset.csv").to_str().unwrap(), "--config", &est]);
    assert!(out.status.success(), "{}", stderr(&out));
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("ci[0] at 0.9"), "{stdout}");
    assert!(stdout.contains("subsamples used"));
}

#[test]
fn malformed_dataset_cites_line() {
    let tmp = TempDir::new().unwrap();
    let est = write(tmp.path(), "est.toml", ESTIMATE);
    let mut body = String::from("d,y1,z1,x1\n");
    for i in 0..5 {
        body.push_str(&format!("{},1.0,0.5,{}\n", i % 2, i));
    }
    body.push_str("1,abc,0.5,0.1\n");
    let data = write(tmp.path(), "bad.csv", &body);
    let out = twostage(&["estimate", "--data", &data, "--config", &est]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 7"), "{}", stderr(&out));
}

#[test]
fn missing_config_names_path() {
    let tmp = TempDir::new().unwrap();
    let missing = tmp.path().join("absent.toml");
    let out = twostage(&["simulate", "--config", missing.to_str().unwrap(), "--out", tmp.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("absent.toml"));
}

#[test]
fn unknown_and_invalid_keys_are_config_errors() {
    let tmp = TempDir::new().unwrap();
    let out_dir = tmp.path().join("o");
    for body in [
        format!("{SIMULATE}\nextra = 1\n"),
        SIMULATE.replace("reps = 6", "reps = 0"),
        SIMULATE.replace("c = 0.8", "c = -1.0"),
        SIMULATE.replace("design = \"linear\"", "design = \"cubic\""),
    ] {
        let cfg = write(tmp.path(), "sim.toml", &body);
        let out = twostage(&["simulate", "--config", &cfg, "--out", out_dir.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(2), "{body}\n{}", stderr(&out));
    }
}

#[test]
fn cell_failure_is_computation_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write(tmp.path(), "sim.toml", &SIMULATE.replace("[100, 200]", "[1]"));
    let out = twostage(&["simulate", "--config", &cfg, "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn unwritable_output_is_io_error() {
    let tmp = TempDir::new().unwrap();
    let exp = write(tmp.path(), "exp.toml", EXPORT);
    // A regular file where the output directory should be.
    let blocker = write(tmp.path(), "blocker", "");
    let out = twostage(&["export-dgp", "--config", &exp, "--out", &blocker]);
    assert_eq!(out.status.code(), Some(4), "{}", stderr(&out));
}

#[test]
fn kernelcheck_prints_coefficients() {
    let out = twostage(&["kernelcheck"]);
    assert!(out.status.success());
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert!(stdout.contains("a "));
    assert!(stdout.contains("residual"));
    assert!(stdout.contains("moment u^6"));
}

#[test]
fn bad_usage_exits_two() {
    assert_eq!(twostage(&["simulate"]).status.code(), Some(2));
    assert_eq!(twostage(&["frobnicate"]).status.code(), Some(2));
}

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn qda(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_qda"));
    cmd.args(args).env_remove("QDA_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().expect("qda runs")
}

fn write_config(dir: &Path, text: &str) -> String {
    let p = dir.join("config.toml");
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

/// `value` of the first results row matching `quantity` (and `coord`, if given).
fn result(csv: &str, quantity: &str, coord: &str) -> f64 {
    csv.lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| l.split(',').collect::<Vec<_>>())
        .find(|c| c[0] == quantity && (coord.is_empty() || c[1] == coord))
        .unwrap_or_else(|| panic!("no {quantity} row in\n{csv}"))[3]
        .parse()
        .unwrap()
}

const MIXTURE: &str = r#"
schema_version = 1

[target]
model = "beta_mixture"

[[proposal]]
kind = "uniform_box"
lower = [0.0]
upper = [1.0]

[discretization]
generator = "midpoint1d"
m = 10

[outputs]
mean = true
kd = true
rp = 30
draws = 200
quantiles = [{ coord = 1, alpha = 0.5 }]
"#;

#[test]
fn minimal_run_reproduces_the_grid_distance() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MIXTURE);
    let out = tmp.path().join("out");
    let o = qda(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    let kd = result(&results, "kd", "");
    assert!((kd / 0.0872 - 1.0).abs() < 0.01, "KD {kd}");
    assert!((result(&results, "rp_kd", "") / 0.0951 - 1.0).abs() < 0.01);
    for f in ["results.csv", "posterior.csv", "rp.csv", "draws.csv", "run_log.json"] {
        assert!(out.join(f).exists(), "{f} missing");
    }
    let posterior = fs::read_to_string(out.join("posterior.csv")).unwrap();
    assert!(posterior.contains("# M=10"));
    assert!(posterior.lines().any(|l| l == "y_1,mass,log_weight"));
}

#[test]
fn every_csv_carries_engine_hash_and_seed() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MIXTURE);
    let out = tmp.path().join("out");
    let o = qda(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--seed", "17"], &[]);
    assert!(o.status.success());
    for f in ["results.csv", "posterior.csv", "rp.csv", "draws.csv"] {
        let text = fs::read_to_string(out.join(f)).unwrap();
        assert!(text.starts_with("# engine=qda-core "), "{f}");
        assert!(text.contains("# config_hash="), "{f}");
        assert!(text.contains("# seed=17"), "{f}");
    }
    assert!(fs::read_to_string(out.join("draws.csv")).unwrap().contains("# draws_seed="));
}

#[test]
fn reruns_are_byte_identical_across_thread_counts() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
schema_version = 1
seed = 5
[target]
model = "normal2d"
[[proposal]]
kind = "mvcauchy"
location = [0.0, 0.0]
scale = [[1.0, 0.0], [0.0, 1.0]]
[discretization]
m = 1000
stages = 2
[outputs]
rp = 50
draws = 100
quantiles = [{ coord = 2, alpha = 0.1 }]
[baselines]
repetitions = 4
mcmc_length = 200
exact_draws = 200
"#;
    let cfg = write_config(tmp.path(), text);
    let a = tmp.path().join("a");
    let b = tmp.path().join("b");
    assert!(qda(&["run", "--config", &cfg, "--out-dir", a.to_str().unwrap(), "--threads", "1"], &[]).status.success());
    assert!(qda(&["run", "--config", &cfg, "--out-dir", b.to_str().unwrap()], &[("QDA_THREADS", "8")]).status.success());
    for f in ["results.csv", "posterior.csv", "rp.csv", "draws.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f} differs");
    }
    let log: serde_json::Value = serde_json::from_slice(&fs::read(b.join("run_log.json")).unwrap()).unwrap();
    assert_eq!(log["threads"], 8);
    assert_eq!(log["stages"].as_array().unwrap().len(), 2);
    let results = fs::read_to_string(a.join("results.csv")).unwrap();
    assert!(results.contains("mcmc_mean,1,4,"));
    assert!(results.contains("exact_mc_quantile,2,0.1,"));
}

#[test]
fn low_acceptance_is_flagged_in_the_log() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
schema_version = 1
[target]
model = "beta"
a = 2
b = 3
[[proposal]]
kind = "uniform_box"
lower = [0.0]
upper = [20.0]
[discretization]
generator = "sobol"
m = 1000
warn_below = 0.1
"#;
    let cfg = write_config(tmp.path(), text);
    let out = tmp.path().join("out");
    let o = qda(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()], &[]);
    assert!(o.status.success());
    let log: serde_json::Value = serde_json::from_slice(&fs::read(out.join("run_log.json")).unwrap()).unwrap();
    let warnings = log["warnings"].as_array().unwrap();
    assert_eq!(warnings.len(), 1, "{log}");
    assert!(warnings[0].as_str().unwrap().contains("below 0.1"));
    assert!(String::from_utf8_lossy(&o.stderr).contains("warning"));
}

#[test]
fn invalid_config_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    let text = r#"
schema_version = 1
[target]
model = "normal2d"
[[proposal]]
kind = "uniform_box"
lower = [0.0]
upper = [1.0]
[discretization]
m = 100
[outputs]
frobnicate = true
"#;
    let cfg = write_config(tmp.path(), text);
    let out = tmp.path().join("out");
    let o = qda(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()], &[]);
    assert!(!o.status.success());
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("dimension 2"), "{err}");
    assert!(err.contains("outputs.frobnicate: unknown key"), "{err}");
    assert!(!out.exists());
}

#[test]
fn runtime_failure_writes_nothing() {
    let tmp = TempDir::new().unwrap();
    // Proposal far from the Beta support: every point gets zero mass.
    let text = r#"
schema_version = 1
[target]
model = "beta"
a = 2
b = 3
[[proposal]]
kind = "uniform_box"
lower = [5.0]
upper = [6.0]
[discretization]
m = 100
"#;
    let cfg = write_config(tmp.path(), text);
    let out = tmp.path().join("out");
    let o = qda(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap()], &[]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("acceptance rate 0"));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn rp_and_sample_write_only_their_files() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MIXTURE);
    let rp = tmp.path().join("rp");
    let sample = tmp.path().join("sample");
    assert!(qda(&["rp", "--config", &cfg, "--out-dir", rp.to_str().unwrap()], &[]).status.success());
    assert!(qda(&["sample", "--config", &cfg, "--out-dir", sample.to_str().unwrap()], &[]).status.success());
    let names = |d: &Path| {
        let mut v: Vec<String> = fs::read_dir(d).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
        v.sort();
        v
    };
    assert_eq!(names(&rp), vec!["rp.csv", "run_log.json"]);
    assert_eq!(names(&sample), vec!["draws.csv", "run_log.json"]);
    let rp_csv = fs::read_to_string(rp.join("rp.csv")).unwrap();
    assert!(rp_csv.lines().any(|l| l == "y_1,atom,multiplicity"));
}

#[test]
fn rp_without_size_is_an_error() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), &MIXTURE.replace("rp = 30\n", ""));
    let o = qda(&["rp", "--config", &cfg, "--out-dir", tmp.path().join("o").to_str().unwrap()], &[]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("outputs.rp"));
}

#[test]
fn benchmark_t1_passes_and_writes_a_table() {
    let tmp = TempDir::new().unwrap();
    let out = tmp.path().join("bench");
    let o = qda(
        &["benchmark", "t1", "--out-dir", out.to_str().unwrap(), "--repetitions", "10", "--threads", "2"],
        &[],
    );
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(o.status.success(), "{stdout}");
    assert_eq!(stdout.lines().filter(|l| l.starts_with("PASS")).count(), 4, "{stdout}");
    let csv = fs::read_to_string(out.join("benchmark_t1.csv")).unwrap();
    assert!(csv.contains("# repetitions=10"));
    assert!(csv.lines().any(|l| l.starts_with("MCMC,M=10,10,")));
}

#[test]
fn unknown_benchmark_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let o = qda(&["benchmark", "t9", "--out-dir", tmp.path().to_str().unwrap()], &[]);
    assert!(!o.status.success());
    assert!(String::from_utf8_lossy(&o.stderr).contains("unknown table"));
}

#[test]
fn zero_threads_is_rejected() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_config(tmp.path(), MIXTURE);
    let o = qda(&["run", "--config", &cfg, "--out-dir", tmp.path().join("o").to_str().unwrap()], &[("QDA_THREADS", "0")]);
    assert!(!o.status.success());
}

#[cfg(unix)]
#[test]
fn subprocess_target_runs_through_the_protocol() {
    let tmp = TempDir::new().unwrap();
    // Standard normal in one coordinate, computed by the shell via awk per line.
    let script = tmp.path().join("target.sh");
    fs::write(&script, "#!/bin/sh\nwhile read x; do awk -v x=\"$x\" 'BEGIN { printf \"%.17g\\n\", 0.5 * x * x }'; done\n").unwrap();
    let text = format!(
        r#"
schema_version = 1
[target]
model = "subprocess"
program = "sh"
args = ["{}"]
support = ["real"]
[[proposal]]
kind = "mvcauchy"
location = [0.0]
scale = [[1.0]]
[discretization]
m = 256
"#,
        script.display()
    );
    let cfg = write_config(tmp.path(), &text);
    let out = tmp.path().join("out");
    let o = qda(&["run", "--config", &cfg, "--out-dir", out.to_str().unwrap(), "--threads", "4"], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let results = fs::read_to_string(out.join("results.csv")).unwrap();
    assert!(result(&results, "mean", "1").abs() < 0.05);
    assert!((result(&results, "covariance", "1") - 1.0).abs() < 0.1);
}

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_setgauge"))
}

fn write_config(dir: &Path, name: &str, body: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, body).unwrap();
    path
}

fn run(args: &[&str], config: &Path, out: &Path) -> Output {
    bin()
        .args(args)
        .arg("--config")
        .arg(config)
        .arg("--out")
        .arg(out)
        .output()
        .unwrap()
}

const STEP_SET: &str = r#"
mode = "set"
integral = "mcshane"
tol = 1e-6

[integrand]
family = "step"
breakpoints = [0.3]
values = [[1.0, 0.0], [0.0, 2.0]]
"#;

#[test]
fn step_set_integration_matches_oracle() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", STEP_SET);
    let out = run(&["integrate"], &cfg, &dir.path().join("out"));
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));

    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("out/result.json")).unwrap()).unwrap();
    assert_eq!(json["converged"], true);
    assert_eq!(json["kind"], "mcshane");
    assert!(json["oracle"]["distance"].as_f64().unwrap() < 1e-6);

    let csv = fs::read_to_string(dir.path().join("out/convergence.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("iter,gauge,n_intervals,succ_diff,err_bound"));
    for line in lines {
        let cols: Vec<&str> = line.split(',').collect();
        assert_eq!(cols.len(), 5);
        assert!(cols[1].starts_with("step("), "{line}");
    }
}

#[test]
fn pathological_set_mode_exits_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "mode = \"set\"\nintegral = \"henstock\"\ntol = 1e-3\n[integrand]\nfamily = \"derivative_pathological\"\n",
    );
    let out = run(&["integrate"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(2));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    assert_eq!(json["converged"], false);
}

#[test]
fn pathological_vector_henstock_reaches_sin_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "run.toml",
        "integral = \"henstock\"\ntol = 1e-3\n[integrand]\nfamily = \"derivative_pathological\"\n",
    );
    let out = run(&["integrate"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("result.json")).unwrap()).unwrap();
    let v = json["value"]["vector"][0].as_f64().unwrap();
    assert!((v - 1f64.sin()).abs() < 1e-3);
}

#[test]
fn e_over_t_demo_rows_are_at_least_one() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "demo.toml", "[demo]\ntrials = 100\n");
    let out = bin()
        .args(["demo", "e_over_t", "--seed", "11", "--config"])
        .arg(&cfg)
        .arg("--out")
        .arg(dir.path())
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = fs::read_to_string(dir.path().join("report.csv")).unwrap();
    let rows: Vec<&str> = csv.lines().skip(1).collect();
    assert_eq!(rows.len(), 100);
    for row in rows {
        let observed: f64 = row.split(',').nth(2).unwrap().parse().unwrap();
        assert!(observed >= 1.0, "{row}");
    }
    assert!(dir.path().join("report.txt").exists());
}

#[test]
fn identical_config_and_seed_give_identical_csv() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "run.toml", &format!("seed = 5\n{STEP_SET}\n[demo]\ncases = 5\ntrials = 20\n"));
    let mut outputs = Vec::new();
    for k in 0..2 {
        let out = dir.path().join(format!("run{k}"));
        assert_eq!(run(&["integrate"], &cfg, &out).status.code(), Some(0));
        assert_eq!(run(&["demo", "e_over_t"], &cfg, &out).status.code(), Some(0));
        let conv = fs::read(out.join("convergence.csv")).unwrap();
        let demo = fs::read(out.join("report.csv")).unwrap();
        assert_eq!(run(&["demo", "glim_roundtrip"], &cfg, &out).status.code(), Some(0));
        let glim = fs::read(out.join("report.csv")).unwrap();
        outputs.push((conv, demo, glim));
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn bad_config_reports_location() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "bad.toml", "tol = 1e-3\nintegral = \"riemann\"\n");
    let out = run(&["integrate"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line 2") && err.contains("integral"), "{err}");

    let cfg = write_config(dir.path(), "missing.toml", "tol = 1e-3\n");
    let out = run(&["integrate"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("integrand"));
}

#[test]
fn depth_exceeded_is_an_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.toml",
        "[partition]\nmax_depth = 3\ngauge = { kind = \"constant\", c = 0.001 }\n",
    );
    let out = run(&["partition"], &cfg, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("depth"));
}

#[test]
fn partition_and_check_write_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        "p.toml",
        "seed = 3\n[check]\ncases = 40\n[partition]\nperron = true\ngauge = { kind = \"step\", breakpoints = [0.5], values = [0.5, 0.05] }\n",
    );
    assert_eq!(run(&["partition"], &cfg, dir.path()).status.code(), Some(0));
    let csv = fs::read_to_string(dir.path().join("partition.csv")).unwrap();
    assert!(csv.starts_with("a,b,tag\n"));
    let total: f64 = csv
        .lines()
        .skip(1)
        .map(|l| {
            let c: Vec<f64> = l.split(',').map(|x| x.parse().unwrap()).collect();
            c[1] - c[0]
        })
        .sum();
    assert!((total - 1.0).abs() < 1e-12);

    assert_eq!(run(&["check"], &cfg, dir.path()).status.code(), Some(0));
    let check = fs::read_to_string(dir.path().join("check.csv")).unwrap();
    assert!(check.lines().skip(1).all(|l| l.split(',').nth(2) == Some("0")), "{check}");
}

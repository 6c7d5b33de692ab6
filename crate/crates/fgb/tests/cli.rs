//! End-to-end checks of the `fgb` binary: output determinism, config
//! precedence, and exit codes.

use std::path::Path;
use std::process::{Command, Output};

fn fgb(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fgb"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

#[test]
fn simulate_is_byte_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let args_for = |out: &str, format: &str| {
        vec![
            "simulate".to_string(),
            "--graph".into(),
            "star:6".into(),
            "--instance".into(),
            "0.5,0.6,0.5,0.5,0.5,0.5".into(),
            "--algo".into(),
            "phased_lp".into(),
            "-T".into(),
            "5000".into(),
            "--replicates".into(),
            "4".into(),
            "--seed".into(),
            "11".into(),
            "--profile".into(),
            "demo".into(),
            "--workers".into(),
            "2".into(),
            "--format".into(),
            format.into(),
            "--out".into(),
            out.into(),
        ]
    };
    for format in ["csv", "json"] {
        let a = format!("a.{format}");
        let b = format!("b.{format}");
        for out in [&a, &b] {
            let argv = args_for(out, format);
            let argv: Vec<&str> = argv.iter().map(String::as_str).collect();
            let res = fgb(&argv, dir.path());
            assert!(res.status.success(), "{}", String::from_utf8_lossy(&res.stderr));
        }
        let left = std::fs::read(dir.path().join(&a)).unwrap();
        let right = std::fs::read(dir.path().join(&b)).unwrap();
        assert_eq!(left, right, "{format} outputs differ between identical runs");
        assert!(!left.is_empty());
    }
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::json!({
        "graph": "bandit:2",
        "instance": "0.6,0.35",
        "algo": "ucbn",
        "T": 500,
        "replicates": 2,
        "seed": 3,
        "profile": "demo",
        "workers": 1
    });
    std::fs::write(dir.path().join("cfg.json"), cfg.to_string()).unwrap();

    let base = fgb(&["simulate", "--config", "cfg.json"], dir.path());
    assert!(base.status.success());
    let text = String::from_utf8(base.stdout).unwrap();
    assert!(text.lines().last().unwrap().contains(",ucbn,custom,2,3"));

    // The --seed flag overrides the file value.
    let over = fgb(&["simulate", "--config", "cfg.json", "--seed", "9"], dir.path());
    assert!(over.status.success());
    let text = String::from_utf8(over.stdout).unwrap();
    assert!(text.lines().last().unwrap().ends_with(",ucbn,custom,2,9"));
}

#[test]
fn analyze_reports_complexities() {
    let dir = tempfile::tempdir().unwrap();
    let out = fgb(
        &["analyze", "--graph", "star:5", "--instance", "0.5,0.5,0.5,0.5,0.6"],
        dir.path(),
    );
    assert!(out.status.success());
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((report["c_star"].as_f64().unwrap() - 10.0).abs() < 1e-6);
    assert_eq!(report["star_condition"], serde_json::json!(true));
}

#[test]
fn lp_subcommand_prints_certificate() {
    let dir = tempfile::tempdir().unwrap();
    let lp = serde_json::json!({
        "costs": [1.0, 1.0],
        "rows": [
            {"support": [0], "threshold": 2.0},
            {"support": [1], "threshold": 3.0}
        ]
    });
    std::fs::write(dir.path().join("lp.json"), lp.to_string()).unwrap();
    let out = fgb(&["lp", "lp.json"], dir.path());
    assert!(out.status.success());
    let sol: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!((sol["value"].as_f64().unwrap() - 5.0).abs() < 1e-9);
    assert!(sol["duality_gap"].as_f64().unwrap().abs() < 1e-9);
    assert_eq!(sol["status"], serde_json::json!("optimal"));
}

#[test]
fn scenario_writes_bundle_and_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = fgb(
        &[
            "scenario", "cube_a", "--n", "2", "-T", "800", "--replicates", "2",
            "--workers", "1", "--out", "bundle.json", "--csv",
        ],
        dir.path(),
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let bundle: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("bundle.json")).unwrap())
            .unwrap();
    assert!(bundle["cube_table"]["a_env_a"].as_f64().unwrap() > 0.0);
    for algo in ["phased_lp", "ucbn"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("bundle.{algo}.csv"))).unwrap();
        assert!(csv.starts_with("t,regret_mean,regret_std,algo,scenario,replicates,master_seed"));
        let chart = std::fs::read_to_string(dir.path().join(format!("bundle.{algo}.chart.json")))
            .unwrap();
        assert!(chart.contains("regret_mean"));
    }
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    // Unknown algorithm: configuration error.
    let out = fgb(
        &["simulate", "--graph", "bandit:2", "--instance", "0.5,0.4", "--algo", "nope"],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(2));

    // Invalid graph parameters: configuration error.
    let out = fgb(&["analyze", "--graph", "star:1", "--instance", "0.5"], dir.path());
    assert_eq!(out.status.code(), Some(2));

    // Unwritable output path: runtime error.
    let out = fgb(
        &[
            "simulate", "--graph", "bandit:2", "--instance", "0.5,0.4", "-T", "50",
            "--replicates", "1", "--profile", "demo", "--out", "missing-dir/x.csv",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(3));

    // Success path.
    let out = fgb(
        &[
            "simulate", "--graph", "bandit:2", "--instance", "0.5,0.4", "-T", "50",
            "--replicates", "1", "--profile", "demo",
        ],
        dir.path(),
    );
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn graph_and_instance_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("g.json"),
        r#"{"k":3,"adj":[[0,1],[0,1,2],[1,2]]}"#,
    )
    .unwrap();
    std::fs::write(dir.path().join("i.json"), r#"{"means":[0.5,0.6,0.4],"sigma":0.5}"#).unwrap();
    let out = fgb(&["analyze", "--graph", "g.json", "--instance", "i.json"], dir.path());
    assert!(out.status.success());

    // Invalid graph file is rejected as a config error.
    std::fs::write(dir.path().join("bad.json"), r#"{"k":2,"adj":[[0,1],[1]]}"#).unwrap();
    let out = fgb(&["analyze", "--graph", "bad.json", "--instance", "0.5,0.4"], dir.path());
    assert_eq!(out.status.code(), Some(2));
}

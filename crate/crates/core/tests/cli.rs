use std::path::Path;
use std::process::{Command, Output};

fn cvqec(args: &[&str], envs: &[(&str, &Path)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_cvqec"));
    cmd.args(args).env_remove("CVQEC_OUTPUT_DIR");
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn body(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap().lines().filter(|l| !l.starts_with('#')).collect::<Vec<_>>().join("\n")
}

#[test]
fn smoke_simulate_writes_results() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let started = std::time::Instant::now();
    let o = cvqec(&["simulate", "--rounds", "10", "--trajectories", "8", "--output-dir", out], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(started.elapsed().as_secs_f64() < 5.0);
    for mode in ["no_qec", "gkp_only", "concatenated"] {
        let csv = std::fs::read_to_string(dir.path().join(format!("per_round_{mode}.csv"))).unwrap();
        assert!(csv.contains("# config_hash: ") && csv.contains("# seed: "));
        assert!(csv.contains("\nround,mean,std,n\n1,"));
        assert_eq!(csv.lines().filter(|l| !l.starts_with('#')).count(), 11);
        assert!(dir.path().join(format!("traces_{mode}.csv")).exists());
    }
    let summary: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["modes"].as_array().unwrap().len(), 3);
    assert_eq!(summary["config"]["rounds"], 10);
}

#[test]
fn same_seed_gives_identical_csv_bodies() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (dir, workers) in [(&a, "1"), (&b, "3")] {
        let o = cvqec(
            &[
                "simulate", "--rounds", "30", "--trajectories", "40", "--seed", "99", "--workers", workers,
                "--output-dir", dir.path().to_str().unwrap(),
            ],
            &[],
        );
        assert!(o.status.success());
    }
    for f in ["per_round_concatenated.csv", "traces_gkp_only.csv", "per_round_no_qec.csv"] {
        assert_eq!(body(&a.path().join(f)), body(&b.path().join(f)), "{f}");
    }
}

#[test]
fn config_file_env_and_flag_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    let file_out = dir.path().join("file-out");
    let env_out = dir.path().join("env-out");
    let flag_out = dir.path().join("flag-out");
    std::fs::write(
        &cfg,
        format!(
            r#"{{"rounds": 4, "trajectories": 3, "modes": ["no_qec"], "output_dir": {:?}}}"#,
            file_out.to_str().unwrap()
        ),
    )
    .unwrap();
    let c = cfg.to_str().unwrap();

    assert!(cvqec(&["simulate", "-c", c], &[]).status.success());
    assert!(file_out.join("per_round_no_qec.csv").exists());

    assert!(cvqec(&["simulate", "-c", c], &[("CVQEC_OUTPUT_DIR", &env_out)]).status.success());
    assert!(env_out.join("summary.json").exists());

    let o = cvqec(
        &["simulate", "-c", c, "--rounds", "6", "--output-dir", flag_out.to_str().unwrap()],
        &[("CVQEC_OUTPUT_DIR", &env_out)],
    );
    assert!(o.status.success());
    let s: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(flag_out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(s["config"]["rounds"], 6);
    assert_eq!(s["config"]["trajectories"], 3);
    assert_eq!(s["config"]["sigma_sq"], 0.2);
}

#[test]
fn config_errors_exit_2_with_key() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"rounds\": 5,\n  \"sigma\": 0.2\n}\n").unwrap();
    let o = cvqec(&["simulate", "-c", cfg.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("sigma") && err.contains("line 3"), "{err}");

    let o = cvqec(&["simulate", "--rounds", "0"], &[]);
    assert_eq!(o.status.code(), Some(2));
    let o = cvqec(&["simulate", "--bogus"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn analyze_writes_datasets_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().to_str().unwrap();
    let o = cvqec(&["analyze", "table1", "table2", "table3", "residual_curves", "--output-dir", out], &[]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let t1 = body(&dir.path().join("table1.csv"));
    assert!(t1.contains("eps_x7,x,7,s1_x,-2"));
    assert!(t1.contains("eps_p1,p,1,s3_p,1"));
    let t2 = body(&dir.path().join("table2.csv"));
    assert_eq!(t2.lines().filter(|l| l.starts_with("x,")).count(), 7);
    assert_eq!(t2.lines().filter(|l| l.starts_with("p,")).count(), 7);
    let t3 = std::fs::read_to_string(dir.path().join("table3.csv")).unwrap();
    assert!(t3.contains("# note: "));
    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["datasets"].as_array().unwrap().len(), 4);
    assert_eq!(manifest["config_hash"].as_str().unwrap().len(), 64);
}

#[test]
fn analyze_regenerates_identically() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let cfg = a.path().join("c.json");
    std::fs::write(&cfg, r#"{"report_settings": {"fig5_samples": 500}}"#).unwrap();
    for dir in [&a, &b] {
        let o = cvqec(&["analyze", "fig5", "-c", cfg.to_str().unwrap(), "-o", dir.path().to_str().unwrap()], &[]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let fa = std::fs::read(a.path().join("fig5.csv")).unwrap();
    let fb = std::fs::read(b.path().join("fig5.csv")).unwrap();
    assert_eq!(fa, fb);
}

#[test]
fn unknown_report_id_exits_2_listing_valid_ids() {
    let dir = tempfile::tempdir().unwrap();
    let o = cvqec(&["analyze", "fig7", "-o", dir.path().to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    for id in ["table1", "table2", "table3", "fig5", "residual_curves"] {
        assert!(err.contains(id), "{err}");
    }
}

#[test]
fn verify_subset_reports_each_criterion() {
    let o = cvqec(&["verify", "--quick", "--criterion", "1", "--criterion", "9"], &[]);
    assert_eq!(o.status.code(), Some(0));
    let out = String::from_utf8_lossy(&o.stdout);
    assert!(out.contains("PASS criterion  1 table1_exactness"));
    assert!(out.contains("PASS criterion  9 table3_reporting"));
    let o = cvqec(&["verify", "--criterion", "11"], &[]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn help_and_version_exit_0() {
    assert_eq!(cvqec(&["--help"], &[]).status.code(), Some(0));
    assert_eq!(cvqec(&["--version"], &[]).status.code(), Some(0));
    assert_eq!(cvqec(&[], &[]).status.code(), Some(2));
}

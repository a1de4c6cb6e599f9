//! End-to-end runs of the `bvlsc` binary. Set `UPDATE_GOLDEN=1` to rewrite `tests/golden/`.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn manifest() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
}

fn bvlsc(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bvlsc")).args(args).output().expect("binary runs")
}

fn analyze(config: &Path, out: &Path, extra: &[&str]) -> Output {
    let mut args = vec!["analyze", config.to_str().unwrap(), "--out-dir", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    bvlsc(&args)
}

fn scenarios() -> Vec<PathBuf> {
    let mut v: Vec<PathBuf> = fs::read_dir(manifest().join("scenarios"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|e| e == "json"))
        .collect();
    v.sort();
    v
}

#[test]
fn bundled_scenarios_match_golden_reports() {
    let update = std::env::var_os("UPDATE_GOLDEN").is_some();
    let golden = manifest().join("tests/golden");
    for path in scenarios() {
        let out = tempfile::tempdir().unwrap();
        let o = analyze(&path, out.path(), &[]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let report = fs::read_to_string(out.path().join("report.json")).unwrap();
        let expected = golden.join(path.file_name().unwrap());
        if update {
            fs::create_dir_all(&golden).unwrap();
            fs::write(&expected, &report).unwrap();
        } else {
            let want = fs::read_to_string(&expected).unwrap_or_else(|_| panic!("missing {}; run with UPDATE_GOLDEN=1", expected.display()));
            assert!(report == want, "{} differs from its golden report", path.display());
        }
    }
}

#[test]
fn worker_count_does_not_change_reports() {
    let path = manifest().join("scenarios/example_1_2.json");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    assert_eq!(analyze(&path, a.path(), &["--workers", "1"]).status.code(), Some(0));
    assert_eq!(analyze(&path, b.path(), &["--workers", "4"]).status.code(), Some(0));
    let read = |d: &Path| fs::read(d.join("report.json")).unwrap();
    assert_eq!(read(a.path()), read(b.path()));
}

#[test]
fn boundary_jump_scenario_writes_tables_and_witnesses() {
    let out = tempfile::tempdir().unwrap();
    let o = analyze(&manifest().join("scenarios/example_1_2.json"), out.path(), &[]);
    assert_eq!(o.status.code(), Some(0));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("not-wlsc"), "{stdout}");
    for f in ["timing.json", "tables/qslb.csv", "tables/liminf_0.csv", "tables/decomposition.csv", "witnesses/qslb_0.json"] {
        assert!(out.path().join(f).exists(), "{f} missing");
    }
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["overall"], "not-wlsc");
    assert!(report.get("timing").is_none());
    assert_eq!(report["config"]["seed"], 1);
}

#[test]
fn seed_override_is_recorded() {
    let out = tempfile::tempdir().unwrap();
    let o = analyze(&manifest().join("scenarios/example_1_2.json"), out.path(), &["--seed", "42"]);
    assert_eq!(o.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    assert_eq!(report["config"]["seed"], 42);
}

#[test]
fn missing_integrand_exits_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    fs::write(&cfg, r#"{ "schema_version": 1, "name": "bad", "domain": { "kind": "interval", "a": 0.0, "b": 1.0 } }"#).unwrap();
    let o = analyze(&cfg, &dir.path().join("out"), &[]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("integrand"), "{err}");
    assert!(!dir.path().join("out/report.json").exists());
}

#[test]
fn unknown_key_and_bad_flags_exit_with_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("typo.json");
    let text = fs::read_to_string(manifest().join("scenarios/norm_square.json")).unwrap().replacen("\"seed\"", "\"sede\"", 1);
    fs::write(&cfg, text).unwrap();
    assert_eq!(analyze(&cfg, dir.path(), &[]).status.code(), Some(2));
    assert_eq!(bvlsc(&["analyze"]).status.code(), Some(2));
    assert_eq!(bvlsc(&["frobnicate", "x.json"]).status.code(), Some(2));
    assert_eq!(analyze(&dir.path().join("absent.json"), dir.path(), &[]).status.code(), Some(2));
    assert_eq!(analyze(&manifest().join("scenarios/norm_square.json"), dir.path(), &["--h", "-1"]).status.code(), Some(2));
}

#[test]
fn unwritable_output_exits_with_execution_error() {
    let dir = tempfile::tempdir().unwrap();
    let blocker = dir.path().join("file");
    fs::write(&blocker, "").unwrap();
    let o = analyze(&manifest().join("scenarios/example_1_2.json"), &blocker.join("out"), &[]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn recession_subcommand_writes_mu_table() {
    let out = tempfile::tempdir().unwrap();
    let cfg = manifest().join("scenarios/norm_square.json");
    let o = bvlsc(&["recession", cfg.to_str().unwrap(), "--out-dir", out.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let mu = fs::read_to_string(out.path().join("tables/mu.csv")).unwrap();
    assert!(mu.starts_with("t,sampled,analytic"));
    assert!(out.path().join("tables/recession.csv").exists());
}

#[test]
fn help_exits_cleanly() {
    let o = bvlsc(&["--help"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&o.stdout).contains("analyze"));
}

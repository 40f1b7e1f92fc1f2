use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_morse-lab")).args(args).output().expect("binary runs")
}

fn run_with(kind: &str, config: &str, out: &Path, extra: &[&str]) -> Output {
    let cfg = out.with_extension("json");
    fs::write(&cfg, config).unwrap();
    let mut args = vec![kind, "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    lab(&args)
}

const SMALL_MODEL: &str = r#"{"kind": "model", "id": "m", "seed": 4, "random": {"count": 4, "max_n": 2},
    "degree": 6, "tolerance": 0.01, "component_tolerance": 1e-6}"#;

#[test]
fn zero_degree_is_rejected_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bad");
    let cfg = r#"{"kind": "torus", "id": "t", "d": [0], "e": [1], "sweep": {"p": 3, "m_min": 2, "m_max": 4}}"#;
    let o = run_with("torus", cfg, &out, &[]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("degree zero"));
    assert!(!out.exists());
}

#[test]
fn invalid_configs_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let cases = [
        ("torus", r#"{"kind": "torus", "id": "t", "d": [1], "e": [1], "sweep": {"p": 1, "m_min": 2, "m_max": 4}}"#),
        ("torus", r#"{"kind": "torus", "id": "t", "d": [1], "e": [1], "sweep": {"p": 3, "m_min": 5, "m_max": 4}}"#),
        ("hodge", SMALL_MODEL),
        ("model", r#"{"kind": "model", "id": "m", "degree": 6, "tolerance": 0.01, "component_tolerance": 1e-6}"#),
        ("model", r#"{"kind": "model", "id": "m", "typo": 1}"#),
        ("all", "not json"),
    ];
    for (i, (kind, cfg)) in cases.iter().enumerate() {
        let out = dir.path().join(format!("case{i}"));
        let o = run_with(kind, cfg, &out, &[]);
        assert_eq!(o.status.code(), Some(2), "case {i}: {}", String::from_utf8_lossy(&o.stderr));
        assert!(!out.exists());
    }
    let o = lab(&["model", "--config", "/nonexistent/config.json", "--out", dir.path().join("x").to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn reruns_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    assert_eq!(run_with("model", SMALL_MODEL, &a, &["--jobs", "1"]).status.code(), Some(0));
    assert_eq!(run_with("model", SMALL_MODEL, &b, &["--jobs", "4"]).status.code(), Some(0));
    for file in ["report.csv", "summary.json"] {
        assert_eq!(fs::read(a.join(file)).unwrap(), fs::read(b.join(file)).unwrap());
    }
    let csv = fs::read_to_string(a.join("report.csv")).unwrap();
    assert_eq!(csv.lines().filter(|l| l.starts_with("m,kernel_identity,")).count(), 4);
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(a.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["status"], "pass");
    assert_eq!(summary["rows"], 24);
}

#[test]
fn seed_flag_changes_the_draw() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    run_with("model", SMALL_MODEL, &a, &[]);
    run_with("model", SMALL_MODEL, &b, &["--seed", "99"]);
    assert_ne!(fs::read(a.join("report.csv")).unwrap(), fs::read(b.join("report.csv")).unwrap());
}

#[test]
fn flat_torus_ratios_are_one() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("t");
    let cfg = r#"{"kind": "torus", "id": "t", "d": [1], "e": [1], "sweep": {"p": 3, "m_min": 2, "m_max": 12}}"#;
    assert_eq!(run_with("torus", cfg, &out, &[]).status.code(), Some(0));
    let csv = fs::read_to_string(out.join("report.csv")).unwrap();
    let ratios: Vec<&str> =
        csv.lines().filter(|l| l.starts_with("t,bergman_ratio,")).map(|l| l.split(',').nth(6).unwrap()).collect();
    assert_eq!(ratios.len(), 11);
    assert!(ratios.iter().all(|r| *r == "1.0000000000000000e0"));
}

#[test]
fn failures_exit_one_and_strict_promotes_warnings() {
    let dir = tempfile::tempdir().unwrap();
    // the theta kernel of a degree-one bundle is far from constant
    let theta = r#"{"kind": "torus", "id": "th", "d": [1], "e": [], "sweep": {"p": 3, "m_min": 2, "m_max": 3},
        "theta": {"k_max": 2, "grid": 31, "defect_tolerance": 1e-8}}"#;
    let o = run_with("torus", theta, &dir.path().join("th"), &[]);
    assert_eq!(o.status.code(), Some(1));
    assert!(dir.path().join("th/report.csv").exists());
    // radius below one at m = 2 only warns
    let trunc = r#"{"kind": "torus", "id": "tr", "d": [-1], "e": [2], "sweep": {"p": 3, "m_min": 2, "m_max": 3},
        "truncation": {"p": 3, "m_min": 2, "m_max": 6}}"#;
    assert_eq!(run_with("torus", trunc, &dir.path().join("lax"), &[]).status.code(), Some(0));
    assert_eq!(run_with("torus", trunc, &dir.path().join("strict"), &["--strict"]).status.code(), Some(1));
}

#[test]
fn all_accepts_a_list() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = format!(
        r#"[{SMALL_MODEL}, {{"kind": "hodge", "id": "h", "seed": 2, "count": 20, "max_spaces": 4, "max_dim": 6, "mu_points": 8}}]"#
    );
    let out = dir.path().join("all");
    assert_eq!(run_with("all", &cfg, &out, &[]).status.code(), Some(0));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["scenarios"], serde_json::json!(["h", "m"]));
    assert_eq!(summary["checks"]["h/truncation_inequality"]["passed"], 20);
}

#[test]
fn help_documents_the_columns() {
    for kind in ["model", "localize", "torus", "hodge", "all"] {
        let o = lab(&[kind, "--help"]);
        let text = String::from_utf8_lossy(&o.stdout);
        for col in ["scenario", "measured", "reference", "tolerance", "provenance"] {
            assert!(text.contains(col), "{kind} help lacks {col}");
        }
    }
}

use std::path::Path;
use std::process::{Command, Output};

fn dhtlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dhtlab"))
        .args(args)
        .env_remove("DHTLAB_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

#[test]
fn decompose_two() {
    let o = dhtlab(&["decompose", "2"]);
    assert_eq!(code(&o), 0);
    assert_eq!(stdout(&o).lines().next(), Some("2*K[a*H[a]] + I[a^2]"));
    assert!(stdout(&o).contains("equal: true"));
}

#[test]
fn decompose_json_reports_equality() {
    let o = dhtlab(&["--format", "json", "--no-timestamp", "decompose", "4"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["equal"], true);
    assert_eq!(v["k"], 4);
}

#[test]
fn skeletons_three() {
    let o = dhtlab(&["skeletons", "3"]);
    assert_eq!(code(&o), 0);
    let frames: Vec<String> = stdout(&o)
        .lines()
        .map(|l| l.split("  ").next().unwrap().trim().to_string())
        .collect();
    assert_eq!(
        frames,
        ["{{{1}, 2}, 3}", "{{1, {2}}, 3}", "{{1}, 2, {3}}", "{1, {2}, {3}}"]
    );
}

#[test]
fn skeleton_counts() {
    let o = dhtlab(&["skeletons", "5", "--count-only"]);
    assert_eq!(stdout(&o).trim(), "16");
    let o = dhtlab(&["skeletons", "3", "--count-only"]);
    assert_eq!(stdout(&o).trim(), "4");
}

#[test]
fn skeleton_norms_need_large_p() {
    let o = dhtlab(&["skeletons", "3", "--p", "8"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("norm "));
    assert_eq!(code(&dhtlab(&["skeletons", "3", "--p", "3"])), 2);
}

#[test]
fn usage_errors_exit_two() {
    for args in [
        &["skeletons", "0"][..],
        &["skeletons", "17"],
        &["decompose", "11"],
        &["norms", "--p", "1"],
        &["norms", "--p", "abc"],
        &["norms", "--methods", "nope"],
        &["estimate", "--op", "Q"],
        &["estimate", "--p", "0.5"],
        &["verify", "bogus"],
        &["--precision", "8", "decompose", "2"],
        &["frobnicate"],
    ] {
        assert_eq!(code(&dhtlab(args)), 2, "{args:?}");
    }
}

#[test]
fn bad_input_file_is_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.json");
    std::fs::write(&path, "not json").unwrap();
    let o = dhtlab(&["verify", "product-rule", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&o), 2);
}

#[test]
fn input_file_drives_checks() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("seq.json");
    std::fs::write(&path, "[[0, 1, 2], [3, -2, 5], [-4, 7, 1]]").unwrap();
    let o = dhtlab(&["verify", "product-rule", "--cases", "3", "--input", path.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
}

#[test]
fn norms_table() {
    let o = dhtlab(&["--format", "json", "--no-timestamp", "norms", "--p", "4,3"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["rows"].as_array().unwrap();
    let sharp4 = rows
        .iter()
        .find(|r| r["method"] == "sharp" && r["p"] == "4")
        .unwrap();
    assert!((sharp4["bound"].as_f64().unwrap() - (1.0 + 2f64.sqrt())).abs() < 1e-12);
    assert_eq!(sharp4["status"], "PROVEN");
    let sharp3 = rows
        .iter()
        .find(|r| r["method"] == "sharp" && r["p"] == "3")
        .unwrap();
    assert_eq!(sharp3["status"], "CONJECTURED");
    assert!((sharp3["bound"].as_f64().unwrap() - 3f64.sqrt()).abs() < 1e-12);
}

#[test]
fn json_is_byte_identical_without_timestamp() {
    for args in [
        &["--format", "json", "--no-timestamp", "norms", "--p", "4,6,8"][..],
        &["--format", "json", "--no-timestamp", "verify", "product-rule", "--cases", "5"],
        &["--format", "json", "--no-timestamp", "estimate", "--N", "64", "--iters", "5"],
    ] {
        let a = dhtlab(args);
        let b = dhtlab(args);
        assert_eq!(code(&a), 0);
        assert_eq!(a.stdout, b.stdout, "{args:?}");
        let text = stdout(&a);
        assert!(!text.contains("timestamp") && !text.contains("seconds"));
    }
}

#[test]
fn timestamp_present_by_default() {
    let o = dhtlab(&["--format", "json", "norms", "--p", "4"]);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert!(v["timestamp"].is_u64());
}

#[test]
fn verify_all_passes() {
    let o = dhtlab(&["verify", "all", "--cases", "10"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).ends_with("0 failed\n"));
}

#[test]
fn corrupted_kernel_is_caught() {
    let o = dhtlab(&["--corrupt-kernel", "K:3:1/1000", "verify", "all", "--cases", "10"]);
    assert_eq!(code(&o), 1);
    let text = stdout(&o);
    assert!(text.contains("FAILED"));
    for suite in ["product-rule", "fourier"] {
        assert!(
            text.lines().any(|l| l.contains(suite) && l.ends_with("FAILED")),
            "{suite} missed the corruption"
        );
    }
}

#[test]
fn malformed_corruption_is_usage_error() {
    assert_eq!(code(&dhtlab(&["--corrupt-kernel", "K:3", "verify", "all"])), 2);
}

#[test]
fn estimate_small_run() {
    let dir = tempfile::tempdir().unwrap();
    let curve = dir.path().join("curve.csv");
    let o = dhtlab(&[
        "--format",
        "json",
        "estimate",
        "--op",
        "K",
        "--p",
        "4",
        "--N",
        "128",
        "--iters",
        "10",
        "--curve",
        curve.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    for key in ["op", "p", "N", "iters", "seed", "best_ratio", "sharp", "gap", "seconds", "timestamp"] {
        assert!(!v[key].is_null(), "missing {key}");
    }
    let ratio = v["best_ratio"].as_f64().unwrap();
    let sharp = v["sharp"].as_f64().unwrap();
    assert!(ratio > 1.0 && ratio <= sharp);
    assert!(Path::new(&curve).exists());
    let rows = std::fs::read_to_string(&curve).unwrap();
    assert_eq!(rows.lines().count(), 11);
}

#[test]
fn estimate_csv_has_header() {
    let o = dhtlab(&["--format", "csv", "estimate", "--op", "H", "--p", "3", "--N", "32", "--iters", "3"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.starts_with("op,p,N,iters,seed,best_ratio,sharp,gap\nH,3"));
}

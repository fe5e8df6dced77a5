use std::path::Path;
use std::process::{Command, Output};

fn amrpc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_amrpc"))
        .current_dir(dir)
        .args(args)
        .env_remove("AMRPC_THREADS")
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Output {
    let out = amrpc(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn code(dir: &Path, args: &[&str]) -> i32 {
    amrpc(dir, args).status.code().unwrap()
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn full_pipeline_on_g_function() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(
        d,
        &[
            "bench", "--model", "g_function", "--n", "512", "--design-out", "d.csv", "--outputs-out", "y.csv",
            "--reference-out", "r.bin", "--reference-n", "4000",
        ],
    );
    let fit = ok(d, &["fit", "--design", "d.csv", "--outputs", "y.csv", "--nr", "1", "--no", "2", "--out", "m.bin"]);
    assert!(String::from_utf8_lossy(&fit.stderr).contains("8 subdomains"));

    ok(d, &["analyze", "--model", "m.bin", "--indices", "all", "--out", "report.json"]);
    let report = json(&d.join("report.json"));
    let first = report["first_order"].as_array().unwrap();
    assert_eq!(first.len(), 3);
    let s1 = first[0]["values"][0].as_f64().unwrap();
    let s3 = first[2]["values"][0].as_f64().unwrap();
    assert!(s1 > s3, "x1 dominates x3 for a = (0, 1, 9)");
    assert_eq!(report["interactions"].as_array().unwrap().len(), 4);

    ok(d, &["metrics", "--model", "m.bin", "--test", "d.csv,y.csv", "--reference", "r.bin", "--out", "met.json"]);
    let met = json(&d.join("met.json"));
    assert_eq!(met["prediction"]["n_test"], 512);
    assert!(met["prediction"]["rmse"].as_f64().unwrap() < 0.05);
    assert!(met["moments"]["mean_l2_error"].as_f64().unwrap() < 0.05);

    ok(d, &["export", "--model", "m.bin", "--out-dir", "fields"]);
    for f in ["mean", "sd", "log_variance", "total_x1", "total_x2", "total_x3"] {
        let text = std::fs::read_to_string(d.join("fields").join(format!("{f}.csv"))).unwrap();
        assert!(text.starts_with("# grid rows=1 cols=1 components=y\ncell,component,row,col,value\n"));
    }
}

#[test]
fn config_file_supplies_defaults_and_flags_win() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    std::fs::write(
        d.join("run.toml"),
        "preset = \"table1\"\n[design]\nn = 16\n[paths]\ndesign = \"cfg.csv\"\n",
    )
    .unwrap();
    ok(d, &["--config", "run.toml", "sample"]);
    let text = std::fs::read_to_string(d.join("cfg.csv")).unwrap();
    assert_eq!(text.lines().count(), 3 + 16);
    ok(d, &["--config", "run.toml", "sample", "--n", "4", "--out", "flag.csv"]);
    assert_eq!(std::fs::read_to_string(d.join("flag.csv")).unwrap().lines().count(), 3 + 4);
}

#[test]
fn sampling_is_reproducible() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    let a = ok(d, &["sample", "--preset", "table1", "--n", "64", "--kind", "mc", "--seed", "7"]).stdout;
    let b = ok(d, &["--threads", "2", "sample", "--preset", "table1", "--n", "64", "--kind", "mc", "--seed", "7"]).stdout;
    assert_eq!(a, b);
    let empty = ok(d, &["sample", "--preset", "table1", "--n", "0"]);
    assert_eq!(String::from_utf8_lossy(&empty.stdout).lines().count(), 3);
    assert!(String::from_utf8_lossy(&empty.stderr).contains("warning"));
}

#[test]
fn oracle_reports_estimates() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["oracle", "--model", "ishigami", "--n", "4096", "--bootstrap", "10", "--out", "o.json"]);
    let o = json(&d.join("o.json"));
    let s2 = o["first"][1][0]["value"].as_f64().unwrap();
    assert!((s2 - 0.442).abs() < 0.1, "S2 ≈ 0.44, got {s2}");
}

#[test]
fn exit_codes_follow_error_class() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    // usage and configuration
    assert_eq!(code(d, &["sample", "--bogus"]), 2);
    assert_eq!(code(d, &["sample"]), 2);
    assert_eq!(code(d, &["bench", "--model", "nope"]), 2);
    assert_eq!(code(d, &["--threads", "0", "bench", "--list"]), 2);
    std::fs::write(d.join("bad.toml"), "[surrogate]\nq = 3.0\n").unwrap();
    assert_eq!(code(d, &["--config", "bad.toml", "bench", "--list"]), 2);

    ok(d, &["bench", "--model", "ishigami", "--n", "64", "--design-out", "d.csv", "--outputs-out", "y.csv"]);
    assert_eq!(code(d, &["fit", "--design", "d.csv", "--outputs", "y.csv", "--q", "0", "--out", "m.bin"]), 2);

    // data
    assert_eq!(code(d, &["fit", "--design", "missing.csv", "--outputs", "y.csv", "--out", "m.bin"]), 3);
    std::fs::write(d.join("short.csv"), "y\n1\n2\n").unwrap();
    assert_eq!(code(d, &["fit", "--design", "d.csv", "--outputs", "short.csv", "--out", "m.bin"]), 3);
    std::fs::write(d.join("junk.bin"), b"not a model").unwrap();
    assert_eq!(code(d, &["analyze", "--model", "junk.bin"]), 3);
    assert!(!d.join("m.bin").exists());
}

#[test]
fn failed_write_leaves_target_untouched() {
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["sample", "--preset", "table1", "--n", "8", "--out", "keep.csv"]);
    let before = std::fs::read(d.join("keep.csv")).unwrap();
    assert_eq!(code(d, &["sample", "--preset", "nope", "--out", "keep.csv"]), 2);
    assert_eq!(std::fs::read(d.join("keep.csv")).unwrap(), before);
}

#[cfg(unix)]
#[test]
fn written_files_are_world_readable() {
    use std::os::unix::fs::PermissionsExt;
    let tmp = tempfile::tempdir().unwrap();
    let d = tmp.path();
    ok(d, &["sample", "--preset", "table1", "--n", "4", "--out", "d.csv"]);
    let mode = std::fs::metadata(d.join("d.csv")).unwrap().permissions().mode() & 0o777;
    assert_eq!(mode, 0o644);
    std::fs::set_permissions(d.join("d.csv"), std::fs::Permissions::from_mode(0o640)).unwrap();
    ok(d, &["sample", "--preset", "table1", "--n", "4", "--out", "d.csv"]);
    let mode = std::fs::metadata(d.join("d.csv")).unwrap().permissions().mode() & 0o777;
    assert_eq!(mode, 0o640);
}

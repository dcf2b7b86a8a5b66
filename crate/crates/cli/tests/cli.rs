//! End-to-end checks of the binary: subcommands, file outputs, exit codes.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn qnrnp() -> Command {
    Command::new(env!("CARGO_BIN_EXE_qnrnp"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn criterion_table_text_and_csv() {
    let out = qnrnp()
        .args(["criterion-table", "--omega-range", "13:15"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("1.07e16"));
    assert!(text.contains("certified (empty)"));

    let out = qnrnp()
        .args(["criterion-table", "--omega", "14", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("4.30e16"));
}

#[test]
fn tree_json_contains_annotations() {
    let out = qnrnp()
        .args(["tree", "--omega", "13", "--format", "json"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    let branches = doc["branches"].as_array().unwrap();
    assert!(branches
        .iter()
        .any(|b| b["divisor"] == "40112098026" && b["excluded"] == serde_json::json!([5])));
    assert!(doc["annotations"].as_array().is_some());
}

#[test]
fn search_writes_reports_and_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("reports");
    let ckpt_dir = dir.path().join("ckpt");
    // a small grid slice: omega=13 branch over a prefix of its interval
    let args = |extra: &[&str]| {
        let mut v = vec![
            "search".to_string(),
            "--omega".into(),
            "13".into(),
            "--d".into(),
            "40112098026".into(),
            "--interval".into(),
            "304000000000000:1000000000000000".into(),
            "--out".into(),
            out_dir.display().to_string(),
            "--checkpoint-dir".into(),
            ckpt_dir.display().to_string(),
            "--workers".into(),
            "2".into(),
        ];
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    };
    let out = qnrnp().args(args(&["--max-blocks", "1"])).output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("(partial)"));

    // resume to completion
    let out = qnrnp().args({
        let mut v = args(&[]);
        v[0] = "resume".into();
        v
    })
    .output()
    .unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(stdout(&out).contains("resumed from block 1"));

    let name = "search-omega13-d40112098026";
    for ext in ["csv", "json", "config"] {
        assert!(
            out_dir.join(format!("{name}.{ext}")).exists(),
            "missing {ext} report"
        );
    }
    let json: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join(format!("{name}.json"))).unwrap())
            .unwrap();
    for field in ["omega", "branch_d", "epsilon_num", "epsilon_den", "counts"] {
        assert!(json.get(field).is_some(), "missing field {field}");
    }
    // 15 initial primes in this truncated interval (frozen from the
    // exact-oracle recount)
    assert_eq!(json["counts"]["initial"], 15);
    // first verified row of this branch
    let csv = fs::read_to_string(out_dir.join(format!("{name}.csv"))).unwrap();
    assert!(csv.starts_with("index,omega,k,p,witness_lo,witness_hi\n"));
    assert!(csv.contains("386480064480511,11,12"));

    // a corrupted snapshot is rejected with exit code 3
    let ckpt = ckpt_dir.join(format!("{name}.ckpt"));
    let mut bytes = fs::read(&ckpt).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0xff;
    fs::write(&ckpt, &bytes).unwrap();
    let out = qnrnp().args(args(&[])).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn verify_exit_codes() {
    let out = qnrnp().args(["verify", "31"]).output().unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("witness pair"));

    // 7 has no pair, but its hypothesis fails: informational, exit 0
    let out = qnrnp().args(["verify", "7"]).output().unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("no consecutive QNRNP pair"));

    // composite input is a configuration error
    let out = qnrnp().args(["verify", "100"]).output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn conjecture_scan_small_bound() {
    let out = qnrnp()
        .args(["conjecture-scan", "--which", "b", "--bound", "100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("verified to 100"));
    assert!(text.contains("31"));
}

#[test]
fn config_file_seeds_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.config");
    fs::write(&cfg, "epsilon=1/3\nformat=json\n").unwrap();
    // flag overrides the file's epsilon; format stays json from the file
    let out = qnrnp()
        .args([
            "criterion-table",
            "--omega",
            "9",
            "--config",
            cfg.to_str().unwrap(),
            "--epsilon",
            "1/4",
        ])
        .output()
        .unwrap();
    assert!(out.status.success());
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc[0]["upper_display"], "1.50e13");

    let out = qnrnp()
        .args(["criterion-table", "--omega", "9", "--epsilon", "2/4"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1), "epsilon outside (0,1/2) is a config error");
}

#[test]
fn large_omega_report() {
    let out = qnrnp()
        .args(["large-omega", "--bound", "100"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("holds from omega = 48"), "got: {text}");
    assert!(text.contains("no gaps"));
}

#[test]
fn resume_without_checkpoint_dir_is_config_error() {
    let out = qnrnp()
        .args(["resume", "--omega", "13", "--d", "40112098026"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(Path::new("reports").exists() || true);
}

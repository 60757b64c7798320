use std::fs;
use std::process::Command;

fn bitext() -> Command {
    Command::new(env!("CARGO_BIN_EXE_bitext"))
}

#[test]
fn missing_snapshot_fails_before_any_stage() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    fs::write(dir.path().join("pseudo.tsv"), "").unwrap();
    let status = bitext()
        .args(["run", "--src", "xx", "--tgt", "yy", "--pseudo"])
        .arg(dir.path().join("pseudo.tsv"))
        .arg("--snapshot")
        .arg(dir.path().join("absent"))
        .arg("--out")
        .arg(&out)
        .output()
        .unwrap();
    assert_eq!(status.status.code(), Some(1), "{}", String::from_utf8_lossy(&status.stderr));
    assert!(!out.exists() || fs::read_dir(&out).unwrap().next().is_none());
}

#[test]
fn unknown_flag_is_a_config_error() {
    let status = bitext().args(["run", "--no-such-flag"]).output().unwrap();
    assert_eq!(status.status.code(), Some(1));
}

#[test]
fn help_succeeds() {
    let status = bitext().arg("--help").output().unwrap();
    assert_eq!(status.status.code(), Some(0));
    let text = String::from_utf8_lossy(&status.stdout);
    for sub in ["induce-dict", "ingest", "align-docs", "align-sents", "filter-rules", "train-filter", "classify", "report", "run"] {
        assert!(text.contains(sub), "{sub} missing from help");
    }
}

#[test]
fn fixture_run_and_evaluate() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    let ok = bitext()
        .args(["gen-fixture", "--sites", "3", "--pages", "4", "--sentences", "5", "--out"])
        .arg(&fx)
        .status()
        .unwrap();
    assert!(ok.success());
    let ok = bitext().arg("run").arg("--config").arg(fx.join("pipeline.toml")).status().unwrap();
    assert!(ok.success());
    let run = fx.join("run");
    for name in ["C.tsv", "B_minus_C.tsv", "report.json", "report.txt", "forest.model", "timings.json"] {
        assert!(run.join(name).exists(), "{name} missing");
    }
    assert!(!fs::read_dir(&run).unwrap().any(|e| e.unwrap().path().extension().is_some_and(|x| x == "partial")));
    let out = bitext()
        .arg("evaluate")
        .arg("--config")
        .arg(fx.join("pipeline.toml"))
        .arg("--truth")
        .arg(fx.join("truth.tsv"))
        .output().unwrap();
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let e: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert!(e["precision"].as_f64().unwrap() > 0.5);
}

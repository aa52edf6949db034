use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn isat(args: &[&str], cwd: &Path) -> Output {
    let out = Command::new(env!("CARGO_BIN_EXE_isat"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap();
    assert!(
        out.status.success(),
        "isat {args:?} failed:\n{}",
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn generate_preprocess_solve_and_tabulate() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    let out = isat(&["generate", "semiprime", "--bits", "5", "-o", "inst"], d);
    assert_eq!(stdout(&out).lines().count(), 2);
    let cnf = fs::read_dir(d.join("inst"))
        .unwrap()
        .map(|e| e.unwrap().path())
        .min()
        .unwrap();
    let cnf = cnf.to_str().unwrap();

    isat(&["preprocess", "-i", cnf, "--level", "6", "-o", "pre", "--qubo", "q.txt"], d);
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(d.join("pre/report.json")).unwrap()).unwrap();
    assert_eq!(report["remaining_vars"], 0);
    assert!(d.join("pre/reduced.cnf").exists());
    assert!(d.join("pre/cond.json").exists());

    let out = isat(
        &["solve", "-i", cnf, "--level", "0", "--repeats", "3", "--history", "--trace", "t.csv"],
        d,
    );
    let runs = fs::read_to_string(d.join("runs.jsonl")).unwrap();
    assert_eq!(runs.lines().count(), 3);
    for line in runs.lines() {
        let rec: serde_json::Value = serde_json::from_str(line).unwrap();
        assert_eq!(rec["solved"], true);
        assert!(rec["history"].is_array());
    }
    assert!(stdout(&out).contains("p = 1.000, tts = "));
    assert!(fs::read_to_string(d.join("t.csv")).unwrap().starts_with("sweep,"));

    let out = isat(&["tts", "runs.jsonl"], d);
    assert!(stdout(&out).lines().nth(1).unwrap().contains("1.000"));
}

#[test]
fn bench_resumes_and_report_rebuilds_tables() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(
        d.join("exp.toml"),
        r#"
        levels = [7]
        strategies = ["dfs"]
        backends = ["emulator", "tabu"]
        repeats = 2
        [instances]
        semiprime_bits = [4]
        "#,
    )
    .unwrap();
    isat(&["bench", "-c", "exp.toml", "-o", "res"], d);
    let first = fs::read_to_string(d.join("res/runs.jsonl")).unwrap();
    assert_eq!(first.lines().count(), 4);
    isat(&["bench", "-c", "exp.toml", "-o", "res"], d);
    assert_eq!(fs::read_to_string(d.join("res/runs.jsonl")).unwrap(), first);
    fs::remove_file(d.join("res/aggregates.csv")).unwrap();
    isat(&["report", "res"], d);
    assert!(d.join("res/aggregates.csv").exists());
    assert!(d.join("res/plotdata/tts_by_level.csv").exists());
}

#[test]
fn backbone_generation_writes_dimacs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    isat(
        &["generate", "backbone", "--n", "30", "--m", "120", "--b", "50", "--force", "-o", "bb.cnf"],
        d,
    );
    let text = fs::read_to_string(d.join("bb.cnf")).unwrap();
    assert!(text.contains("p cnf 30 120"));
}

#[test]
fn bad_input_fails_with_a_message() {
    let dir = tempfile::tempdir().unwrap();
    let out = Command::new(env!("CARGO_BIN_EXE_isat"))
        .args(["solve", "-i", "missing.cnf"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.cnf"));
    let out = Command::new(env!("CARGO_BIN_EXE_isat"))
        .args(["generate", "backbone", "--n", "30", "--m", "120", "--b", "50", "-o", "x.cnf"])
        .current_dir(dir.path())
        .output()
        .unwrap();
    assert!(!out.status.success());
}

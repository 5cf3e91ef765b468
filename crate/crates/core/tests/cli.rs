use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn locsim(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_locsim"))
        .args(args)
        .current_dir(cwd)
        .env_remove("LOCSIM_THREADS")
        .output()
        .expect("run locsim")
}

fn configs() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs")
}

fn small_config(dir: &Path, name: &str, edit: impl FnOnce(&mut serde_json::Value)) -> PathBuf {
    let text = fs::read_to_string(configs().join(name)).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    v["word_count"] = 4096.into();
    edit(&mut v);
    let path = dir.join(name);
    fs::write(&path, v.to_string()).unwrap();
    path
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn generate(dir: &Path) -> PathBuf {
    let cfg = small_config(dir, "platformer_xor_add.json", |_| {});
    let out = dir.join("archive");
    let o = locsim(&["generate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], dir);
    assert!(o.status.success(), "{}", stderr(&o));
    out
}

#[test]
fn generate_reports_the_archive() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "platformer_xor_add.json", |_| {});
    let out = dir.path().join("archive");
    let o = locsim(&["generate", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()], dir.path());
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = stdout(&o);
    assert!(text.contains("dumps: 25"), "{text}");
    assert!(text.contains("values: 100 -> 107"), "{text}");
    assert!(text.contains("ground truth: xor_add"), "{text}");
}

#[test]
fn generate_is_deterministic_and_seed_overridable() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "shooter_add_xor.json", |_| {});
    let run = |out: &str, seed: Option<&str>| {
        let mut args = vec!["generate", "--config", cfg.to_str().unwrap(), "--out", out];
        if let Some(s) = seed {
            args.extend(["--seed", s]);
        }
        let o = locsim(&args, dir.path());
        assert!(o.status.success(), "{}", stderr(&o));
        stdout(&o).lines().skip(1).collect::<Vec<_>>().join("\n")
    };
    assert_eq!(run("a", None), run("b", None));
    assert_ne!(run("a", None), run("c", Some("99")));
}

#[test]
fn bad_background_mix_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "platformer_xor_add.json", |v| {
        v["background_mix"]["static"] = 0.9.into();
    });
    let o = locsim(&["generate", "--config", cfg.to_str().unwrap(), "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("background_mix"), "{}", stderr(&o));
}

#[test]
fn unknown_field_names_its_path() {
    let dir = TempDir::new().unwrap();
    let cfg = small_config(dir.path(), "platformer_xor_add.json", |v| {
        v["collection"]["bogus"] = 1.into();
    });
    let o = locsim(&["generate", "--config", cfg.to_str().unwrap(), "--out", "x"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("collection"), "{}", stderr(&o));
}

#[test]
fn attack_writes_one_trace_per_selection() {
    let dir = TempDir::new().unwrap();
    let archive = generate(dir.path());
    let out = dir.path().join("traces");
    let o = locsim(
        &[
            "attack", "--archive", archive.to_str().unwrap(), "--logic", "xor_add", "--mode", "greedy",
            "--policy", r#"{"kind":"incremental"}"#, "--n", "1..2", "--out", out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let traces = fs::read_to_string(out.join("traces.jsonl")).unwrap();
    // every dump alone, plus every unit-stride pair of dumps
    assert_eq!(traces.lines().count(), 25 + 66);
    assert!(out.join("timing.log").exists());

    let report = dir.path().join("report");
    let o = locsim(
        &["report", "--traces", out.to_str().unwrap(), "--formats", "csv,svg", "--out", report.to_str().unwrap()],
        dir.path(),
    );
    assert!(o.status.success(), "{}", stderr(&o));
    let csv = fs::read_to_string(report.join("report.csv")).unwrap();
    assert_eq!(csv.lines().count(), 3, "{csv}");
    assert!(csv.lines().nth(2).unwrap().starts_with("platformer,xor_add,xor_add,greedy,2,66,"), "{csv}");
    assert!(fs::read_dir(report.join("charts")).unwrap().count() > 0);
}

#[test]
fn incremental_logic_rejects_other_policies() {
    let dir = TempDir::new().unwrap();
    let archive = generate(dir.path());
    let o = locsim(
        &[
            "attack", "--archive", archive.to_str().unwrap(), "--logic", "add_xor", "--mode", "greedy",
            "--policy", r#"{"kind":"binned"}"#, "--n", "2", "--out", "t",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("requires incremental selection"), "{}", stderr(&o));
}

#[test]
fn bad_thread_override_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let archive = generate(dir.path());
    let o = Command::new(env!("CARGO_BIN_EXE_locsim"))
        .args([
            "attack", "--archive", archive.to_str().unwrap(), "--logic", "base", "--mode", "greedy",
            "--policy", r#"{"kind":"binned"}"#, "--n", "1", "--out", "t",
        ])
        .current_dir(dir.path())
        .env("LOCSIM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("LOCSIM_THREADS"));
}

#[test]
fn missing_archive_is_a_runtime_error() {
    let dir = TempDir::new().unwrap();
    let o = locsim(
        &[
            "attack", "--archive", "nope", "--logic", "base", "--mode", "greedy",
            "--policy", r#"{"kind":"binned"}"#, "--n", "1", "--out", "t",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
}

fn campaign_file(dir: &Path, lengths: &str) -> PathBuf {
    generate(dir);
    let cfg = serde_json::json!({
        "archives": [{ "path": "archive" }],
        "attacks": [
            { "logic": { "logic": "xor_add" }, "mode": "greedy", "policy": { "kind": "incremental" }, "lengths": lengths },
            { "logic": { "logic": "xor" }, "mode": "statistical", "policy": { "kind": "fully_random" },
              "lengths": "2..3", "cap": 50, "criteria": [{ "criterion": "threshold", "value": 0.9 }] }
        ],
        "seed": 5,
        "formats": "csv,json"
    });
    let path = dir.join("campaign.json");
    fs::write(&path, cfg.to_string()).unwrap();
    path
}

#[test]
fn campaign_is_reproducible() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign_file(dir.path(), "1..4");
    let mut csvs = Vec::new();
    for (out, threads) in [("o1", "1"), ("o2", "3")] {
        let o = Command::new(env!("CARGO_BIN_EXE_locsim"))
            .args(["campaign", "--config", cfg.to_str().unwrap(), "--out", out])
            .current_dir(dir.path())
            .env("LOCSIM_THREADS", threads)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", stderr(&o));
        csvs.push(fs::read(dir.path().join(out).join("report.csv")).unwrap());
        assert!(dir.path().join(out).join("report.json").exists());
    }
    assert_eq!(csvs[0], csvs[1]);
    assert_eq!(String::from_utf8_lossy(&csvs[0]).lines().count(), 1 + 4 + 2);
}

#[test]
fn campaign_with_empty_cells_exits_nonzero() {
    let dir = TempDir::new().unwrap();
    let cfg = campaign_file(dir.path(), "7..9");
    let o = locsim(&["campaign", "--config", cfg.to_str().unwrap(), "--out", "o"], dir.path());
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    assert!(stderr(&o).contains("no conforming subsequence"), "{}", stderr(&o));
}

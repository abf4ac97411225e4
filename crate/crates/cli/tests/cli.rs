use std::path::Path;
use std::process::{Command, Output};

fn wicktorus(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wicktorus"))
        .args(args)
        .env_remove("WICKTORUS_OUT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn out_arg(dir: &Path) -> String {
    dir.to_string_lossy().into_owned()
}

#[test]
fn smoke_run_writes_a_verifiable_directory() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("cs");
    let o = wicktorus(&["cs-check", "--smoke", "--out", &out_arg(&dir), "--workers", "1"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("PASS matrix-cauchy-schwarz"));
    for f in ["manifest.json", "records.jsonl", "summary.csv", "config.toml"] {
        assert!(dir.join(f).exists(), "{f} missing");
    }
    let v = wicktorus(&["verify", &out_arg(&dir)]);
    assert!(v.status.success());

    // tampering is detected
    std::fs::write(dir.join("summary.csv"), "kind\n").unwrap();
    assert!(!wicktorus(&["verify", &out_arg(&dir)]).status.success());
}

#[test]
fn refuses_to_overwrite_a_run() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = out_arg(&tmp.path().join("d"));
    assert!(wicktorus(&["divisor-scan", "--smoke", "--out", &dir]).status.success());
    let again = wicktorus(&["divisor-scan", "--smoke", "--out", &dir]);
    assert_eq!(again.status.code(), Some(2));
}

#[test]
fn failing_verdict_gives_nonzero_exit() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("evolve.toml");
    // a step far too coarse for the conservation tolerances
    std::fs::write(
        &cfg,
        "experiment = \"evolve\"\nscales = [8]\nseed_end = 1\ndt = 0.01\nt_end = 0.5\n",
    )
    .unwrap();
    let o = wicktorus(&[
        "evolve",
        "--config",
        &out_arg(&cfg),
        "--out",
        &out_arg(&tmp.path().join("r")),
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL mass-conservation"));
}

#[test]
fn flags_override_the_config() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("s");
    let o = wicktorus(&[
        "strichartz-scan",
        "--smoke",
        "--seed-range",
        "7..9",
        "--gamma",
        "one",
        "--out",
        &out_arg(&dir),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let cfg = std::fs::read_to_string(dir.join("config.toml")).unwrap();
    assert!(cfg.contains("seed_start = 7"));
    assert!(cfg.contains("seed_end = 9"));
    assert!(cfg.contains("gamma = \"1.0000000000\""), "{cfg}");
}

#[test]
fn rejects_bad_input() {
    let tmp = tempfile::tempdir().unwrap();
    let out = out_arg(&tmp.path().join("x"));
    assert!(!wicktorus(&["picard", "--seed-range", "5..5", "--out", &out])
        .status
        .success());
    assert!(!wicktorus(&["picard", "--gamma", "banana", "--out", &out])
        .status
        .success());

    let cfg = tmp.path().join("c.toml");
    std::fs::write(&cfg, "experiment = \"picard\"\nbogus = 1\n").unwrap();
    assert_eq!(
        wicktorus(&["picard", "--config", &out_arg(&cfg), "--out", &out])
            .status
            .code(),
        Some(2)
    );

    // config for a different subcommand
    std::fs::write(&cfg, "experiment = \"evolve\"\n").unwrap();
    assert_eq!(
        wicktorus(&["picard", "--config", &out_arg(&cfg), "--out", &out])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn output_env_var_is_honoured() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("env");
    let o = Command::new(env!("CARGO_BIN_EXE_wicktorus"))
        .args(["divisor-scan", "--smoke"])
        .env("WICKTORUS_OUT", &dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    assert!(dir.join("manifest.json").exists());
}

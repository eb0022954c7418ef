use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn subnodal(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subnodal")).args(args).output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn passing_scenario_exits_zero_and_writes_reports() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "flags.cfg", "scenario = flag-report\nalpha = 1\n");
    let out = d.path().join("out");
    let o = subnodal(&["flag-report", "--config", &cfg, "--out", out.to_str().unwrap(), "--threads", "2"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8_lossy(&o.stdout);
    assert!(stdout.contains("PASS symbolic_suite"), "{stdout}");
    for f in ["flag-report-flags.csv", "flag-report-symbolic.csv", "flag-report-summary.json"] {
        assert!(out.join(f).exists(), "{f}");
    }
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("flag-report-summary.json")).unwrap()).unwrap();
    assert_eq!(summary["schema_version"], 1);
    assert!(summary["timings"].is_object());
}

#[test]
fn failing_verdict_exits_two() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "box.cfg", "scenario = boxcount\ngrid = 12, 12, 12\neps = 0.4, 0.2\nbudget = 3\n");
    let out = d.path().join("out");
    let o = subnodal(&["boxcount", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stdout).contains("FAIL box_counting"));
}

#[test]
fn errors_exit_one() {
    let d = tempfile::tempdir().unwrap();
    let bad = write_config(d.path(), "bad.cfg", "scenario = grushin-scaling\nalpha_max = 3\n");
    let o = subnodal(&["grushin-scaling", "--config", &bad]);
    assert_eq!(o.status.code(), Some(1));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("line 2") && err.contains("alpha_max"), "{err}");

    let other = write_config(d.path(), "other.cfg", "scenario = density\n");
    assert_eq!(subnodal(&["courant", "--config", &other]).status.code(), Some(1));
    assert_eq!(subnodal(&["courant", "--config", "/nonexistent.cfg"]).status.code(), Some(1));
    // unknown scenario names are rejected by argument parsing
    assert_ne!(subnodal(&["nope", "--config", &other]).status.code(), Some(0));
}

#[test]
fn deterministic_reruns_are_byte_identical() {
    let d = tempfile::tempdir().unwrap();
    let cfg = write_config(d.path(), "d.cfg", "k = 4..7\ngrid = 33, 128\nn = 31\n");
    let run = |dir: &str, seed: &str| {
        let out = d.path().join(dir);
        let o = subnodal(&["density", "--config", &cfg, "--out", out.to_str().unwrap(), "--seed", seed, "--deterministic"]);
        assert!(o.status.code() == Some(0) || o.status.code() == Some(2), "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let (a, b) = (run("a", "5"), run("b", "5"));
    for f in ["density-density.csv", "density-summary.json"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let summary = fs::read_to_string(a.join("density-summary.json")).unwrap();
    assert!(!summary.contains("timings"));
    assert!(summary.contains("seed = 5"));
}

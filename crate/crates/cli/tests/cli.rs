//! End-to-end runs of the `cavity-ent` binary.

use std::path::PathBuf;
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cavity-ent")).args(args).env_remove("CAVITY_ENT_CACHE_DIR").output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("cavity-ent-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const CONFIG: &str = "\
scenario = accel:u
steps = 3
n_max = 8

[curve]
species = boson
state = vacuum
modes = 1, 4
power = 1
";

#[test]
fn sweep_writes_identical_files_on_repeat() {
    let config = scratch("small.conf");
    std::fs::write(&config, CONFIG).unwrap();
    let (a, b) = (scratch("a.csv"), scratch("b.csv"));
    for out in [&a, &b] {
        let o = run(&["sweep", config.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let text = std::fs::read_to_string(&a).unwrap();
    assert_eq!(text, std::fs::read_to_string(&b).unwrap());
    assert!(text.starts_with("u,"), "{text}");
    assert_eq!(text.lines().count(), 1 + 3);
}

#[test]
fn sweep_emits_json_with_metadata() {
    let config = scratch("json.conf");
    std::fs::write(&config, CONFIG).unwrap();
    let o = run(&["sweep", config.to_str().unwrap(), "--format", "json"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    for key in ["\"metadata\"", "\"config_hash\"", "\"rows\"", "\"n_max\": 8"] {
        assert!(text.contains(key), "missing {key}");
    }
    assert!(!text.contains("timestamp"));
}

#[test]
fn config_errors_exit_with_two() {
    assert_eq!(run(&["sweep", "fig1a", "--nmax", "3"]).status.code(), Some(2));
    assert_eq!(run(&["sweep", "no-such-file.conf"]).status.code(), Some(2));
    let config = scratch("bad.conf");
    std::fs::write(&config, "preset = fig1a\ncolour = blue\n").unwrap();
    assert_eq!(run(&["sweep", config.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn unconverged_sweep_exits_with_three_but_still_writes_rows() {
    let out = scratch("coarse.csv");
    let o = run(&["sweep", "fig1b", "--nmax", "3", "--steps", "3", "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(3));
    let text = std::fs::read_to_string(&out).unwrap();
    assert!(text.lines().skip(1).any(|l| l.contains("false")), "{text}");
}

#[test]
fn check_passes_at_the_default_window() {
    let o = run(&["check"]);
    let text = String::from_utf8_lossy(&o.stdout);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.lines().all(|l| l.starts_with("PASS")), "{text}");
}

#[test]
fn oracle_writes_then_validates_the_cache() {
    let dir = scratch("cache");
    let d = dir.to_str().unwrap();
    let first = run(&["oracle", "--cache-dir", d, "--nmax", "6"]);
    assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
    assert!(String::from_utf8_lossy(&first.stdout).contains("wrote"));
    let second = run(&["oracle", "--cache-dir", d, "--nmax", "6"]);
    assert_eq!(second.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&second.stdout).matches("PASS").count(), 2);
}

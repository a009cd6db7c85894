use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use epswitch::emit::to_json_text;
use epswitch::{ResultManifest, SwitchRecord};
use serde_json::Value;

fn epswitch(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_epswitch"));
    cmd.args(args);
    for var in ["EPSWITCH_CONFIG", "EPSWITCH_OUTPUT", "EPSWITCH_FORMAT", "EPSWITCH_WORKERS", "EPSWITCH_SEED_SECTION"] {
        cmd.env_remove(var);
    }
    cmd.envs(envs.iter().copied());
    cmd.output().expect("binary runs")
}

fn write_config(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn run_ok(config: &str, out: &Path, extra: &[&str]) {
    let mut args = vec!["--config", config, "--output", out.to_str().unwrap()];
    args.extend_from_slice(extra);
    let o = epswitch(&args, &[]);
    assert!(o.status.success(), "stderr: {}", String::from_utf8_lossy(&o.stderr));
}

const SCAN: &str = r#"
command = "scan"
[grid]
axis1 = { name = "delta1", min = -200.0, max = 40.0, n = 6 }
axis2 = { name = "omega1", min = 150.0, max = 340.0, n = 6 }
"#;

fn manifest(dir: &Path) -> ResultManifest {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

#[test]
fn scan_rows_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "scan.toml", SCAN);
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &[]);
    let csv = fs::read_to_string(out.join("condition_map.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "delta1,omega1,max_cond");
    assert_eq!(lines.len(), 1 + 36);
    assert!(!csv.contains('\r'));
    for line in &lines[1..] {
        let cond: f64 = line.split(',').nth(2).unwrap().parse().unwrap();
        assert!(cond >= 1.0);
    }
    let m = manifest(&out);
    assert_eq!(m.command, "scan");
    assert_eq!(m.library_version, epswitch_core::VERSION);
    assert_eq!(m.files.len(), 1);
    assert_eq!((m.files[0].name.as_str(), m.files[0].rows), ("condition_map.csv", 36));
    let names: Vec<String> =
        fs::read_dir(&out).unwrap().map(|e| e.unwrap().file_name().into_string().unwrap()).collect();
    assert_eq!(names.len(), 2, "no orphan outputs: {names:?}");
}

#[test]
fn json_format_is_one_document() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "scan.toml", SCAN);
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &["--format", "json"]);
    let v: Value = serde_json::from_str(&fs::read_to_string(out.join("condition_map.json")).unwrap()).unwrap();
    let rows = v.as_array().unwrap();
    assert_eq!(rows.len(), 36);
    let keys: Vec<&String> = rows[0].as_object().unwrap().keys().collect();
    assert_eq!(keys, ["delta1", "max_cond", "omega1"]);
}

#[test]
fn serial_runs_are_byte_identical_and_parallel_matches() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "scan.toml", SCAN);
    let (a, b, c) = (tmp.path().join("a"), tmp.path().join("b"), tmp.path().join("c"));
    run_ok(&cfg, &a, &["--workers", "1"]);
    run_ok(&cfg, &b, &["--workers", "1"]);
    run_ok(&cfg, &c, &["--workers", "4"]);
    let read = |d: &Path| fs::read(d.join("condition_map.csv")).unwrap();
    assert_eq!(read(&a), read(&b));
    assert_eq!(read(&a), read(&c));
}

#[test]
fn environment_overrides_apply() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "scan.toml", SCAN);
    let out = tmp.path().join("env_out");
    let o = epswitch(&["--config", &cfg], &[("EPSWITCH_OUTPUT", out.to_str().unwrap()), ("EPSWITCH_FORMAT", "json")]);
    assert!(o.status.success());
    assert!(out.join("condition_map.json").exists());
    let o = epswitch(&["--config", &cfg], &[("EPSWITCH_WORKERS", "many")]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn config_errors_exit_2() {
    let tmp = tempfile::tempdir().unwrap();
    let out = tmp.path().join("out");
    let bad_key =
        write_config(tmp.path(), "a.toml", &SCAN.replace("command = \"scan\"", "command = \"scan\"\nspeed = 2"));
    let bad_rate = write_config(tmp.path(), "b.toml", &format!("{SCAN}\n[params]\ngamma1 = -3.0\n"));
    let no_block = write_config(tmp.path(), "c.toml", "command = \"evolve\"\n");
    for cfg in [bad_key, bad_rate, no_block, tmp.path().join("missing.toml").to_str().unwrap().to_string()] {
        let o = epswitch(&["--config", &cfg, "--output", out.to_str().unwrap()], &[]);
        assert_eq!(o.status.code(), Some(2), "{cfg}: {}", String::from_utf8_lossy(&o.stderr));
    }
}

#[test]
fn compute_error_exits_3_and_leaves_nothing() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "far.toml",
        r#"
command = "find-ep"
[search]
order = 2
free = ["delta1", "omega1"]
[seeds]
far = [{ delta1 = 2000.0, omega1 = 2000.0 }]
"#,
    );
    let out = tmp.path().join("out");
    let o = epswitch(&["--config", &cfg, "--output", out.to_str().unwrap()], &[]);
    assert_eq!(o.status.code(), Some(3), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(String::from_utf8_lossy(&o.stderr).contains("diameter"));
    assert_eq!(fs::read_dir(&out).unwrap().count(), 0);
}

#[test]
fn isolated_ep_is_refined() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "ep2.toml",
        r#"
command = "find-ep"
[search]
order = 2
free = ["delta1", "omega1"]
[seeds]
main = [{ delta1 = -80.0, omega1 = 225.0 }]
"#,
    );
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &[]);
    let best: Value = serde_json::from_str(&fs::read_to_string(out.join("best.json")).unwrap()).unwrap();
    assert_eq!(best["classified_order"], 2);
    assert!(best["candidate"]["cluster_diameter"].as_f64().unwrap() < 1e-3);
    assert!((best["candidate"]["location"]["delta1"].as_f64().unwrap() + 80.0).abs() < 15.0);
}

#[test]
fn loop_permutation_record() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "loop.toml",
        r#"
command = "loop"
[path]
center = [-80.0, 295.0]
radii = [260.0, 125.0]
phase_pi = 0.39
samples = 256
"#,
    );
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &[]);
    let perm: Value = serde_json::from_str(&fs::read_to_string(out.join("permutation.json")).unwrap()).unwrap();
    let expected = serde_json::json!({"1": 2, "2": 1, "3": 3, "4": 4, "5": 5, "6": 6, "7": 8, "8": 7});
    assert_eq!(perm, expected);
    let branches = fs::read_to_string(out.join("branches.csv")).unwrap();
    assert_eq!(branches.lines().next(), Some("t,delta1,omega1,branch,re,im"));
    assert_eq!(branches.lines().count(), 1 + 256 * 8);
}

#[test]
fn evolve_report_round_trips() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "evolve.toml",
        r#"
command = "evolve"
[path]
center = [-80.0, 295.0]
radii = [260.0, 125.0]
phase_pi = 0.39
[evolve]
input = 1
direction = "cw"
track = false
"#,
    );
    let out = tmp.path().join("out");
    run_ok(&cfg, &out, &[]);
    let text = fs::read_to_string(out.join("report.json")).unwrap();
    let rec: SwitchRecord = serde_json::from_str(&text).unwrap();
    assert!(rec.swapped);
    assert_eq!(rec.dominant_output, [2, 7]);
    assert_eq!(to_json_text(&rec).unwrap(), text);
    let again: SwitchRecord = serde_json::from_str(&to_json_text(&rec).unwrap()).unwrap();
    assert_eq!(again, rec);

    let traj = fs::read_to_string(out.join("trajectory.csv")).unwrap();
    assert_eq!(traj.lines().next(), Some("t,delta1,omega1,s1,s2,s3,s4,s5,s6,s7,s8"));
    assert_eq!(traj.lines().count(), 1 + rec.steps + 1);
    assert!(!out.join("coefficients.csv").exists());
    assert_eq!(manifest(&out).files.len(), 2);
}

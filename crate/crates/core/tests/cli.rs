//! End-to-end runs of the command-line binary.

use std::path::Path;
use std::process::{Command, Output};

use wsn_track_sim::report::{parse_csv, REPORT_HEADER};

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wsn-track-sim"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn run_writes_one_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run.csv");
    let o = cli(&["run", "--seed", "4", "--slots", "50", "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().next().unwrap(), REPORT_HEADER.join(","));
    let reports = parse_csv(&out).unwrap();
    assert_eq!(reports.len(), 1);
    assert_eq!(reports[0].seed, 4);
    assert_eq!(reports[0].slots, 50);
}

#[test]
fn run_to_stdout_and_trace_dir() {
    let dir = tempfile::tempdir().unwrap();
    let traces = dir.path().join("traces");
    let o = cli(&["run", "--method", "baseline", "--slots", "20", "--trace-dir", path(&traces)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stdout = String::from_utf8(o.stdout).unwrap();
    assert_eq!(stdout.lines().count(), 2);
    assert!(stdout.lines().nth(1).unwrap().starts_with("baseline,"));
    for f in ["trajectory.csv", "events.csv", "mac.csv", "energy.csv"] {
        assert!(traces.join(f).is_file(), "{f} missing");
    }
}

#[test]
fn config_file_is_applied() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("scenario.conf");
    std::fs::write(&cfg, "# small run\nfield.n_nodes = 120\nfield.r_c = 55\nmax_slots = 30\nmethod = baseline\n").unwrap();
    let out = dir.path().join("r.csv");
    let o = cli(&["run", "--config", path(&cfg), "--out", path(&out)]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = &parse_csv(&out).unwrap()[0];
    assert_eq!((r.n_nodes, r.r_c_m, r.slots), (120, 55.0, 30));
    assert_eq!(r.method.to_string(), "baseline");
}

#[test]
fn configuration_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.conf");
    std::fs::write(&cfg, "field.r_c = -3\n").unwrap();
    assert_eq!(cli(&["run", "--config", path(&cfg)]).status.code(), Some(1));
    std::fs::write(&cfg, "no_such_key = 1\n").unwrap();
    assert_eq!(cli(&["run", "--config", path(&cfg)]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--slots", "0"]).status.code(), Some(1));
    assert_eq!(cli(&["run", "--bogus-flag"]).status.code(), Some(1));
    assert_eq!(cli(&["sweep", "--axis", "comm-radius"]).status.code(), Some(1));
}

#[test]
fn io_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let missing = dir.path().join("absent.conf");
    assert_eq!(cli(&["run", "--config", path(&missing)]).status.code(), Some(3));
    let unwritable = dir.path().join("no_dir").join("r.csv");
    assert_eq!(
        cli(&["run", "--slots", "5", "--out", path(&unwritable)]).status.code(),
        Some(3)
    );
}

#[test]
fn sweep_writes_paired_reports_and_warns_on_invalid_values() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep.csv");
    let o = cli(&[
        "sweep", "--axis", "comm-radius", "--values", "40,50,55,60", "--seeds", "0..4", "--out", path(&out),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let stderr = String::from_utf8_lossy(&o.stderr);
    assert!(stderr.contains("warning") && stderr.contains("40"), "{stderr}");
    // Three valid radii, five seeds, both methods.
    let text = std::fs::read_to_string(&out).unwrap();
    assert_eq!(text.lines().count(), 31);
    let reports = parse_csv(&out).unwrap();
    assert!(reports.iter().all(|r| r.axis_name == "comm-radius"));
    assert_eq!(reports.iter().filter(|r| r.method.to_string() == "baseline").count(), 15);
}

#[test]
fn trace_is_byte_identical_across_invocations() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    assert_eq!(cli(&["trace", "--seed", "7", "--out", path(&a)]).status.code(), Some(0));
    assert_eq!(cli(&["trace", "--seed", "7", "--out", path(&b)]).status.code(), Some(0));
    let (a, b) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert!(!a.is_empty());
    assert_eq!(a, b);
    let text = String::from_utf8(a).unwrap();
    assert!(text.lines().count() > 1);
}

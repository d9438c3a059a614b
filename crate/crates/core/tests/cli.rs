use std::path::Path;
use std::process::{Command, Output};

fn gstamp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_gstamp"))
        .args(args)
        .env_remove("GSTAMP_CACHE")
        .env_remove("GSTAMP_OFFLINE")
        .output()
        .expect("run gstamp")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn resolution_cell() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("r.csv");
    assert!(gstamp(&["resolution", "--out", p(&out)]).status.success());
    let text = std::fs::read_to_string(&out).unwrap();
    let cell = text
        .lines()
        .find_map(|l| l.strip_prefix("0.5,500,"))
        .expect("cell present")
        .parse::<f64>()
        .unwrap();
    assert!((cell - 9.78e5).abs() / 9.78e5 < 5e-3);
}

#[test]
fn simulate_zero_drift() {
    let o = gstamp(&["simulate", "--dt", "0", "--seed", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let dt: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("dt_est_myr: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(dt.abs() <= 1e-3, "{dt}");
    assert!(text.contains("status: recovered"));
}

#[test]
fn truncated_stamp_is_data_error() {
    let dir = tempfile::tempdir().unwrap();
    let stamp = dir.path().join("s.bin");
    assert!(gstamp(&["stamp", "encode", "--out", p(&stamp)]).status.success());
    let bytes = std::fs::read(&stamp).unwrap();
    assert_eq!(bytes.len(), 275);
    assert_eq!(&bytes[..4], b"MIAB");
    let cut = dir.path().join("cut.bin");
    std::fs::write(&cut, &bytes[..100]).unwrap();
    let o = gstamp(&["stamp", "decode", "--input", p(&cut)]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("Truncated"), "{}", stderr(&o));
}

#[test]
fn stamp_decode_dump() {
    let dir = tempfile::tempdir().unwrap();
    let stamp = dir.path().join("s.bin");
    assert!(gstamp(&["stamp", "encode", "--out", p(&stamp)]).status.success());
    let o = gstamp(&["stamp", "decode", "--input", p(&stamp)]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.contains("# k: 16"));
    let rows = text.lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 17);
}

#[test]
fn locate_and_recover_on_present_catalog() {
    let dir = tempfile::tempdir().unwrap();
    let stamp = dir.path().join("s.bin");
    assert!(gstamp(&["stamp", "encode", "--out", p(&stamp)]).status.success());
    let o = gstamp(&["locate", "--stamp", p(&stamp)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = String::from_utf8(o.stdout).unwrap();
    let d: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("distance_from_sun_kpc: "))
        .unwrap()
        .parse()
        .unwrap();
    assert!(d < 0.01);
    let o = gstamp(&["epoch", "recover", "--stamp", p(&stamp)]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = gstamp(&["epoch", "recover", "--stamp", p(&stamp), "--window-lo", "1", "--window-hi", "2"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stderr(&o).contains("too narrow"), "{}", stderr(&o));
}

#[test]
fn outputs_carry_provenance_header() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[stamp]\nk = 12\n").unwrap();
    let o = gstamp(&["--config", p(&cfg), "--seed", "9", "velocities"]);
    assert!(o.status.success());
    let text = String::from_utf8(o.stdout).unwrap();
    assert!(text.starts_with("# tool: gstamp "));
    assert!(text.contains("# config_hash: "));
    assert!(text.contains("# seed: 9"));
    assert!(text.contains("# config: k = 12"));
    assert!(text.contains("# frame: r0_kpc=8.3"));
}

#[test]
fn config_errors_are_data_errors() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("c.toml");
    std::fs::write(&cfg, "[frame]\nr0_kpc = -1\n").unwrap();
    let o = gstamp(&["--config", p(&cfg), "resolution"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("InvariantViolation"));
    std::fs::write(&cfg, "[frame]\nnope = 1\n").unwrap();
    let o = gstamp(&["--config", p(&cfg), "resolution"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("UnknownKey"));
}

#[test]
fn usage_errors() {
    assert_eq!(gstamp(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(gstamp(&["simulate", "--dt", "later"]).status.code(), Some(1));
    assert_eq!(gstamp(&["--help"]).status.code(), Some(0));
}

#[test]
fn ingest_round_trip_and_offline_fetch() {
    let dir = tempfile::tempdir().unwrap();
    let cat = dir.path().join("cat.csv");
    let o = gstamp(&["ingest", "--out", p(&cat)]);
    assert!(o.status.success());
    assert!(stderr(&o).contains("164 records"));
    let o = gstamp(&["ingest", "--input", p(&cat), "--out", p(&dir.path().join("again.csv"))]);
    assert!(o.status.success(), "{}", stderr(&o));
    let o = gstamp(&["orbit", "--catalog", p(&cat), "--cluster", "SYN-001", "--t-end", "5"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let rows = String::from_utf8(o.stdout).unwrap().lines().filter(|l| !l.starts_with('#')).count();
    assert_eq!(rows, 52);
    let o = gstamp(&["orbit", "--cluster", "NOPE"]);
    assert_eq!(o.status.code(), Some(2));

    let cache = dir.path().join("cache");
    let o = gstamp(&[
        "--offline",
        "ingest",
        "--url",
        "https://example.invalid/table.txt",
        "--cache-dir",
        p(&cache),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("network unavailable"), "{}", stderr(&o));
}

#[test]
fn seeded_runs_are_byte_identical() {
    let dir = tempfile::tempdir().unwrap();
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = gstamp(&["simulate", "--dt", "500kyr", "--noise", "100pc", "--seed", "5", "--out", p(out)]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
}

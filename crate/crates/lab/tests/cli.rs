use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

const NAMES: [&str; 7] = ["eq1_causality", "hartman_scan", "larmor_dwell_map", "two_field_cancellation", "delta_kick_fig2", "fig3_sweep", "well_decay"];

fn cli(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tunnelsim")).args(args).output().unwrap()
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

/// Every output file except the manifest's wall-time line.
fn snapshot(dir: &Path) -> Vec<(String, String)> {
    let mut out: Vec<(String, String)> = fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let p = e.unwrap().path();
            let body = fs::read_to_string(&p).unwrap();
            let body = body.lines().filter(|l| !l.starts_with("wall_time_s")).collect::<Vec<_>>().join("\n");
            (p.file_name().unwrap().to_string_lossy().into_owned(), body)
        })
        .collect();
    out.sort();
    out
}

#[test]
fn list_shows_the_bundled_catalog() {
    let o = cli(&["list"]);
    assert!(o.status.success());
    let s = text(&o.stdout);
    let listed: Vec<&str> = s.lines().map(|l| l.split_whitespace().next().unwrap()).collect();
    assert_eq!(listed.len(), 7);
    for n in NAMES {
        assert!(listed.contains(&n), "{n} missing from {listed:?}");
    }
}

#[test]
fn every_bundled_scenario_validates() {
    for n in NAMES {
        let o = cli(&["run", n, "--validate-only"]);
        assert!(o.status.success(), "{n}: {}", text(&o.stderr));
    }
}

#[test]
fn missing_unit_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let src = tunnelsim::bundled::get("larmor_dwell_map").unwrap();
    let bad = src.replace("absorber_width = 20 um", "absorber_width = 20");
    let path = dir.path().join("bad.scn");
    fs::write(&path, bad).unwrap();
    let o = cli(&["run", path.to_str().unwrap(), "--validate-only"]);
    assert_eq!(o.status.code(), Some(2));
    let err = text(&o.stderr);
    assert!(err.contains("absorber_width"), "{err}");
    assert!(err.contains("length"), "{err}");
}

#[test]
fn unknown_scenario_exits_2() {
    assert_eq!(cli(&["run", "no_such_scenario"]).status.code(), Some(2));
}

#[test]
fn repeated_runs_are_byte_identical() {
    let (a, b, c) = (TempDir::new().unwrap(), TempDir::new().unwrap(), TempDir::new().unwrap());
    for (dir, jobs) in [(&a, "1"), (&b, "4")] {
        let o = cli(&["run", "delta_kick_fig2", "--out-dir", dir.path().to_str().unwrap(), "--jobs", jobs]);
        assert!(o.status.success(), "{}", text(&o.stderr));
    }
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
    let o = cli(&["run", "delta_kick_fig2", "--out-dir", c.path().to_str().unwrap(), "--seed", "99"]);
    assert!(o.status.success());
    assert_ne!(snapshot(a.path()), snapshot(c.path()));
    let manifest = fs::read_to_string(c.path().join("manifest.txt")).unwrap();
    assert!(manifest.contains("seed = 99"));
}

#[test]
fn sweep_emits_its_tables_and_manifest() {
    let dir = TempDir::new().unwrap();
    let src = tunnelsim::bundled::get("fig3_sweep")
        .unwrap()
        .replace("max_channels = 80", "max_channels = 4")
        .replace("stop_after = 3", "stop_after = 1");
    let depths = src.lines().find(|l| l.starts_with("depths")).unwrap();
    let src = src.replace(depths, "depths = 50 nK");
    let path = dir.path().join("small.scn");
    fs::write(&path, src).unwrap();
    let out = dir.path().join("out");
    let o = cli(&["run", path.to_str().unwrap(), "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    for f in ["depth_capture.csv", "transfer_vs_E.csv", "summary.csv", "manifest.txt"] {
        assert!(out.join(f).is_file(), "{f}");
    }
    let manifest = fs::read_to_string(out.join("manifest.txt")).unwrap();
    for key in ["scenario_sha256", "tool_version", "seed", "wall_time_s", "transfer_vs_E_csv"] {
        assert!(manifest.contains(key), "{key}");
    }
    // every numeric column header carries a unit annotation or is dimensionless by name
    let csv = fs::read_to_string(out.join("transfer_vs_E.csv")).unwrap();
    let header = csv.lines().find(|l| !l.starts_with('#')).unwrap();
    assert!(header.contains('['), "{header}");
}

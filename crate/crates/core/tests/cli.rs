use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use adsflux::harness::Report;

fn scenarios_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_adsflux")).args(args).output().expect("binary runs")
}

fn cfg(name: &str) -> String {
    scenarios_dir().join(name).to_string_lossy().into_owned()
}

#[test]
fn bad_configs_exit_with_code_two() {
    let d = tempfile::tempdir().unwrap();
    let bad = d.path().join("bad.cfg");
    std::fs::write(&bad, "name = x\nkind = geometry_sanity\nbogus_key = 3\n").unwrap();
    let out = run(&["verify", bad.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("bad.cfg:3"), "{err}");

    let missing = d.path().join("nope.cfg");
    assert_eq!(run(&["verify", missing.to_str().unwrap()]).status.code(), Some(2));

    let not_json = d.path().join("r.json");
    std::fs::write(&not_json, "{}").unwrap();
    assert_eq!(run(&["report", "--merge", not_json.to_str().unwrap()]).status.code(), Some(2));
}

#[test]
fn tightened_tolerance_exits_with_code_one() {
    let d = tempfile::tempdir().unwrap();
    let strict = d.path().join("strict.cfg");
    std::fs::write(
        &strict,
        format!(
            "include = {}\nname = strict\nkind = geometry_sanity\ntol.structure.residual = 1e-14\n",
            cfg("defaults.cfg")
        ),
    )
    .unwrap();
    let out = run(&["--json", "verify", strict.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let r = Report::from_json(&String::from_utf8_lossy(&out.stdout)).unwrap();
    let failed: Vec<_> = r.scenarios[0].checks.iter().filter(|c| !c.pass).map(|c| c.name.as_str()).collect();
    assert_eq!(failed, ["structure.residual"]);
}

#[test]
fn verify_is_deterministic_and_reports_merge() {
    let d = tempfile::tempdir().unwrap();
    let a = d.path().join("a.json");
    let b = d.path().join("b.json");
    for p in [&a, &b] {
        let out = run(&["verify", &cfg("geometry_sanity.cfg"), "--out", p.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stdout));
    }
    let ra = Report::from_json(&std::fs::read_to_string(&a).unwrap()).unwrap();
    let rb = Report::from_json(&std::fs::read_to_string(&b).unwrap()).unwrap();
    assert_eq!(ra.without_timings(), rb.without_timings());

    // A seed override changes the config hash, so merging keeps both entries.
    let c = d.path().join("c.json");
    run(&["--seed", "9", "verify", &cfg("geometry_sanity.cfg"), "--out", c.to_str().unwrap()]);
    let m = d.path().join("m.json");
    let out = run(&["report", "--merge", a.to_str().unwrap(), b.to_str().unwrap(), c.to_str().unwrap(), "--out", m.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let merged = Report::from_json(&std::fs::read_to_string(&m).unwrap()).unwrap();
    assert_eq!(merged.scenarios.len(), 2);
    assert!(merged.pass());
}

#[test]
fn identity_surface_exports_constant_curvature() {
    let d = tempfile::tempdir().unwrap();
    let csv = d.path().join("s.csv");
    let out = run(&["reconstruct", &cfg("identity_surface.cfg"), "--export-csv", csv.to_str().unwrap(), "--samples", "3"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = std::fs::read_to_string(&csv).unwrap();
    let mut lines = text.lines();
    let header: Vec<_> = lines.next().unwrap().split(',').collect();
    let k = header.iter().position(|&h| h == "K").unwrap();
    let rows: Vec<f64> = lines.map(|l| l.split(',').nth(k).unwrap().parse().unwrap()).collect();
    assert!(!rows.is_empty());
    for v in rows {
        assert!((v + 1.0).abs() < 1e-4, "K = {v}");
    }
}

#[test]
fn every_anchor_is_used_by_a_check() {
    let src = include_str!("../src/harness/scenarios.rs");
    for a in adsflux::harness::scenarios::ANCHORS {
        let quoted = format!("\"{a}\"");
        assert!(src.matches(&quoted).count() >= 2, "anchor {a} is never attached to a check");
    }
}

//! Loads a scenario file, runs it and prints the report as text and JSON.
//!
//! `cargo run --example run_scenarios -- scenarios/infinitesimal.cfg`

use std::path::PathBuf;

use adsflux::harness::{load, run_all, Overrides};

fn main() {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/geometry_sanity.cfg")));
    let scenarios = match load(&path, Overrides::default()) {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            std::process::exit(2);
        }
    };
    let report = run_all(&scenarios);
    print!("{}", report.text());
    let json = report.without_timings().to_json();
    println!("{} bytes of JSON, overall {}", json.len(), if report.pass() { "PASS" } else { "FAIL" });
}

//! Verification reports (JSON schema version 1) and their merge.

use std::collections::BTreeMap;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const SCHEMA: &str = "adsflux-report";
pub const SCHEMA_VERSION: u32 = 1;

/// How a residual is compared with its tolerance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expect {
    /// Passes when `residual < tolerance`.
    Below,
    /// Negative control: passes when `residual > tolerance`.
    Above,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub anchor: String,
    /// `None` when the check could not be evaluated; see `error`.
    pub residual: Option<f64>,
    pub tolerance: f64,
    pub expect: Expect,
    pub pass: bool,
    pub wall_time_s: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl Check {
    pub fn from_result(
        name: &str,
        anchor: &str,
        tolerance: f64,
        expect: Expect,
        started: Instant,
        r: Result<f64>,
    ) -> Check {
        let wall_time_s = started.elapsed().as_secs_f64();
        let (residual, error) = match r {
            Ok(v) if v.is_finite() => (Some(v), None),
            Ok(v) => (None, Some(format!("non-finite residual {v}"))),
            Err(e) => (None, Some(e.to_string())),
        };
        let pass = match (residual, expect) {
            (Some(v), Expect::Below) => v < tolerance,
            (Some(v), Expect::Above) => v > tolerance,
            (None, _) => false,
        };
        Check {
            name: name.into(),
            anchor: anchor.into(),
            residual,
            tolerance,
            expect,
            pass,
            wall_time_s,
            error,
            note: None,
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Check {
        self.note = Some(note.into());
        self
    }

    /// One human-readable line.
    pub fn line(&self) -> String {
        let r = match self.residual {
            Some(v) => format!("{v:.3e}"),
            None => "n/a".into(),
        };
        let cmp = if self.expect == Expect::Below { "<" } else { ">" };
        let mut s = format!(
            "{} {:<44} residual {r:>10} {cmp} {:.1e}  [{:.2}s]",
            if self.pass { "PASS" } else { "FAIL" },
            self.name,
            self.tolerance,
            self.wall_time_s
        );
        if let Some(e) = &self.error {
            s.push_str(&format!("  error: {e}"));
        }
        if let Some(n) = &self.note {
            s.push_str(&format!("  ({n})"));
        }
        s
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioReport {
    pub scenario: String,
    pub kind: String,
    pub seed: u64,
    pub config_hash: String,
    pub checks: Vec<Check>,
    pub pass: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema: String,
    pub schema_version: u32,
    pub artifact_version: String,
    pub scenarios: Vec<ScenarioReport>,
}

impl Default for Report {
    fn default() -> Self {
        Report {
            schema: SCHEMA.into(),
            schema_version: SCHEMA_VERSION,
            artifact_version: env!("CARGO_PKG_VERSION").into(),
            scenarios: Vec::new(),
        }
    }
}

impl Report {
    pub fn pass(&self) -> bool {
        self.scenarios.iter().all(|s| s.pass)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Report> {
        let r: Report = serde_json::from_str(text).map_err(|e| Error::Config(format!("report: {e}")))?;
        if r.schema != SCHEMA || r.schema_version != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "report schema {} v{} (expected {SCHEMA} v{SCHEMA_VERSION})",
                r.schema, r.schema_version
            )));
        }
        Ok(r)
    }

    /// The same report with wall times zeroed, for determinism comparisons.
    pub fn without_timings(&self) -> Report {
        let mut r = self.clone();
        for s in &mut r.scenarios {
            for c in &mut s.checks {
                c.wall_time_s = 0.0;
            }
        }
        r
    }

    /// Human-readable summary.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for s in &self.scenarios {
            out.push_str(&format!(
                "== {} ({}, seed {}, config {}) {}\n",
                s.scenario,
                s.kind,
                s.seed,
                &s.config_hash[..12.min(s.config_hash.len())],
                if s.pass { "PASS" } else { "FAIL" }
            ));
            for c in &s.checks {
                out.push_str(&c.line());
                out.push('\n');
            }
        }
        out
    }
}

/// Union of scenario reports keyed by `(scenario, config hash)`, the right
/// operand winning on equal keys, sorted by key. This is associative and
/// idempotent.
pub fn merge(a: &Report, b: &Report) -> Report {
    let mut map: BTreeMap<(String, String), ScenarioReport> = BTreeMap::new();
    for s in a.scenarios.iter().chain(&b.scenarios) {
        map.insert((s.scenario.clone(), s.config_hash.clone()), s.clone());
    }
    Report { scenarios: map.into_values().collect(), ..Report::default() }
}

pub fn merge_all<'a>(reports: impl IntoIterator<Item = &'a Report>) -> Report {
    reports.into_iter().fold(Report::default(), |acc, r| merge(&acc, r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn scenario(name: &str, hash: &str, residual: f64) -> ScenarioReport {
        let c = Check::from_result("c", "a", 1.0, Expect::Below, Instant::now(), Ok(residual));
        ScenarioReport {
            scenario: name.into(),
            kind: "flux_vs_c".into(),
            seed: 1,
            config_hash: hash.into(),
            pass: c.pass,
            checks: vec![c.without_time()],
        }
    }

    impl Check {
        fn without_time(mut self) -> Self {
            self.wall_time_s = 0.0;
            self
        }
    }

    fn report() -> impl Strategy<Value = Report> {
        prop::collection::vec((0..4u8, 0..3u8, 0.0..2.0f64), 0..5).prop_map(|v| Report {
            scenarios: v.into_iter().map(|(n, h, r)| scenario(&format!("s{n}"), &format!("h{h}"), r)).collect(),
            ..Report::default()
        })
    }

    proptest! {
        #[test]
        fn merge_is_associative_and_idempotent(a in report(), b in report(), c in report()) {
            prop_assert_eq!(merge(&merge(&a, &b), &c), merge(&a, &merge(&b, &c)));
            let m = merge(&a, &b);
            prop_assert_eq!(merge(&m, &m), m.clone());
            prop_assert_eq!(merge(&m, &b), m);
        }
    }

    #[test]
    fn json_round_trip_and_negative_controls() {
        let r = Report { scenarios: vec![scenario("x", "h", 0.5)], ..Report::default() };
        assert_eq!(Report::from_json(&r.to_json()).unwrap(), r);
        let c = Check::from_result("n", "a", 1.0, Expect::Above, Instant::now(), Ok(3.0));
        assert!(c.pass);
        let e = Check::from_result("e", "a", 1.0, Expect::Below, Instant::now(), Err(Error::Degenerate { min_eig: 0.0 }));
        assert!(!e.pass && e.residual.is_none());
        assert!(Report::from_json("{\"schema\":\"x\"}").is_err());
    }
}

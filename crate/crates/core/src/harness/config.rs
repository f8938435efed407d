//! Scenario files: flat `key = value` lines, `#` comments, and at most one
//! level of `include = other.cfg` (keys of the including file win).
//!
//! A file either describes one scenario (it has a `kind`) or a suite
//! (`scenarios = a.cfg, b.cfg`, paths relative to the suite file).

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::mesh::DEFAULT_MESH_N;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    FluxVsC,
    Composition,
    Infinitesimal,
    MainTheorem,
    Obstruction,
    GeometrySanity,
}

impl ScenarioKind {
    pub const ALL: [ScenarioKind; 6] = [
        ScenarioKind::FluxVsC,
        ScenarioKind::Composition,
        ScenarioKind::Infinitesimal,
        ScenarioKind::MainTheorem,
        ScenarioKind::Obstruction,
        ScenarioKind::GeometrySanity,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::FluxVsC => "flux_vs_c",
            ScenarioKind::Composition => "composition",
            ScenarioKind::Infinitesimal => "infinitesimal",
            ScenarioKind::MainTheorem => "main_theorem",
            ScenarioKind::Obstruction => "obstruction",
            ScenarioKind::GeometrySanity => "geometry_sanity",
        }
    }

    fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|k| k.name() == s)
    }
}

/// A validated scenario.
#[derive(Clone, Debug, PartialEq)]
pub struct Scenario {
    pub name: String,
    pub kind: ScenarioKind,
    pub seed: u64,
    pub mesh_n: usize,
    pub steps: usize,
    /// Number of random flows, pairs or fields, where the kind uses one.
    pub count: usize,
    /// Flux class used by the obstruction and main-theorem runs.
    pub flux_target: Option<[f64; 4]>,
    /// Whether the main-theorem run also does the `h_r = f*h` case.
    pub pullback: bool,
    /// Per-check tolerance overrides, `tol.<check> = value`.
    pub tolerances: BTreeMap<String, f64>,
    /// SHA-256 of the canonical merged key set, hex encoded.
    pub config_hash: String,
}

/// Command-line overrides applied on top of a file.
#[derive(Clone, Copy, Debug, Default)]
pub struct Overrides {
    pub mesh_n: Option<usize>,
    pub steps: Option<usize>,
    pub seed: Option<u64>,
}

const KEYS: [&str; 8] = ["name", "kind", "seed", "mesh_n", "steps", "count", "flux_target", "pullback"];

fn config_err(path: &Path, line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Config(format!("{}:{line}: {msg}", path.display()))
}

/// Raw key-value pairs of one file, with line numbers.
fn read_pairs(path: &Path) -> Result<Vec<(String, String, usize)>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| config_err(path, i + 1, "expected `key = value`"))?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(config_err(path, i + 1, "empty key"));
        }
        if out.iter().any(|(q, _, _): &(String, String, usize)| q == k) {
            return Err(config_err(path, i + 1, format!("duplicate key `{k}`")));
        }
        out.push((k.to_string(), v.to_string(), i + 1));
    }
    Ok(out)
}

/// Keys of a file with its include resolved.
pub fn read_merged(path: &Path) -> Result<BTreeMap<String, (String, PathBuf, usize)>> {
    let own = read_pairs(path)?;
    let mut merged = BTreeMap::new();
    if let Some((_, inc, line)) = own.iter().find(|(k, _, _)| k == "include") {
        let inc_path = path.parent().unwrap_or(Path::new(".")).join(inc);
        for (k, v, l) in read_pairs(&inc_path).map_err(|e| config_err(path, *line, e))? {
            if k == "include" {
                return Err(config_err(&inc_path, l, "nested include (one level allowed)"));
            }
            merged.insert(k, (v, inc_path.clone(), l));
        }
    }
    for (k, v, l) in own {
        if k != "include" {
            merged.insert(k, (v, path.to_path_buf(), l));
        }
    }
    Ok(merged)
}

fn parse_num<T: std::str::FromStr>(v: &str, path: &Path, line: usize, key: &str) -> Result<T> {
    v.parse().map_err(|_| config_err(path, line, format!("`{key}`: cannot parse `{v}`")))
}

fn parse_class(v: &str, path: &Path, line: usize) -> Result<[f64; 4]> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 4 {
        return Err(config_err(path, line, "`flux_target` needs 4 comma-separated periods"));
    }
    let mut out = [0.0; 4];
    for (o, p) in out.iter_mut().zip(parts) {
        *o = match p {
            "pi" => std::f64::consts::PI,
            "2pi" => 2.0 * std::f64::consts::PI,
            "-pi" => -std::f64::consts::PI,
            "-2pi" => -2.0 * std::f64::consts::PI,
            _ => parse_num(p, path, line, "flux_target")?,
        };
    }
    Ok(out)
}

fn hash_of(map: &BTreeMap<String, String>) -> String {
    let mut h = Sha256::new();
    for (k, v) in map {
        h.update(k.as_bytes());
        h.update(b"=");
        h.update(v.as_bytes());
        h.update(b"\n");
    }
    h.finalize().iter().map(|b| format!("{b:02x}")).collect()
}

fn build(merged: BTreeMap<String, (String, PathBuf, usize)>, over: Overrides, origin: &Path) -> Result<Scenario> {
    let mut canon: BTreeMap<String, String> = merged.iter().map(|(k, (v, _, _))| (k.clone(), v.clone())).collect();
    if let Some(n) = over.mesh_n {
        canon.insert("mesh_n".into(), n.to_string());
    }
    if let Some(n) = over.steps {
        canon.insert("steps".into(), n.to_string());
    }
    if let Some(n) = over.seed {
        canon.insert("seed".into(), n.to_string());
    }
    let loc = |k: &str| merged.get(k).map(|(_, p, l)| (p.clone(), *l)).unwrap_or((origin.to_path_buf(), 0));
    for k in canon.keys() {
        if !(KEYS.contains(&k.as_str()) || k.starts_with("tol.")) {
            let (p, l) = loc(k);
            return Err(config_err(&p, l, format!("unknown key `{k}` (allowed: {}, tol.<check>)", KEYS.join(", "))));
        }
    }
    let get = |k: &str| canon.get(k).map(String::as_str);
    let kind_s = get("kind").ok_or_else(|| config_err(origin, 0, "missing `kind`"))?;
    let kind = ScenarioKind::parse(kind_s).ok_or_else(|| {
        let (p, l) = loc("kind");
        let names: Vec<_> = ScenarioKind::ALL.iter().map(|k| k.name()).collect();
        config_err(&p, l, format!("unknown kind `{kind_s}` (one of {})", names.join(", ")))
    })?;
    let num = |k: &str, default: u64| -> Result<u64> {
        match get(k) {
            None => Ok(default),
            Some(v) => {
                let (p, l) = loc(k);
                parse_num(v, &p, l, k)
            }
        }
    };
    let mut tolerances = BTreeMap::new();
    for (k, v) in &canon {
        if let Some(check) = k.strip_prefix("tol.") {
            let (p, l) = loc(k);
            let t: f64 = parse_num(v, &p, l, k)?;
            if !(t.is_finite() && t > 0.0) {
                return Err(config_err(&p, l, format!("`{k}` must be positive")));
            }
            tolerances.insert(check.to_string(), t);
        }
    }
    let flux_target = match get("flux_target") {
        None => None,
        Some(v) => {
            let (p, l) = loc("flux_target");
            Some(parse_class(v, &p, l)?)
        }
    };
    let pullback = match get("pullback") {
        None => true,
        Some("true") => true,
        Some("false") => false,
        Some(v) => {
            let (p, l) = loc("pullback");
            return Err(config_err(&p, l, format!("`pullback` must be true or false, not `{v}`")));
        }
    };
    let mesh_n = num("mesh_n", DEFAULT_MESH_N as u64)? as usize;
    let steps = num("steps", crate::flow::DEFAULT_STEPS as u64)? as usize;
    if mesh_n < 2 || steps == 0 {
        return Err(config_err(origin, 0, "`mesh_n` must be ≥ 2 and `steps` ≥ 1"));
    }
    Ok(Scenario {
        name: get("name").unwrap_or(kind.name()).to_string(),
        kind,
        seed: num("seed", 1)?,
        mesh_n,
        steps,
        count: num("count", 5)? as usize,
        flux_target,
        pullback,
        tolerances,
        config_hash: hash_of(&canon),
    })
}

/// Loads a scenario or a suite file into its list of scenarios.
pub fn load(path: &Path, over: Overrides) -> Result<Vec<Scenario>> {
    let merged = read_merged(path)?;
    if let Some((list, p, l)) = merged.get("scenarios") {
        if merged.len() > 1 {
            return Err(config_err(p, *l, "a suite file may only contain `scenarios`"));
        }
        let base = path.parent().unwrap_or(Path::new("."));
        let mut out = Vec::new();
        for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
            let sub = base.join(item);
            let m = read_merged(&sub)?;
            if m.contains_key("scenarios") {
                return Err(config_err(p, *l, format!("`{item}` is itself a suite")));
            }
            out.push(build(m, over, &sub)?);
        }
        return Ok(out);
    }
    Ok(vec![build(merged, over, path)?])
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
        let p = dir.join(name);
        std::fs::write(&p, text).unwrap();
        p
    }

    #[test]
    fn include_and_overrides() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "base.cfg", "seed = 3\nsteps = 64\n");
        let p = write(d.path(), "s.cfg", "include = base.cfg\nkind = flux_vs_c\nseed = 9 # wins\ntol.flux_vs_c = 1e-4\n");
        let s = &load(&p, Overrides::default()).unwrap()[0];
        assert_eq!((s.seed, s.steps, s.kind), (9, 64, ScenarioKind::FluxVsC));
        assert_eq!(s.tolerances["flux_vs_c"], 1e-4);
        let t = &load(&p, Overrides { seed: Some(4), ..Default::default() }).unwrap()[0];
        assert_eq!(t.seed, 4);
        assert_ne!(s.config_hash, t.config_hash);
    }

    #[test]
    fn bad_files_are_rejected_with_locations() {
        let d = tempfile::tempdir().unwrap();
        let p = write(d.path(), "a.cfg", "kind = flux_vs_c\nfrobnicate = 1\n");
        let e = load(&p, Overrides::default()).unwrap_err().to_string();
        assert!(e.contains("a.cfg:2") && e.contains("frobnicate"), "{e}");
        write(d.path(), "inner.cfg", "include = a.cfg\n");
        let p = write(d.path(), "outer.cfg", "include = inner.cfg\nkind = composition\n");
        assert!(load(&p, Overrides::default()).unwrap_err().to_string().contains("nested include"));
        let p = write(d.path(), "b.cfg", "kind = nonsense\n");
        assert!(load(&p, Overrides::default()).is_err());
    }

    #[test]
    fn suites_list_scenarios() {
        let d = tempfile::tempdir().unwrap();
        write(d.path(), "x.cfg", "kind = obstruction\nflux_target = pi, 0, 0, 0\n");
        write(d.path(), "y.cfg", "kind = geometry_sanity\n");
        let p = write(d.path(), "all.cfg", "scenarios = x.cfg, y.cfg\n");
        let v = load(&p, Overrides::default()).unwrap();
        assert_eq!(v.len(), 2);
        assert_eq!(v[0].flux_target.unwrap()[0], std::f64::consts::PI);
    }
}

//! Command-line front end.

use std::path::PathBuf;
use std::sync::Arc;

use clap::{Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::config::{load, Overrides, Scenario};
use super::report::{merge_all, Report};
use super::scenarios;
use crate::error::{Error, Result};
use crate::fieldcalc::{hyperbolic_metric, IdentityMap, MetricField, PlaneMap};
use crate::flow::FlowMap;
use crate::fuchsian::Surface;
use crate::harmonic::{domain_samples, HarmonicBasis};
use crate::symplect::{self, FluxQuadrature};

#[derive(Parser, Debug)]
#[command(name = "adsflux", version, about = "Flux, C-invariant and AdS surface verification runs")]
pub struct Cli {
    /// Machine-readable JSON on stdout.
    #[arg(long, global = true)]
    pub json: bool,
    /// Mesh subdivision override.
    #[arg(long, global = true)]
    pub mesh_n: Option<usize>,
    /// RK4 step override.
    #[arg(long, global = true)]
    pub steps: Option<usize>,
    /// Seed override.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Run a scenario or suite and report every check.
    Verify {
        config: PathBuf,
        /// Also write the JSON report here.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flux, C-invariant and swept-area flux of a scenario's flow.
    Flux {
        #[arg(long)]
        hamiltonian: PathBuf,
    },
    /// Reconstruct a scenario's surface and export it.
    Reconstruct {
        config: PathBuf,
        #[arg(long)]
        export_csv: PathBuf,
        /// Angular and radial sample counts.
        #[arg(long, default_value_t = 4)]
        samples: usize,
    },
    /// Merge JSON reports.
    Report {
        #[arg(long, num_args = 1.., required = true)]
        merge: Vec<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn single(cli: &Cli, path: &PathBuf) -> Result<Scenario> {
    let mut v = load(path, overrides(cli))?;
    if v.len() != 1 {
        return Err(Error::Config(format!("{}: expected a single scenario, found a suite", path.display())));
    }
    Ok(v.remove(0))
}

fn overrides(cli: &Cli) -> Overrides {
    Overrides { mesh_n: cli.mesh_n, steps: cli.steps, seed: cli.seed }
}

fn verify(cli: &Cli, config: &PathBuf, out: &Option<PathBuf>) -> Result<bool> {
    let list = load(config, overrides(cli))?;
    let mut report = Report::default();
    for sc in &list {
        let r = scenarios::run_scenario(sc);
        if !cli.json {
            let one = Report { scenarios: vec![r.clone()], ..Report::default() };
            print!("{}", one.text());
        }
        report.scenarios.push(r);
    }
    if cli.json {
        println!("{}", report.to_json());
    } else {
        println!("{}", if report.pass() { "ALL PASS" } else { "FAILURES" });
    }
    if let Some(p) = out {
        std::fs::write(p, report.to_json())?;
    }
    Ok(report.pass())
}

fn flux(cli: &Cli, path: &PathBuf) -> Result<bool> {
    let sc = single(cli, path)?;
    let s = Surface::standard();
    let basis = Arc::new(HarmonicBasis::new(&s)?);
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let class = sc.flux_target.unwrap_or([0.0; 4]);
    let field = scenarios::symplectic_field(scenarios::random_bump(&s, &mut rng), class, basis);
    let psi: Arc<dyn PlaneMap> = Arc::new(FlowMap::new(field.clone()).with_steps(sc.steps));
    let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
    let fl = symplect::flux(&*field, &s.loops, FluxQuadrature::default())?;
    let c = symplect::c_invariant(psi.clone(), h.clone(), h, &s.loops)?;
    let sw = symplect::swept_flux(&IdentityMap, &*psi, &s.loops, 16, 8);
    let dist = (0..4).map(|k| scenarios::circle_dist(fl.periods[k], c.periods[k])).fold(0.0, f64::max);
    if cli.json {
        let v = json!({
            "scenario": sc.name, "seed": sc.seed, "steps": sc.steps, "config_hash": sc.config_hash,
            "class": class, "flux": fl.periods, "c_invariant": c.periods, "swept_flux": sw.periods,
            "flux_c_distance": dist,
        });
        println!("{}", serde_json::to_string_pretty(&v).expect("json"));
    } else {
        println!("scenario     {} (seed {}, {} steps)", sc.name, sc.seed, sc.steps);
        println!("class        {:?}", class);
        println!("flux         {:?}", fl.periods);
        println!("C mod 2π     {:?}", c.periods);
        println!("swept area   {:?}", sw.periods);
        println!("|flux − C|   {dist:.3e} (mod 2π)");
    }
    Ok(true)
}

fn reconstruct(cli: &Cli, path: &PathBuf, csv: &PathBuf, n: usize) -> Result<bool> {
    let sc = single(cli, path)?;
    let surface = scenarios::scenario_surface(&sc)?;
    let pts = domain_samples(n, n);
    crate::adsurf::export_surface_csv(&surface, &pts, csv)?;
    let scan = crate::adsurf::immersion_scan(&surface, &pts, true)?;
    if cli.json {
        println!("{}", serde_json::to_string_pretty(&json!({ "csv": csv, "scan": scan })).expect("json"));
    } else {
        println!("wrote {} points to {}", pts.len(), csv.display());
        println!(
            "immersion {}  K in [{:.6}, {:.6}]  min eig(h⁻¹I) {:.3e}",
            scan.is_immersion(),
            scan.min_curvature,
            scan.max_curvature,
            scan.min_eigenvalue
        );
    }
    Ok(scan.is_immersion())
}

fn report(cli: &Cli, files: &[PathBuf], out: &Option<PathBuf>) -> Result<bool> {
    let mut reports = Vec::new();
    for f in files {
        let text = std::fs::read_to_string(f).map_err(|e| Error::Config(format!("{}: {e}", f.display())))?;
        reports.push(Report::from_json(&text).map_err(|e| Error::Config(format!("{}: {e}", f.display())))?);
    }
    let merged = merge_all(&reports);
    let text = merged.to_json();
    match out {
        Some(p) => std::fs::write(p, &text)?,
        None if cli.json => println!("{text}"),
        None => print!("{}", merged.text()),
    }
    Ok(merged.pass())
}

/// Runs the CLI and returns the process exit code: 0 on success, 1 when a
/// check fails, 2 on configuration or I/O errors.
pub fn main() -> i32 {
    let cli = Cli::parse();
    let r = match &cli.command {
        Command::Verify { config, out } => verify(&cli, config, out),
        Command::Flux { hamiltonian } => flux(&cli, hamiltonian),
        Command::Reconstruct { config, export_csv, samples } => reconstruct(&cli, config, export_csv, *samples),
        Command::Report { merge, out } => report(&cli, merge, out),
    };
    match r {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(e) => {
            eprintln!("error: {e}");
            2
        }
    }
}

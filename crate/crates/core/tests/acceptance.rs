//! The ten acceptance criteria. Each test prints one line
//! `criterion N: PASS|FAIL ...` directly to stdout, so the lines show up even
//! without `--nocapture`, and then asserts.

use std::f64::consts::PI;
use std::io::Write;
use std::sync::Arc;
use std::time::{Duration, Instant};

use adsflux::adsurf::{self, ExtractedPhi};
use adsflux::fieldcalc::{
    hyperbolic_metric, observed_order, structure_equation_residual, Composition, IdentityMap, MetricField,
    PlaneMap, PullbackMetric, ScalarField, VectorField,
};
use adsflux::flow::{FlowMap, SymplecticField};
use adsflux::fuchsian::Surface;
use adsflux::harmonic::{domain_samples, HarmonicBasis, HarmonicPotential};
use adsflux::harness::scenarios::{
    circle_dist, gradient_flow, random_bump, random_class, reconstruct, symplectic_field,
};
use adsflux::lie2::{self, Sl2Vec};
use adsflux::mesh::{harmonic_oneform, OctagonMesh};
use adsflux::orbit::ClassPotential;
use adsflux::symplect::{self, Eta, FluxQuadrature, PolarSection, Section};
use adsflux::Error;
use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn line(n: u32, pass: bool, detail: &str, elapsed: Duration, budget_s: f64) -> bool {
    let in_time = elapsed.as_secs_f64() < budget_s;
    let ok = pass && in_time;
    let mut out = std::io::stdout().lock();
    writeln!(
        out,
        "criterion {n:>2}: {} {detail} [{:.1}s of {budget_s}s]",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64()
    )
    .unwrap();
    ok
}

fn h() -> Arc<dyn MetricField> {
    Arc::new(hyperbolic_metric())
}

fn max4(v: impl IntoIterator<Item = f64>) -> f64 {
    v.into_iter().fold(0.0, f64::max)
}

#[test]
fn criterion_01_ads_normalization() {
    let t = Instant::now();
    let [e1, e2, e3] = Sl2Vec::basis();
    let k = max4(
        [(e1, e2), (e1.add(&e3.scale(0.3)), e2), (e1, e2.add(&e3.scale(0.4)))]
            .iter()
            .map(|(a, b)| (lie2::numerical_sectional_curvature(a, b, 1e-2) + 1.0).abs()),
    );
    // The loop through the identity fixing i closes at t = 2π for the unit
    // timelike generator ½[[0,1],[−1,0]].
    let len = lie2::one_parameter_length(&Sl2Vec::new(0.0, 0.5, -0.5), 2.0 * PI);
    let pass = k < 1e-6 && (len - PI).abs() < 1e-9;
    let d = format!("|K+1| = {k:.2e} (< 1e-6), |len(L_ii) − π| = {:.2e} (< 1e-9)", (len - PI).abs());
    assert!(line(1, pass, &d, t.elapsed(), 1.0));
}

#[test]
fn criterion_02_structure_equation() {
    let t = Instant::now();
    let pts: Vec<Complex64> =
        [(0.3, 0.8), (-0.4, 1.7), (1.1, 0.5), (0.0, 1.0)].iter().map(|&(x, y)| Complex64::new(x, y)).collect();
    let hm = hyperbolic_metric();
    let r = structure_equation_residual(&hm, &pts, 1e-4);
    let orders: Vec<f64> = [4e-2, 2e-2, 1e-2]
        .windows(2)
        .map(|w| {
            observed_order(
                structure_equation_residual(&hm, &pts, w[0]).residual,
                structure_equation_residual(&hm, &pts, w[1]).residual,
            )
        })
        .collect();
    let min_order = orders.iter().cloned().fold(f64::INFINITY, f64::min);
    // Order ≥ 2 up to the rounding of the ratio of two measured residuals.
    let pass = r.residual < 1e-6 && min_order >= 2.0 - 5e-3;
    let d = format!(
        "dω = −K·Ω_h residual {:.2e} (< 1e-6), orders {:?}; literal dω = −Ω_h residual {:.3}",
        r.residual, orders.iter().map(|o| (o * 1000.0).round() / 1000.0).collect::<Vec<_>>(), r.literal_residual
    );
    assert!(line(2, pass, &d, t.elapsed(), 10.0));
}

#[test]
fn criterion_03_flux_c_coincidence() {
    let t = Instant::now();
    let s = Surface::standard();
    let basis = Arc::new(HarmonicBasis::new(&s).unwrap());
    let mesh = Arc::new(OctagonMesh::new(&s, 50).unwrap());
    assert!(mesh.vertex_count() >= 10_000);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut worst: f64 = 0.0;
    let mut mesh_worst: f64 = 0.0;
    for _ in 0..5 {
        let field = symplectic_field(random_bump(&s, &mut rng), random_class(&mut rng, 0.3), basis.clone());
        let psi: Arc<dyn PlaneMap> = Arc::new(FlowMap::new(field.clone()).with_steps(256));
        let fl = symplect::flux(&*field, &s.loops, FluxQuadrature::default()).unwrap();
        let c = symplect::c_invariant(psi, h(), h(), &s.loops).unwrap();
        worst = worst.max(max4((0..4).map(|k| circle_dist(fl.periods[k], c.periods[k]))));
        let form = harmonic_oneform(&s, &fl, mesh.clone()).unwrap();
        mesh_worst = mesh_worst.max(form.periods().sub(&fl).max_abs());
    }
    let pass = worst < 1e-3 && mesh_worst < 1e-6;
    let d = format!(
        "5 flows, max |flux − C| mod 2π = {worst:.2e} (< 1e-3); mesh ({} vertices) harmonic periods {mesh_worst:.1e}",
        mesh.vertex_count()
    );
    assert!(line(3, pass, &d, t.elapsed(), 120.0));
}

#[test]
fn criterion_04_composition() {
    let t = Instant::now();
    let s = Surface::standard();
    let basis = Arc::new(HarmonicBasis::new(&s).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst: f64 = 0.0;
    let mut pulled_size: f64 = 0.0;
    for i in 0..5 {
        let map = |rng: &mut ChaCha8Rng| -> Arc<dyn PlaneMap> {
            let f = symplectic_field(random_bump(&s, rng), random_class(rng, 0.2), basis.clone());
            Arc::new(FlowMap::new(f).with_steps(64))
        };
        let psi = map(&mut rng);
        let mut psi_hat = map(&mut rng);
        let mut hp = h();
        if i == 4 {
            let f = gradient_flow(&s, &mut rng, 64);
            psi_hat = Arc::new(Composition { maps: vec![psi_hat, Arc::new(f.inverse())] });
            hp = Arc::new(PullbackMetric { map: Arc::new(f), base: h(), label: "f*h".into() });
        }
        let both: Arc<dyn PlaneMap> = Arc::new(Composition { maps: vec![psi.clone(), psi_hat.clone()] });
        let lhs = symplect::c_invariant(both, h(), hp.clone(), &s.loops).unwrap();
        let a = symplect::c_invariant(psi, h(), h(), &s.loops).unwrap();
        let b = symplect::c_invariant(psi_hat, h(), hp, &s.loops).unwrap();
        if i == 4 {
            pulled_size = max4(b.periods.map(|p| circle_dist(p, 0.0)));
        }
        worst = worst.max(max4((0..4).map(|k| circle_dist(lhs.periods[k], a.periods[k] + b.periods[k]))));
    }
    let pass = worst < 1e-3;
    let d = format!("5 pairs (one with h' = f*h, |C_h,h'(ψ̂)| = {pulled_size:.3}), residual {worst:.2e} (< 1e-3)");
    assert!(line(4, pass, &d, t.elapsed(), 120.0));
}

#[test]
fn criterion_05_infinitesimal_formula() {
    let t = Instant::now();
    let s = Surface::standard();
    let basis = Arc::new(HarmonicBasis::new(&s).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst: f64 = 0.0;
    for _ in 0..3 {
        let f = symplectic_field(random_bump(&s, &mut rng), random_class(&mut rng, 0.3), basis.clone());
        worst = worst.max(symplect::infinitesimal_formula(f, &s.loops, 1e-3).unwrap().relative_error());
    }
    let d = format!("3 fields, relative error {worst:.2e} (< 1e-3)");
    assert!(line(5, worst < 1e-3, &d, t.elapsed(), 60.0));
}

#[test]
fn criterion_06_exact_sequence_kernel() {
    let t = Instant::now();
    let s = Surface::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut ham: f64 = 0.0;
    for _ in 0..5 {
        let f = SymplecticField::autonomous(Arc::new(random_bump(&s, &mut rng)));
        ham = ham.max(symplect::flux(&f, &s.loops, FluxQuadrature::default()).unwrap().max_abs());
    }
    let basis = Arc::new(HarmonicBasis::new(&s).unwrap());
    let c = [0.4, -0.25, 0.1, 0.3];
    let f = SymplecticField::autonomous(Arc::new(HarmonicPotential::new(basis, c)));
    let fl = symplect::flux(&f, &s.loops, FluxQuadrature::default()).unwrap();
    let class_err = max4((0..4).map(|k| (fl.periods[k] - c[k]).abs()));
    let pass = ham < 1e-5 && class_err < 1e-4;
    let d = format!("Hamiltonian flux {ham:.2e} (< 1e-5), class flux error {class_err:.2e} (< 1e-4)");
    assert!(line(6, pass, &d, t.elapsed(), 60.0));
}

#[test]
fn criterion_07_section_ambiguity() {
    let t = Instant::now();
    let s = Surface::standard();
    let basis = Arc::new(HarmonicBasis::new(&s).unwrap());
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let f = symplectic_field(random_bump(&s, &mut rng), random_class(&mut rng, 0.3), basis);
    let psi: Arc<dyn PlaneMap> = Arc::new(FlowMap::new(f).with_steps(128));
    let base: Arc<dyn Section> = Arc::new(PolarSection::new(psi, h(), h()));
    let theta: Arc<dyn ScalarField> = Arc::new(ClassPotential::new(&s, [2.0 * PI, 0.0, 0.0, 0.0]));
    let d = symplect::section_ambiguity(base, theta, &s.loops).unwrap();
    let defect = symplect::lattice_defect(&d);
    let ints = d.periods.map(|p| (p / (2.0 * PI)).round() as i64);
    let pass = defect < 1e-3 && ints != [0; 4];
    let msg = format!("period difference = 2π·{ints:?} ± {defect:.2e} (< 1e-3)");
    assert!(line(7, pass, &msg, t.elapsed(), 30.0));
}

#[test]
fn criterion_08_main_theorem_round_trip() {
    let t = Instant::now();
    let s = Surface::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let field: Arc<dyn VectorField> = Arc::new(SymplecticField::autonomous(Arc::new(random_bump(&s, &mut rng))));
    let psi: Arc<dyn PlaneMap> = Arc::new(FlowMap::new(field).with_steps(128));
    let pts = domain_samples(2, 2);
    let mut details = Vec::new();
    let mut pass = true;
    for (case, f) in [("h_r = h", None), ("h_r = f*h", Some(gradient_flow(&s, &mut rng, 128)))] {
        let rec = reconstruct(&s, psi.clone(), f).unwrap();
        let scan = adsurf::immersion_scan(&rec.surface, &pts, true).unwrap();
        let ex = adsurf::extract_phi(rec.surface.clone());
        let mut dist: f64 = 0.0;
        for &x in &pts {
            let (_, w, _) = ex.solve(x).unwrap();
            // The developed form of f⁻¹∘ψ is ψ.
            dist = dist.max(lie2::h2_dist(w, psi.apply(x)));
        }
        let fl = symplect::swept_flux(&IdentityMap, &ExtractedPhi { surface: rec.surface.clone() }, &s.loops, 4, 8);
        let ok = scan.is_immersion() && scan.max_curvature < 0.0 && dist < 1e-4 && fl.max_abs() < 1e-3;
        pass &= ok;
        details.push(format!(
            "{case}: spacelike {}, max K {:.4}, round trip {dist:.1e}, flux {:.1e}",
            scan.is_immersion(),
            scan.max_curvature,
            fl.max_abs()
        ));
    }
    assert!(line(8, pass, &details.join("; "), t.elapsed(), 180.0));
}

#[test]
fn criterion_09_obstruction() {
    let t = Instant::now();
    let s = Surface::standard();
    let basis = Arc::new(HarmonicBasis::new(&s).unwrap());
    let flow = |c: [f64; 4]| -> Arc<dyn PlaneMap> {
        let f = SymplecticField::autonomous(Arc::new(HarmonicPotential::new(basis.clone(), c)));
        Arc::new(FlowMap::new(Arc::new(f)).with_steps(256))
    };
    let eta = Arc::new(Eta::new(Arc::new(PolarSection::new(flow([PI, 0.0, 0.0, 0.0]), h(), h()))));
    let obstructed = matches!(symplect::trivializing_angle(&s, eta), Err(Error::Obstruction { .. }));
    let rec = reconstruct(&s, flow([2.0 * PI, 0.0, 0.0, 0.0]), None);
    let (scanned, outcome) = match &rec {
        Ok(r) => match adsurf::immersion_scan(&r.surface, &domain_samples(2, 2), false) {
            Ok(sc) => (true, format!("immersion {} (min eig {:.2e})", sc.is_immersion(), sc.min_eigenvalue)),
            Err(e) => (false, e.to_string()),
        },
        Err(e) => (false, e.to_string()),
    };
    let pass = obstructed && rec.is_ok() && scanned;
    let d = format!("π obstructed: {obstructed}; 2π trivializes: {}; scan: {outcome}", rec.is_ok());
    assert!(line(9, pass, &d, t.elapsed(), 120.0));
}

#[test]
fn criterion_10_codazzi_criterion() {
    let t = Instant::now();
    let s = Surface::standard();
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    let basis = Arc::new(HarmonicBasis::new(&s).unwrap());
    let pts = domain_samples(2, 2);
    let mut worst_eta: f64 = 0.0;
    let mut worst_dn: f64 = 0.0;
    let mut control = true;
    // A Hamiltonian flow and a flow with lattice flux, both trivializable.
    for c in [[0.0; 4], [2.0 * PI, 0.0, 0.0, 0.0]] {
        let f = symplectic_field(random_bump(&s, &mut rng), c, basis.clone());
        let psi: Arc<dyn PlaneMap> = Arc::new(FlowMap::new(f).with_steps(128));
        let rec = reconstruct(&s, psi, None).unwrap();
        worst_eta = worst_eta.max(symplect::sup_eta(&rec.rotated_eta, &pts));
        worst_dn = worst_dn.max(symplect::sup_codazzi(&*rec.rotated, &pts));
        let eta0 = symplect::sup_eta(&rec.eta, &pts);
        let dn0 = symplect::sup_codazzi(&*rec.unrotated, &pts);
        if eta0 > 1e-3 {
            control &= dn0 > 1e-2;
        }
    }
    let pass = worst_eta < 1e-4 && worst_dn < 1e-3 && control;
    let d = format!("rotated sup|η| {worst_eta:.1e} (< 1e-4), sup|d∇(R_θ b)| {worst_dn:.1e} (< 1e-3); unrotated fails Codazzi: {control}");
    assert!(line(10, pass, &d, t.elapsed(), 60.0));
}

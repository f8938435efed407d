//! The check suites behind each scenario kind.

use std::f64::consts::PI;
use std::sync::Arc;
use std::time::Instant;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::{Scenario, ScenarioKind};
use super::report::{Check, Expect, ScenarioReport};
use crate::adsurf::{self, AdSImmersion, BTilde, BTildeInverse, ExtractedPhi};
use crate::error::{Error, Result};
use crate::fieldcalc::{
    hyperbolic_metric, structure_equation_residual, observed_order, Composition, EndoField, IdentityMap,
    MetricField, PlaneMap, PullbackMetric, ScalarField, VectorField,
};
use crate::flow::{FieldSum, FlowMap, GradientField, Profile, SymplecticField};
use crate::fuchsian::Surface;
use crate::harmonic::{domain_samples, HarmonicBasis, HarmonicPotential};
use crate::jet::CJet;
use crate::lie2::{self, MoebiusElt, Sl2Vec, TimelikeGeodesic, H2Point};
use crate::mat::JMat2;
use crate::orbit::{BumpSum, ClassPotential};
use crate::symplect::{self, Eta, FluxQuadrature, PolarSection, Section};

/// Default tolerances. Jet-exact quantities get tolerances a few orders
/// above rounding; finite-difference quantities are bounded by `ε²` times
/// the fourth derivatives (ε = 1e−4 gives ~1e−8, well inside 1e−6);
/// quantities through RK4 flows at 256 steps carry `h⁴ ≈ 2e−10` per unit
/// of the field's derivative scale, and quadratures are adaptive at 1e−6.
pub const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("ads.sectional_curvature", 1e-6),
    ("ads.timelike_loop_length", 1e-9),
    ("ads.isometry_action", 1e-9),
    ("ads.timelike_geodesics", 1e-9),
    ("structure.residual", 1e-6),
    ("structure.order", 1.9),
    ("identity_surface.curvature", 1e-4),
    ("identity_surface.shape_operator", 1e-4),
    ("identity_surface.gauss_map", 1e-8),
    ("identity_surface.equivariance", 1e-7),
    ("identity_surface.half_turn", 1e-9),
    ("tensor_b.identity", 1e-12),
    ("minimal_lagrangian.isometry_case", 1e-6),
    ("flux_vs_c", 1e-3),
    ("flux_vs_c.swept_area", 1e-4),
    ("flux_vs_c.mesh_harmonic", 1e-6),
    ("composition", 1e-3),
    ("frame_independence", 1e-6),
    ("eta.closed", 1e-6),
    ("eta.connection_vs_hodge", 1e-6),
    ("c_invariant.quadrature", 1e-5),
    ("infinitesimal", 1e-3),
    ("infinitesimal.hodge_identity", 1e-3),
    ("exact_sequence.hamiltonian", 1e-5),
    ("exact_sequence.class", 1e-4),
    ("hamiltonian_corollary", 1e-3),
    ("main_theorem.curvature", 0.0),
    ("main_theorem.round_trip", 1e-4),
    ("main_theorem.flux", 1e-3),
    ("main_theorem.orthogonality", 1e-5),
    ("main_theorem.equivariance", 1e-7),
    ("main_theorem.gauss_equation", 1e-4),
    ("main_theorem.shape_self_adjoint", 1e-5),
    ("btilde.inverse_of_section", 1e-6),
    ("btilde.tensor_b", 1e-3),
    ("codazzi.rotated_eta", 1e-4),
    ("codazzi.rotated_dnabla", 1e-3),
    ("codazzi.unrotated", 1e-2),
    ("minimal_lagrangian.non_codazzi", 1e-2),
    ("orthogonality.non_codazzi", 1e-3),
    ("obstruction.non_lattice", 1e-3),
    ("obstruction.lattice", 1e-3),
    ("obstruction.immersion_scan", 1.0),
    ("section_ambiguity", 1e-3),
];

/// Short names of the results each check is tied to. Every one of them
/// appears in at least one scenario.
pub const ANCHORS: &[&str] = &[
    "hamiltonian-definition",
    "flux-definition",
    "exact-sequence",
    "eta-construction",
    "frame-independence",
    "structure-equation",
    "section-ambiguity",
    "c-invariant",
    "connection-difference",
    "codazzi-criterion",
    "composition",
    "infinitesimal-formula",
    "flux-c-coincidence",
    "hamiltonian-corollary",
    "ads-normalization",
    "isometry-action",
    "timelike-geodesics",
    "gauss-map",
    "projections",
    "tensor-b",
    "btilde",
    "minimal-lagrangian",
    "main-theorem",
    "reconstruction",
    "trivializing-rotation",
    "singularity-obstruction",
];

pub fn default_tolerance(name: &str) -> f64 {
    DEFAULT_TOLERANCES
        .iter()
        .find(|(k, _)| *k == name)
        .map(|&(_, v)| v)
        .unwrap_or_else(|| panic!("no default tolerance for `{name}`"))
}

/// Distance on the circle ℝ/2πℤ.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    ((a - b + PI).rem_euclid(2.0 * PI) - PI).abs()
}

struct Run<'a> {
    sc: &'a Scenario,
    surface: Surface,
    h: Arc<dyn MetricField>,
    basis: Option<Arc<HarmonicBasis>>,
    checks: Vec<Check>,
}

impl<'a> Run<'a> {
    fn new(sc: &'a Scenario) -> Self {
        Run { sc, surface: Surface::standard(), h: Arc::new(hyperbolic_metric()), basis: None, checks: Vec::new() }
    }

    /// Tolerance of a check family, after config overrides.
    fn tol(&self, family: &str) -> f64 {
        self.sc.tolerances.get(family).copied().unwrap_or_else(|| default_tolerance(family))
    }

    fn check(&mut self, name: &str, family: &str, anchor: &str, expect: Expect, f: impl FnOnce() -> Result<f64>) -> Option<f64> {
        let t = Instant::now();
        let tol = self.tol(family);
        let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(f))
            .unwrap_or_else(|p| Err(Error::Consistency(panic_text(p))));
        let c = Check::from_result(name, anchor, tol, expect, t, r);
        let v = c.residual;
        self.checks.push(c);
        v
    }

    fn note(&mut self, note: impl Into<String>) {
        if let Some(c) = self.checks.last_mut() {
            c.note = Some(note.into());
        }
    }

    fn basis(&mut self) -> Result<Arc<HarmonicBasis>> {
        if self.basis.is_none() {
            self.basis = Some(Arc::new(HarmonicBasis::new(&self.surface)?));
        }
        Ok(self.basis.clone().unwrap())
    }

    fn flow(&self, field: Arc<dyn VectorField>) -> FlowMap {
        FlowMap::new(field).with_steps(self.sc.steps)
    }
}

fn panic_text(p: Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<String>()
        .cloned()
        .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_else(|| "panic".into())
}

/// A seeded equivariant bump Hamiltonian with one or two centres.
pub fn random_bump(surface: &Surface, rng: &mut ChaCha8Rng) -> BumpSum {
    let n = rng.gen_range(1..=2);
    let centres: Vec<(Complex64, f64, f64)> = (0..n)
        .map(|_| {
            let c = Complex64::new(rng.gen_range(-0.4..0.4), rng.gen_range(0.6..1.3));
            let amp = rng.gen_range(0.05..0.2) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
            (c, rng.gen_range(0.7..0.9), amp)
        })
        .collect();
    BumpSum::new(surface, &centres)
}

pub fn random_class(rng: &mut ChaCha8Rng, scale: f64) -> [f64; 4] {
    [0; 4].map(|_| rng.gen_range(-scale..scale))
}

/// Autonomous symplectic field: bump Hamiltonian plus the harmonic-like
/// representative of `class`.
pub fn symplectic_field(bump: BumpSum, class: [f64; 4], basis: Arc<HarmonicBasis>) -> Arc<dyn VectorField> {
    let mut terms: Vec<Arc<dyn VectorField>> = vec![Arc::new(SymplecticField::autonomous(Arc::new(bump)))];
    if class.iter().any(|&c| c != 0.0) {
        terms.push(Arc::new(SymplecticField::autonomous(Arc::new(HarmonicPotential::new(basis, class)))));
    }
    Arc::new(FieldSum(terms))
}

/// A non-symplectic diffeomorphism isotopic to the identity.
pub fn gradient_flow(surface: &Surface, rng: &mut ChaCha8Rng, steps: usize) -> FlowMap {
    let g = random_bump(surface, rng);
    FlowMap::new(Arc::new(GradientField { terms: vec![(Profile::constant(1.0), Arc::new(g))] })).with_steps(steps)
}

struct IdentityEndo;

impl EndoField for IdentityEndo {
    fn eval(&self, z: &CJet) -> JMat2 {
        JMat2::identity().truncate(z.order())
    }
}

/// A reconstructed surface together with the map it should return.
pub struct Reconstruction {
    pub surface: Arc<AdSImmersion>,
    /// `ψ`, which is the developed form of the expected `φ_Σ`.
    pub expected: Arc<dyn PlaneMap>,
    pub unrotated: Arc<dyn Section>,
    pub rotated: Arc<dyn Section>,
    pub eta: Arc<Eta>,
    pub rotated_eta: Eta,
}

/// `Σ = σ_{φ, R_θ·b}` for `φ = ψ` (same metric) or `φ = f⁻¹∘ψ` with
/// `h_r = f*h`, in developed coordinates.
pub fn reconstruct(
    surface: &Surface,
    psi: Arc<dyn PlaneMap>,
    f: Option<FlowMap>,
) -> Result<Reconstruction> {
    let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
    let (phi, hr, developed): (Arc<dyn PlaneMap>, Arc<dyn MetricField>, Arc<dyn PlaneMap>) = match f {
        None => (psi.clone(), h.clone(), psi.clone()),
        Some(f) => {
            let f_inv: Arc<dyn PlaneMap> = Arc::new(f.inverse());
            let f: Arc<dyn PlaneMap> = Arc::new(f);
            let phi: Arc<dyn PlaneMap> = Arc::new(Composition { maps: vec![psi.clone(), f_inv] });
            let hr = Arc::new(PullbackMetric { map: f.clone(), base: h.clone(), label: "f*h".into() });
            (phi.clone(), hr, Arc::new(Composition { maps: vec![phi, f] }))
        }
    };
    let unrotated: Arc<dyn Section> = Arc::new(PolarSection::new(phi, h, hr));
    let eta = Arc::new(Eta::new(unrotated.clone()));
    let theta = Arc::new(symplect::trivializing_angle(surface, eta.clone())?);
    let rotated: Arc<dyn Section> = Arc::new(symplect::rotate_section(unrotated.clone(), theta));
    let g = Arc::new(surface.group.clone());
    let s = Arc::new(adsurf::reconstruct_sigma(developed, rotated.clone(), g.clone(), g));
    Ok(Reconstruction {
        surface: s,
        expected: psi,
        unrotated,
        rotated: rotated.clone(),
        eta,
        rotated_eta: Eta::new(rotated),
    })
}

/// Sample points inside the fundamental domain.
pub fn samples() -> Vec<Complex64> {
    domain_samples(2, 2)
}

fn identity_surface(surface: &Surface) -> Arc<AdSImmersion> {
    let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
    let g = Arc::new(surface.group.clone());
    let sec = Arc::new(PolarSection::new(Arc::new(IdentityMap), h.clone(), h));
    Arc::new(adsurf::reconstruct_sigma(Arc::new(IdentityMap), sec, g.clone(), g))
}

/// The surface `reconstruct` exports for a scenario.
pub fn scenario_surface(sc: &Scenario) -> Result<Arc<AdSImmersion>> {
    let s = Surface::standard();
    if sc.kind == ScenarioKind::GeometrySanity {
        return Ok(identity_surface(&s));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let bump = random_bump(&s, &mut rng);
    let basis = Arc::new(HarmonicBasis::new(&s)?);
    let class = sc.flux_target.unwrap_or([0.0; 4]);
    let psi: Arc<dyn PlaneMap> = Arc::new(FlowMap::new(symplectic_field(bump, class, basis)).with_steps(sc.steps));
    Ok(reconstruct(&s, psi, None)?.surface)
}

fn max_abs(v: [f64; 4]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn geometry_sanity(r: &mut Run) {
    let [e1, e2, e3] = Sl2Vec::basis();
    r.check("ads.sectional_curvature", "ads.sectional_curvature", "ads-normalization", Expect::Below, || {
        // Spacelike planes, tilted towards the timelike e3.
        let pairs = [(e1, e2), (e1.add(&e3.scale(0.3)), e2), (e1, e2.add(&e3.scale(0.4))), (e1.add(&e2.scale(0.5)), e2)];
        Ok(pairs.iter().map(|(a, b)| (lie2::numerical_sectional_curvature(a, b, 1e-2) + 1.0).abs()).fold(0.0, f64::max))
    });
    r.check("ads.timelike_loop_length", "ads.timelike_loop_length", "ads-normalization", Expect::Below, || {
        let geo = TimelikeGeodesic { x: H2Point::i(), y: H2Point::i() };
        Ok((lie2::one_parameter_length(&geo.direction().scale(0.5), 2.0 * PI) - PI).abs())
    });
    let mut rng = ChaCha8Rng::seed_from_u64(r.sc.seed);
    let elt = |rng: &mut ChaCha8Rng| {
        let p = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0));
        MoebiusElt::affine_to(p) * MoebiusElt::rotation_about_i(rng.gen_range(0.0..6.0))
    };
    let (a, b, g) = (elt(&mut rng), elt(&mut rng), elt(&mut rng));
    let y = Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(0.3..2.0));
    r.check("ads.isometry_action", "ads.isometry_action", "isometry-action", Expect::Below, || {
        // (a,b)·g sends b(y) to a(g(y)), so (a,b) maps L_{g y, y} to L_{a g y, b y}.
        let moved = lie2::isom_action(&a, &b, &g);
        Ok(lie2::h2_dist(moved.apply(b.apply(y)), a.apply(g.apply(y))))
    });
    r.check("ads.timelike_geodesics", "ads.timelike_geodesics", "timelike-geodesics", Expect::Below, || {
        let geo = TimelikeGeodesic { x: H2Point::new(g.apply(y))?, y: H2Point::new(y)? };
        let mut worst: f64 = 0.0;
        for t in [0.0, 1.0, 2.5, 5.0] {
            worst = worst.max(lie2::h2_dist(geo.point(t).apply(y), geo.x.z));
        }
        let u = geo.direction();
        worst = worst.max(lie2::h2_dist(lie2::elliptic_fixed_point(&u)?.z, y));
        Ok(worst.max((lie2::ads_inner(&u, &u) + 1.0).abs()))
    });
    let pts: Vec<Complex64> = [(0.3, 0.8), (-0.4, 1.7), (1.1, 0.5)].iter().map(|&(x, y)| Complex64::new(x, y)).collect();
    let h = r.h.clone();
    let hp = h.clone();
    r.check("structure.residual", "structure.residual", "structure-equation", Expect::Below, || {
        Ok(structure_equation_residual(&*hp, &pts, 1e-4).residual)
    });
    let lit = structure_equation_residual(&*h, &pts, 1e-4).literal_residual;
    r.note(format!("checked as dω = −K·Ω_h; residual of the literal sign dω = −Ω_h is {lit:.3}"));
    r.check("structure.order", "structure.order", "structure-equation", Expect::Above, || {
        let c = structure_equation_residual(&*h, &pts, 2e-2).residual;
        let f = structure_equation_residual(&*h, &pts, 1e-2).residual;
        Ok(observed_order(c, f))
    });
    let ids = identity_surface(&r.surface);
    let xs = samples();
    let sfc = ids.clone();
    let geo: Vec<_> = xs.iter().take(6).filter_map(|&x| sfc.induced_geometry(x).ok()).collect();
    let g1 = geo.clone();
    r.check("identity_surface.curvature", "identity_surface.curvature", "reconstruction", Expect::Below, || {
        if g1.len() < 6 {
            return Err(Error::Consistency("induced geometry failed".into()));
        }
        Ok(g1.iter().map(|g| (g.curvature + 1.0).abs()).fold(0.0, f64::max))
    });
    r.check("identity_surface.shape_operator", "identity_surface.shape_operator", "btilde", Expect::Below, || {
        Ok(geo.iter().map(|g| g.shape.max_abs()).fold(0.0, f64::max))
    });
    let s2 = ids.clone();
    let x2 = xs.clone();
    r.check("identity_surface.gauss_map", "identity_surface.gauss_map", "gauss-map", Expect::Below, || {
        let (l, rr) = adsurf::gauss_map_round_trip(&s2, &x2)?;
        Ok(l.max(rr))
    });
    let s3 = ids.clone();
    let x3 = xs.clone();
    r.check("identity_surface.equivariance", "identity_surface.equivariance", "isometry-action", Expect::Below, || {
        x3.iter().try_fold(0.0f64, |m, &x| Ok(m.max(s3.equivariance_residual(x)?)))
    });
    r.check("identity_surface.half_turn", "identity_surface.half_turn", "timelike-geodesics", Expect::Below, || {
        xs.iter().try_fold(0.0f64, |m, &x| {
            let s = ids.sigma(x)?;
            Ok(m.max((s.apply(x) - x).norm()).max((s.deriv(x) + 1.0).norm()))
        })
    });
    let hh = r.h.clone();
    r.check("tensor_b.identity", "tensor_b.identity", "tensor-b", Expect::Below, || {
        let rep = adsurf::verify_tensor_b(&IdentityEndo, &IdentityMap, &*hh, &*hh, &samples());
        if rep.trace_margin < 1.0 {
            return Err(Error::TraceCondition { det: rep.trace_margin });
        }
        Ok(rep.isometry.max(rep.det).max(rep.codazzi).max(rep.self_adjoint))
    });
    let hh = r.h.clone();
    let f = gradient_flow(&r.surface, &mut rng, r.sc.steps);
    r.check("minimal_lagrangian.isometry_case", "minimal_lagrangian.isometry_case", "minimal-lagrangian", Expect::Below, || {
        let f_inv = f.inverse();
        let hr = PullbackMetric { map: Arc::new(f), base: hh.clone(), label: "f*h".into() };
        let rep = adsurf::verify_minimal_lagrangian(&f_inv, &IdentityEndo, &*hh, &hr, &samples());
        Ok(rep.isometry.max(rep.det).max(rep.codazzi).max(rep.self_adjoint))
    });
}

fn flux_vs_c(r: &mut Run) -> Result<()> {
    let basis = r.basis()?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.sc.seed);
    let mut first_flux = None;
    for i in 0..r.sc.count {
        let field = symplectic_field(random_bump(&r.surface, &mut rng), random_class(&mut rng, 0.3), basis.clone());
        let psi: Arc<dyn PlaneMap> = Arc::new(r.flow(field.clone()));
        let (loops, h) = (r.surface.loops.clone(), r.h.clone());
        let mut flux = None;
        r.check(&format!("flux_vs_c.flow{i}"), "flux_vs_c", "flux-c-coincidence", Expect::Below, || {
            let fl = symplect::flux(&*field, &loops, FluxQuadrature::default())?;
            let c = symplect::c_invariant(psi.clone(), h.clone(), h.clone(), &loops)?;
            flux = Some(fl);
            Ok((0..4).map(|k| circle_dist(fl.periods[k], c.periods[k])).fold(0.0, f64::max))
        });
        if let Some(fl) = flux {
            first_flux.get_or_insert(fl);
            r.note(format!("flux {:?}", fl.periods));
            r.check(&format!("flux_vs_c.swept_area.flow{i}"), "flux_vs_c.swept_area", "flux-definition", Expect::Below, || {
                let sw = symplect::swept_flux(&IdentityMap, &*psi, &loops, 16, 8);
                Ok(sw.sub(&fl).max_abs())
            });
        }
    }
    if let Some(fl) = first_flux {
        let n = r.sc.mesh_n;
        let surface = r.surface.clone();
        let mut vertices = 0;
        r.check("flux_vs_c.mesh_harmonic", "flux_vs_c.mesh_harmonic", "flux-definition", Expect::Below, || {
            let mesh = Arc::new(crate::mesh::OctagonMesh::new(&surface, n)?);
            vertices = mesh.vertex_count();
            let form = crate::mesh::harmonic_oneform(&surface, &fl, mesh)?;
            Ok(form.periods().sub(&fl).max_abs().max(form.coclosed_residual))
        });
        r.note(format!("harmonic representative of the first flux class on a {vertices}-vertex mesh"));
    }
    Ok(())
}

fn composition(r: &mut Run) -> Result<()> {
    let basis = r.basis()?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.sc.seed);
    let (surface, steps) = (r.surface.clone(), r.sc.steps);
    for i in 0..r.sc.count {
        let map = |rng: &mut ChaCha8Rng| -> Arc<dyn PlaneMap> {
            let field = symplectic_field(random_bump(&surface, rng), random_class(rng, 0.2), basis.clone());
            Arc::new(FlowMap::new(field).with_steps(steps))
        };
        let (psi, mut psi_hat) = (map(&mut rng), map(&mut rng));
        let h = r.h.clone();
        let pulled = i + 1 == r.sc.count;
        let hp: Arc<dyn MetricField> = if pulled {
            // ψ̂ must carry Ω_h to Ω_{f*h}, so it is f⁻¹ after a symplectic map.
            let f = gradient_flow(&r.surface, &mut rng, r.sc.steps);
            psi_hat = Arc::new(Composition { maps: vec![psi_hat, Arc::new(f.inverse())] });
            Arc::new(PullbackMetric { map: Arc::new(f), base: h.clone(), label: "f*h".into() })
        } else {
            h.clone()
        };
        let loops = r.surface.loops.clone();
        r.check(&format!("composition.pair{i}"), "composition", "composition", Expect::Below, || {
            let both: Arc<dyn PlaneMap> = Arc::new(Composition { maps: vec![psi.clone(), psi_hat.clone()] });
            let lhs = symplect::c_invariant(both, h.clone(), hp.clone(), &loops)?;
            let a = symplect::c_invariant(psi.clone(), h.clone(), h.clone(), &loops)?;
            let b = symplect::c_invariant(psi_hat.clone(), h.clone(), hp.clone(), &loops)?;
            Ok((0..4).map(|k| circle_dist(lhs.periods[k], a.periods[k] + b.periods[k])).fold(0.0, f64::max))
        });
        if pulled {
            r.note("h' = f*h with f a gradient flow, ψ̂ = f⁻¹∘χ");
        }
    }
    let field = symplectic_field(random_bump(&r.surface, &mut rng), random_class(&mut rng, 0.3), basis);
    let psi: Arc<dyn PlaneMap> = Arc::new(r.flow(field));
    let h = r.h.clone();
    let section: Arc<dyn Section> = Arc::new(PolarSection::new(psi.clone(), h.clone(), h.clone()));
    let sec = section.clone();
    r.check("eta.closed", "eta.closed", "eta-construction", Expect::Below, || {
        let mut worst: f64 = 0.0;
        for x in samples() {
            let eta = symplect::eta_hodge(&sec.eval(&CJet::local(x, 2)));
            worst = worst.max((eta[1].dx() - eta[0].dy()).abs() * x.im * x.im);
        }
        Ok(worst)
    });
    r.note("|dη|_h at the samples");
    let sec = section.clone();
    r.check("eta.connection_vs_hodge", "eta.connection_vs_hodge", "connection-difference", Expect::Below, || {
        let eta = Eta::new(sec);
        let mut worst: f64 = 0.0;
        for x in samples() {
            let (a, b) = eta.both(&CJet::local(x, 1));
            worst = worst.max((a[0].val() - b[0].val()).abs()).max((a[1].val() - b[1].val()).abs());
        }
        Ok(worst)
    });
    let sec = section.clone();
    r.check("frame_independence", "frame_independence", "frame-independence", Expect::Below, || {
        let mut worst: f64 = 0.0;
        for x in samples() {
            let z = CJet::local(x, 1);
            let s = sec.eval(&z);
            let alpha = z.re * 1.3 + z.im * z.im * 0.7;
            let a = symplect::eta_connection(&s);
            let b = symplect::eta_connection_in_frame(&s, &alpha);
            worst = worst.max((a[0].val() - b[0].val()).abs()).max((a[1].val() - b[1].val()).abs());
        }
        Ok(worst)
    });
    r.note("reference frame turned by a non-constant angle");
    let loops = r.surface.loops.clone();
    r.check("c_invariant.quadrature", "c_invariant.quadrature", "c-invariant", Expect::Below, || {
        let eta = Eta::new(section);
        let fixed = symplect::eta_periods(&eta, &loops, 16, 8)?.reduce();
        let adaptive = symplect::c_invariant(psi, h.clone(), h, &loops)?;
        Ok((0..4).map(|k| circle_dist(fixed.periods[k], adaptive.periods[k])).fold(0.0, f64::max))
    });
    r.note("pointwise Gauss quadrature against developed transport");
    Ok(())
}

fn infinitesimal(r: &mut Run) -> Result<()> {
    let basis = r.basis()?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.sc.seed);
    let n = if r.sc.count == 5 { 3 } else { r.sc.count };
    for i in 0..n {
        let field = symplectic_field(random_bump(&r.surface, &mut rng), random_class(&mut rng, 0.3), basis.clone());
        let loops = r.surface.loops.clone();
        let f2 = field.clone();
        r.check(&format!("infinitesimal.field{i}"), "infinitesimal", "infinitesimal-formula", Expect::Below, || {
            Ok(symplect::infinitesimal_formula(f2, &loops, 1e-3)?.relative_error())
        });
        r.check(&format!("infinitesimal.hodge_identity.field{i}"), "infinitesimal.hodge_identity", "infinitesimal-formula", Expect::Below, || {
            Ok([Complex64::new(0.1, 0.9), Complex64::new(-0.4, 0.7)]
                .iter()
                .map(|&z| symplect::hodge_identity_residual(field.clone(), z, 1e-4).abs())
                .fold(0.0, f64::max))
        });
    }
    Ok(())
}

fn main_theorem(r: &mut Run) -> Result<()> {
    let basis = r.basis()?;
    let mut rng = ChaCha8Rng::seed_from_u64(r.sc.seed);
    let loops = r.surface.loops.clone();
    // Kernel of the flux: Hamiltonian flows.
    let mut hams = Vec::new();
    for i in 0..r.sc.count {
        let bump = random_bump(&r.surface, &mut rng);
        let field: Arc<dyn VectorField> = Arc::new(SymplecticField::autonomous(Arc::new(bump)));
        hams.push(field.clone());
        let l = loops.clone();
        r.check(&format!("exact_sequence.hamiltonian{i}"), "exact_sequence.hamiltonian", "exact-sequence", Expect::Below, || {
            Ok(symplect::flux(&*field, &l, FluxQuadrature::default())?.max_abs())
        });
    }
    let class = r.sc.flux_target.unwrap_or_else(|| random_class(&mut rng, 0.3));
    let l = loops.clone();
    let b2 = basis.clone();
    r.check("exact_sequence.class", "exact_sequence.class", "hamiltonian-definition", Expect::Below, || {
        let field = SymplecticField::autonomous(Arc::new(HarmonicPotential::new(b2, class)));
        let fl = symplect::flux(&field, &l, FluxQuadrature::default())?;
        Ok(max_abs([0, 1, 2, 3].map(|k| fl.periods[k] - class[k])))
    });
    r.note(format!("class {class:?}"));

    // The reconstruction pipeline on the first Hamiltonian flow.
    let psi: Arc<dyn PlaneMap> = Arc::new(r.flow(hams[0].clone()));
    let (h, l) = (r.h.clone(), loops.clone());
    let p2 = psi.clone();
    r.check("hamiltonian_corollary", "hamiltonian_corollary", "hamiltonian-corollary", Expect::Below, || {
        let c = symplect::c_invariant(p2, h.clone(), h, &l)?;
        Ok(c.periods.iter().map(|&p| circle_dist(p, 0.0)).fold(0.0, f64::max))
    });
    let mut cases = vec![("same_metric", None)];
    if r.sc.pullback {
        cases.push(("pullback", Some(gradient_flow(&r.surface, &mut rng, r.sc.steps))));
    }
    let pts = samples();
    for (case, f) in cases {
        let rec = match reconstruct(&r.surface, psi.clone(), f) {
            Ok(rec) => rec,
            Err(e) => {
                let t = Instant::now();
                let tol = r.tol("main_theorem.round_trip");
                r.checks.push(Check::from_result(&format!("main_theorem.{case}.reconstruct"), "main-theorem", tol, Expect::Below, t, Err(e)));
                continue;
            }
        };
        let s = rec.surface.clone();
        let p = pts.clone();
        let scan = r.check(&format!("main_theorem.{case}.curvature"), "main_theorem.curvature", "main-theorem", Expect::Below, || {
            let sc = adsurf::immersion_scan(&s, &p, true)?;
            if !sc.is_immersion() {
                return Err(Error::NotSpacelike { at: format!("{:?}", sc.singular) });
            }
            Ok(sc.max_curvature)
        });
        if scan.is_some() {
            r.note("max K over samples; spacelike everywhere");
        }
        let (s, p, e) = (rec.surface.clone(), pts.clone(), rec.expected.clone());
        r.check(&format!("main_theorem.{case}.round_trip"), "main_theorem.round_trip", "projections", Expect::Below, || {
            let ex = adsurf::extract_phi(s);
            p.iter().try_fold(0.0f64, |m, &x| {
                let (_, w, _) = ex.solve(x)?;
                Ok(m.max(lie2::h2_dist(w, e.apply(x))))
            })
        });
        let (s, l) = (rec.surface.clone(), loops.clone());
        r.check(&format!("main_theorem.{case}.flux"), "main_theorem.flux", "main-theorem", Expect::Below, || {
            let ex = ExtractedPhi { surface: s };
            Ok(symplect::swept_flux(&IdentityMap, &ex, &l, 4, 8).max_abs())
        });
        r.note("flux of φ_ML⁻¹∘φ_Σ by swept area");
        let (s, p) = (rec.surface.clone(), pts.clone());
        r.check(&format!("main_theorem.{case}.orthogonality"), "main_theorem.orthogonality", "reconstruction", Expect::Below, || {
            p.iter().try_fold(0.0f64, |m, &x| Ok(m.max(s.orthogonality_residual(x)?)))
        });
        let (s, p) = (rec.surface.clone(), pts.clone());
        r.check(&format!("main_theorem.{case}.equivariance"), "main_theorem.equivariance", "gauss-map", Expect::Below, || {
            p.iter().take(4).try_fold(0.0f64, |m, &x| Ok(m.max(s.equivariance_residual(x)?)))
        });
        let (s, p) = (rec.surface.clone(), pts.clone());
        let geo: Vec<_> = p.iter().take(4).filter_map(|&x| s.induced_geometry(x).ok()).collect();
        let g2 = geo.clone();
        r.check(&format!("main_theorem.{case}.gauss_equation"), "main_theorem.gauss_equation", "btilde", Expect::Below, || {
            if g2.len() < 4 {
                return Err(Error::Consistency("induced geometry failed".into()));
            }
            Ok(g2.iter().map(|g| (g.curvature - g.gauss_equation).abs()).fold(0.0, f64::max))
        });
        r.check(&format!("main_theorem.{case}.shape_self_adjoint"), "main_theorem.shape_self_adjoint", "btilde", Expect::Below, || {
            Ok(geo.iter().map(|g| g.shape_asymmetry()).fold(0.0, f64::max))
        });
        let (s, p) = (rec.surface.clone(), pts.clone());
        r.check(&format!("btilde.{case}.inverse_of_section"), "btilde.inverse_of_section", "btilde", Expect::Below, || {
            adsurf::btilde_discrepancy(s, &p[..4])
        });
        r.note("b̃ equals (R_θ·b)⁻¹");
        let (s, p, hh) = (rec.surface.clone(), pts.clone(), r.h.clone());
        r.check(&format!("btilde.{case}.tensor_b"), "btilde.tensor_b", "tensor-b", Expect::Below, || {
            let inv = BTildeInverse(BTilde { surface: s.clone() });
            let rep = adsurf::verify_tensor_b(&inv, &*s.phi, &*hh, &*hh, &p[..4]);
            if rep.trace_margin < 1e-3 {
                return Err(Error::TraceCondition { det: rep.trace_margin });
            }
            Ok(rep.isometry.max(rep.det).max(rep.codazzi))
        });
        let p = pts.clone();
        let re = &rec.rotated_eta;
        r.check(&format!("codazzi.{case}.rotated_eta"), "codazzi.rotated_eta", "trivializing-rotation", Expect::Below, || {
            Ok(symplect::sup_eta(re, &p))
        });
        let (rot, p) = (rec.rotated.clone(), pts.clone());
        r.check(&format!("codazzi.{case}.rotated_dnabla"), "codazzi.rotated_dnabla", "codazzi-criterion", Expect::Below, || {
            Ok(symplect::sup_codazzi(&*rot, &p))
        });
        let (un, eta, p) = (rec.unrotated.clone(), rec.eta.clone(), pts.clone());
        let eta_size = symplect::sup_eta(&eta, &p);
        r.check(&format!("codazzi.{case}.unrotated"), "codazzi.unrotated", "codazzi-criterion", Expect::Above, || {
            Ok(symplect::sup_codazzi(&*un, &p))
        });
        r.note(format!("negative control; sup|η| = {eta_size:.3e}"));
        if case == "same_metric" {
            let (un, p, hh, ps) = (rec.unrotated.clone(), pts.clone(), r.h.clone(), psi.clone());
            let sa = std::cell::Cell::new(0.0);
            r.check("minimal_lagrangian.non_codazzi", "minimal_lagrangian.non_codazzi", "minimal-lagrangian", Expect::Above, || {
                let b = PolarAsEndo(un);
                let rep = adsurf::verify_minimal_lagrangian(&*ps, &b, &*hh, &*hh, &p);
                sa.set(rep.self_adjoint.max(rep.det).max(rep.isometry));
                Ok(rep.codazzi)
            });
            r.note(format!("negative control: Codazzi residual; self-adjoint, det and isometry residuals {:.1e}", sa.get()));
            let (un, p) = (rec.unrotated.clone(), pts.clone());
            let g = Arc::new(r.surface.group.clone());
            r.check("orthogonality.non_codazzi", "orthogonality.non_codazzi", "reconstruction", Expect::Above, || {
                let s = adsurf::reconstruct_sigma(psi.clone(), un, g.clone(), g);
                p.iter().try_fold(0.0f64, |m, &x| Ok(m.max(s.orthogonality_residual(x)?)))
            });
            r.note("negative control: surface built from the unrotated section");
        }
    }
    Ok(())
}

struct PolarAsEndo(Arc<dyn Section>);

impl EndoField for PolarAsEndo {
    fn eval(&self, z: &CJet) -> JMat2 {
        self.0.eval(z).b
    }
}

fn obstruction(r: &mut Run) -> Result<()> {
    let basis = r.basis()?;
    let h = r.h.clone();
    let class_flow = |c: [f64; 4]| -> Arc<dyn PlaneMap> {
        let field = SymplecticField::autonomous(Arc::new(HarmonicPotential::new(basis.clone(), c)));
        Arc::new(FlowMap::new(Arc::new(field)).with_steps(r.sc.steps))
    };
    let target = r.sc.flux_target.unwrap_or([PI, 0.0, 0.0, 0.0]);
    let surface = r.surface.clone();
    let (psi, hh) = (class_flow(target), h.clone());
    let mut got = None;
    r.check("obstruction.non_lattice", "obstruction.non_lattice", "singularity-obstruction", Expect::Above, || {
        let eta = Arc::new(Eta::new(Arc::new(PolarSection::new(psi, hh.clone(), hh))));
        match symplect::trivializing_angle(&surface, eta) {
            Err(Error::Obstruction { periods }) => {
                got = Some(periods);
                Ok(periods.iter().map(|&p| circle_dist(p, 0.0)).fold(0.0, f64::max))
            }
            Err(e) => Err(e),
            Ok(_) => Ok(0.0),
        }
    });
    r.note(format!("flux target {target:?}; obstruction raised with η-periods {got:?}"));
    let lattice = [2.0 * PI, 0.0, 0.0, 0.0];
    let psi = class_flow(lattice);
    let mut rec = None;
    r.check("obstruction.lattice", "obstruction.lattice", "trivializing-rotation", Expect::Below, || {
        let x = reconstruct(&surface, psi, None)?;
        let d = x.eta.clone();
        rec = Some(x);
        let p = symplect::eta_periods_adaptive(&d, &surface.loops, symplect::ETA_TOL)?;
        Ok(symplect::lattice_defect(&p))
    });
    r.note("flux target (2π, 0, 0, 0) passes the trivializing angle");
    if let Some(rec) = rec {
        let mut outcome = String::new();
        r.check("obstruction.immersion_scan", "obstruction.immersion_scan", "singularity-obstruction", Expect::Below, || {
            let sc = adsurf::immersion_scan(&rec.surface, &samples(), true)?;
            outcome = if sc.is_immersion() {
                format!(
                    "immersed at all {} samples; min eig(h⁻¹I) {:.3e}; K in [{:.4}, {:.4}]",
                    sc.samples, sc.min_eigenvalue, sc.min_curvature, sc.max_curvature
                )
            } else {
                format!("singular at {} of {} samples: {:?}", sc.singular.len(), sc.samples, sc.singular)
            };
            Ok(0.0)
        });
        r.note(format!("scan completed: {outcome}"));
    }
    // Section ambiguity: a winding-one circle-valued angle.
    let mut rng = ChaCha8Rng::seed_from_u64(r.sc.seed);
    let field = symplectic_field(random_bump(&r.surface, &mut rng), random_class(&mut rng, 0.3), basis.clone());
    let psi: Arc<dyn PlaneMap> = Arc::new(r.flow(field));
    let two_pi = 2.0 * PI;
    let winding = [two_pi, 0.0, 0.0, -two_pi];
    let theta: Arc<dyn ScalarField> = Arc::new(ClassPotential::new(&r.surface, winding));
    let mut diff = None;
    r.check("section_ambiguity", "section_ambiguity", "section-ambiguity", Expect::Below, || {
        let base: Arc<dyn Section> = Arc::new(PolarSection::new(psi, h.clone(), h));
        let d = symplect::section_ambiguity(base, theta, &surface.loops)?;
        diff = Some(d.periods);
        Ok(symplect::lattice_defect(&d))
    });
    r.note(format!("unreduced period difference {diff:?}"));
    Ok(())
}

/// Runs the checks of a scenario. Module errors become failed checks.
pub fn run_scenario(sc: &Scenario) -> ScenarioReport {
    let mut r = Run::new(sc);
    let outcome = match sc.kind {
        ScenarioKind::GeometrySanity => {
            geometry_sanity(&mut r);
            Ok(())
        }
        ScenarioKind::FluxVsC => flux_vs_c(&mut r),
        ScenarioKind::Composition => composition(&mut r),
        ScenarioKind::Infinitesimal => infinitesimal(&mut r),
        ScenarioKind::MainTheorem => main_theorem(&mut r),
        ScenarioKind::Obstruction => obstruction(&mut r),
    };
    if let Err(e) = outcome {
        r.checks.push(Check::from_result("setup", "reconstruction", 0.0, Expect::Below, Instant::now(), Err(e)));
    }
    let pass = !r.checks.is_empty() && r.checks.iter().all(|c| c.pass);
    ScenarioReport {
        scenario: sc.name.clone(),
        kind: sc.kind.name().into(),
        seed: sc.seed,
        config_hash: sc.config_hash.clone(),
        checks: r.checks,
        pass,
    }
}

//! Flux, sections of `Isom(TS, ψ*h', h)`, the 1-form `η_{ψ,b}`, the invariant
//! `C_{h,h'}` and trivializing rotations.

use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fieldcalc::{
    almost_complex, connection_form_unchecked, Composition, hodge_dual_dnabla, integrate_closed, jet_jacobian,
    local_for, period_with, pull, pull_mat, CohClass, CohClassMod2Pi, EndoField, MetricField,
    OneFormField, PlaneMap, ScalarField, VectorField, PERIOD_NODES, PERIOD_PANELS,
};
use crate::flow::SymplecticField;
use crate::fuchsian::{LoopBasis, Surface};
use crate::hyperbolic::{GeodesicArc, I};
use crate::jet::{CJet, Jet};
use crate::mat::{JMat2, JVec2, Mat2};
use crate::orbit::ClassPotential;

/// Hamiltonian field of an invariant function for the hyperbolic metric.
pub fn hamiltonian_field(h: Arc<dyn ScalarField>) -> SymplecticField {
    SymplecticField::autonomous(h)
}

/// Autonomous symplectic field with prescribed flux class: the `Ω_h`-dual
/// of a smooth closed 1-form with the given periods.
pub fn symplectic_field_from_class(surface: &Surface, c: &CohClass) -> SymplecticField {
    SymplecticField::autonomous(Arc::new(ClassPotential::new(surface, c.periods)))
}

/// `Ω_h(X_t, ·) = (−X_y dx + X_x dy)/y²` at a fixed time.
pub struct OmegaDual<'a> {
    pub field: &'a dyn VectorField,
    pub t: f64,
}

impl OneFormField for OmegaDual<'_> {
    fn eval(&self, z: &CJet) -> JVec2 {
        let x = self.field.eval(self.t, z);
        let r = z.im.truncate(x[0].order()).square().recip();
        [-(x[1] * r), x[0] * r]
    }
}

/// Quadrature settings for flux.
#[derive(Clone, Copy, Debug)]
pub struct FluxQuadrature {
    pub time_nodes: usize,
    pub panels: usize,
    pub nodes: usize,
}

impl Default for FluxQuadrature {
    fn default() -> Self {
        FluxQuadrature { time_nodes: 64, panels: 2 * PERIOD_PANELS, nodes: PERIOD_NODES }
    }
}

/// `∫₀¹ [Ω_h(X_t, ·)] dt` over the loop basis.
pub fn flux(field: &dyn VectorField, loops: &LoopBasis, q: FluxQuadrature) -> Result<CohClass> {
    let mut out = CohClass::default();
    for (t, w) in crate::quad::gauss_legendre(q.time_nodes) {
        let p = period_with(&OmegaDual { field, t }, loops, q.panels, q.nodes)?;
        out = out.add(&p.scale(w));
    }
    Ok(out)
}

/// `∫ dx/y` along the curve `s ↦ map(c(s))`, `c` a geodesic arc.
fn primitive_along(map: &dyn PlaneMap, arc: &GeodesicArc, rule: &[(f64, f64)]) -> f64 {
    let mut total = 0.0;
    for &(s, w) in rule {
        let (z, v) = arc.at(s);
        let img = map.map_jet(&CJet::local(z, 1));
        let dx = img.re.dx() * v.re + img.re.dy() * v.im;
        total += w * dx / img.im.val();
    }
    total
}

fn primitive_geodesic(p: Complex64, q: Complex64, rule: &[(f64, f64)]) -> f64 {
    let arc = GeodesicArc::new(p, q);
    rule.iter()
        .map(|&(s, w)| {
            let (z, v) = arc.at(s);
            w * v.re / z.im
        })
        .sum()
}

/// Flux of a map isotopic to the identity as the signed area swept between
/// `left∘γ` and `right∘γ` for each basis loop `γ`; with `left` the identity
/// this is the flux of `right`. The area is `∮ dx/y` around the closed
/// polygon formed by the two curves and the geodesics joining their ends.
pub fn swept_flux(
    left: &dyn PlaneMap,
    right: &dyn PlaneMap,
    loops: &LoopBasis,
    panels: usize,
    nodes: usize,
) -> CohClass {
    let rule = crate::quad::composite(0.0, 1.0, panels, nodes);
    let mut p = [0.0; 4];
    for (k, l) in loops.loops.iter().enumerate().take(4) {
        let mut total = 0.0;
        for w in l.nodes.windows(2) {
            let arc = GeodesicArc::new(w[0], w[1]);
            total += primitive_along(right, &arc, &rule) - primitive_along(left, &arc, &rule);
        }
        let a0 = left.apply(l.nodes[0]);
        let b0 = right.apply(l.nodes[0]);
        let end = *l.nodes.last().unwrap();
        let a1 = left.apply(end);
        let b1 = right.apply(end);
        total += primitive_geodesic(a0, b0, &rule) + primitive_geodesic(b1, a1, &rule);
        p[k] = total;
    }
    CohClass::new(p)
}

// ---------------------------------------------------------------------------
// Sections

/// Section data at a point: metric `h`, pulled-back metric `ψ*h'` and `b`,
/// all as jets of the same order.
#[derive(Clone, Copy, Debug)]
pub struct SectionJet {
    pub g: JMat2,
    pub gp: JMat2,
    pub b: JMat2,
}

/// Point data for sections whose target metric is `ψ*h' = Φ*h` with `h`
/// hyperbolic on both sides: `Φ(z)`, `DΦ(z)` and `b(z)`.
#[derive(Clone, Copy, Debug)]
pub struct Developed {
    pub image: Complex64,
    pub dphi: Mat2,
    pub b: Mat2,
}

/// A smooth section `b` of `Isom(TS, ψ*h', h)`.
pub trait Section: Send + Sync {
    fn eval(&self, z: &CJet) -> SectionJet;

    /// Values through a developing map, when both metrics are hyperbolic
    /// up to pullback.
    fn developed(&self, _z: Complex64) -> Option<Developed> {
        None
    }
}

/// Metrics `h` and `ψ*h'` at a jet point, together with `ψ` itself.
pub fn pulled_metrics(
    psi: &dyn PlaneMap,
    h: &dyn MetricField,
    hp: &dyn MetricField,
    z: &CJet,
) -> (JMat2, JMat2) {
    let (loc, out) = local_for(z);
    let w = psi.map_jet(&loc);
    let d = jet_jacobian(&w);
    let gp_img = hp.eval(&w).truncate(out);
    let gp = d.transpose() * gp_img * d;
    (h.eval(z).truncate(out.min(z.order())), pull_mat(z, &gp, out))
}

/// The positive `h`-self-adjoint square root of `A = G⁻¹ G'`, where
/// `h(A·,·) = ψ*h'`.
pub struct PolarSection {
    pub psi: Arc<dyn PlaneMap>,
    pub h: Arc<dyn MetricField>,
    pub hp: Arc<dyn MetricField>,
    /// `Φ = f∘ψ` when `h' = f*h` and `h` is hyperbolic.
    phi: Option<Arc<dyn PlaneMap>>,
}

impl PolarSection {
    pub fn checked_eval(&self, z: &CJet) -> Result<SectionJet> {
        let (g, gp) = pulled_metrics(&*self.psi, &*self.h, &*self.hp, z);
        let a = g.inverse() * gp;
        let av = a.value();
        let disc = (av.trace() * 0.5).powi(2) - av.det();
        let max_eig = av.trace() * 0.5 + disc.max(0.0).sqrt();
        let min_eig = av.det() / max_eig;
        if !(min_eig > 0.0) {
            return Err(Error::Degenerate { min_eig });
        }
        Ok(SectionJet { g, gp, b: a.sqrt_positive() })
    }
}

impl PolarSection {
    pub fn new(psi: Arc<dyn PlaneMap>, h: Arc<dyn MetricField>, hp: Arc<dyn MetricField>) -> Self {
        let phi = match (h.name() == "h", hp.developing_map()) {
            (true, Some(d)) => {
                Some(Arc::new(Composition { maps: vec![psi.clone(), d] }) as Arc<dyn PlaneMap>)
            }
            _ => None,
        };
        PolarSection { psi, h, hp, phi }
    }
}

impl Section for PolarSection {
    fn eval(&self, z: &CJet) -> SectionJet {
        self.checked_eval(z).expect("pulled-back metric is positive definite")
    }

    fn developed(&self, z: Complex64) -> Option<Developed> {
        let phi = self.phi.as_ref()?;
        let w = phi.map_jet(&CJet::local(z, 1));
        let image = w.value();
        let dphi = Mat2::new(w.re.dx(), w.re.dy(), w.im.dx(), w.im.dy());
        // G⁻¹ Φ*G = (y/y_Φ)² DΦᵀDΦ.
        let k = (z.im / image.im).powi(2);
        let b = (dphi.transpose() * dphi).scale(k).sqrt_positive()?;
        Some(Developed { image, dphi, b })
    }
}

/// `R_θ ∘ b` with `R_θ` the counterclockwise `h`-rotation by `θ`.
pub struct RotatedSection {
    pub base: Arc<dyn Section>,
    pub theta: Arc<dyn ScalarField>,
}

impl Section for RotatedSection {
    fn eval(&self, z: &CJet) -> SectionJet {
        let s = self.base.eval(z);
        let th = self.theta.eval(z).truncate(s.b.order());
        let r = crate::fieldcalc::rotation(&s.g, &th);
        SectionJet { g: s.g, gp: s.gp, b: r * s.b }
    }

    fn developed(&self, z: Complex64) -> Option<Developed> {
        let d = self.base.developed(z)?;
        let th = self.theta.eval(&CJet::local(z, 0)).val();
        // The hyperbolic rotation is the Euclidean one in the chart.
        Some(Developed { b: Mat2::rotation(th) * d.b, ..d })
    }
}

pub fn rotate_section(b: Arc<dyn Section>, theta: Arc<dyn ScalarField>) -> RotatedSection {
    RotatedSection { base: b, theta }
}

impl EndoField for PolarSection {
    fn eval(&self, z: &CJet) -> JMat2 {
        Section::eval(self, z).b
    }
}

impl EndoField for RotatedSection {
    fn eval(&self, z: &CJet) -> JMat2 {
        Section::eval(self, z).b
    }
}

/// Residuals of the section invariants at a point: `|G' − bᵀGb|`, `|det b − 1|`.
pub fn section_residuals(s: &SectionJet) -> (f64, f64) {
    let g = s.g.value();
    let b = s.b.value();
    let iso = (s.gp.value() - b.transpose() * g * b).max_abs() / g.max_abs();
    (iso, (b.det() - 1.0).abs())
}

// ---------------------------------------------------------------------------
// η

/// `η` by the connection-form definition: `ω' − ω` for the frames
/// `{v₁, v₂}` of `h` and `{b⁻¹v₁, b⁻¹v₂}` of `ψ*h'`.
pub fn eta_connection(s: &SectionJet) -> JVec2 {
    eta_connection_in_frame(s, &Jet::constant(0.0).truncate(s.g.order()))
}

/// [`eta_connection`] with the reference frame turned by the angle field
/// `alpha`. The result does not depend on `alpha`.
pub fn eta_connection_in_frame(s: &SectionJet, alpha: &Jet) -> JVec2 {
    let g = &s.g;
    let e1 = [g.m[0][0].sqrt().recip(), Jet::constant(0.0).truncate(g.order())];
    let v1 = crate::fieldcalc::rotation(g, alpha).apply(&e1);
    let v2 = almost_complex(g).apply(&v1);
    let omega = connection_form_unchecked(g, &v1, &v2);
    let bi = s.b.inverse();
    let w1 = bi.apply(&v1);
    let w2 = bi.apply(&v2);
    let omega_p = connection_form_unchecked(&s.gp, &w1, &w2);
    [omega_p[0] - omega[0], omega_p[1] - omega[1]]
}

/// `η = h(b⁻¹ J_h (⋆d∇b), J_h ·)`.
pub fn eta_hodge(s: &SectionJet) -> JVec2 {
    let star = hodge_dual_dnabla(&s.g, &s.b);
    let o = star[0].order();
    let g = s.g.truncate(o);
    let j = almost_complex(&g);
    let w = s.b.truncate(o).inverse().apply(&j.apply(&star));
    let gw = g.apply(&w);
    // η(e_i) = (G w) · (J e_i), J e_i the i-th column of J.
    std::array::from_fn(|i| gw[0] * j.m[0][i] + gw[1] * j.m[1][i])
}

/// The 1-form `η_{ψ,b}`; evaluation computes both expressions and keeps
/// the largest discrepancy seen for later checking.
pub struct Eta {
    pub section: Arc<dyn Section>,
    max_discrepancy: AtomicU64,
}

pub const ETA_CONSISTENCY_TOL: f64 = 1e-4;

impl Eta {
    pub fn new(section: Arc<dyn Section>) -> Self {
        Eta { section, max_discrepancy: AtomicU64::new(0f64.to_bits()) }
    }

    /// Both expressions; jets come out one order below `z` (order 0 for a
    /// bare point).
    pub fn both(&self, z: &CJet) -> (JVec2, JVec2) {
        let lifted;
        let z = if z.order() == 0 {
            lifted = CJet::local(z.value(), 1);
            &lifted
        } else {
            z
        };
        let s = self.section.eval(z);
        (eta_connection(&s), eta_hodge(&s))
    }

    pub fn max_discrepancy(&self) -> f64 {
        f64::from_bits(self.max_discrepancy.load(Ordering::Relaxed))
    }

    pub fn check(&self) -> Result<()> {
        let d = self.max_discrepancy();
        if d > ETA_CONSISTENCY_TOL {
            return Err(Error::Consistency(format!(
                "connection-form and Hodge-dual expressions of eta differ by {d:e}"
            )));
        }
        Ok(())
    }
}

/// `h`-norm of a covector at `z`, used to make discrepancies chart-free.
fn covector_norm_at(z: Complex64, a: [f64; 2]) -> f64 {
    z.im * (a[0] * a[0] + a[1] * a[1]).sqrt()
}

impl OneFormField for Eta {
    fn eval(&self, z: &CJet) -> JVec2 {
        let (a, b) = self.both(z);
        let d = covector_norm_at(z.value(), [a[0].val() - b[0].val(), a[1].val() - b[1].val()]);
        self.max_discrepancy.fetch_max(d.to_bits(), Ordering::Relaxed);
        b
    }
}

/// Periods of `η` (unreduced) by fixed composite quadrature of the
/// pointwise form.
pub fn eta_periods(eta: &Eta, loops: &LoopBasis, panels: usize, nodes: usize) -> Result<CohClass> {
    let p = period_with(eta, loops, panels, nodes)?;
    eta.check()?;
    Ok(p)
}

/// Default absolute tolerance for adaptive integrals of `η`.
pub const ETA_TOL: f64 = 1e-6;

fn wrap_angle(a: f64) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    a - two_pi * (a / two_pi).round()
}

/// `∫ η` along the geodesic from `p` to `q` through developed frames:
/// with `e = (y∂x, y∂y)`, whose connection form is `dx/y`, and `α` the angle
/// of `Φ_* b⁻¹ e₁` against `e₁`,
/// `∫ η = ∫_{Φ∘c} dx/y − ∫_c dx/y + α(q) − α(p)`.
/// Only first derivatives of `Φ` enter. Returns `None` when the section
/// has no developed form.
pub fn eta_transport(section: &dyn Section, p: Complex64, q: Complex64, tol: f64) -> Result<Option<(f64, usize)>> {
    if section.developed(p).is_none() {
        return Ok(None);
    }
    let arc = GeodesicArc::new(p, q);
    let sample = |s: f64| -> Result<(f64, f64)> {
        let (z, v) = arc.at(s);
        let d = section.developed(z).ok_or_else(|| Error::Degenerate { min_eig: 0.0 })?;
        let dv = d.dphi.apply([v.re, v.im]);
        let f = dv[0] / d.image.im - v.re / z.im;
        let bi = d.b.inverse();
        let e = d.dphi.apply(bi.apply([1.0, 0.0]));
        Ok((f, e[1].atan2(e[0])))
    };
    let mut angles: Vec<(f64, f64)> = Vec::new();
    let mut err = None;
    let mut f = |s: f64| match sample(s) {
        Ok((v, a)) if v.is_finite() => {
            angles.push((s, a));
            v
        }
        Ok(_) => {
            err = Some(Error::NumericOverflow(format!("transport integrand at s = {s}")));
            0.0
        }
        Err(e) => {
            err = Some(e);
            0.0
        }
    };
    let (integral, mut evals) = crate::quad::adaptive(&mut f, 0.0, 1.0, PERIOD_NODES, tol, 18);
    if let Some(e) = err {
        return Err(e);
    }
    for s in [0.0, 1.0] {
        angles.push((s, sample(s)?.1));
        evals += 1;
    }
    angles.sort_by(|a, b| a.0.total_cmp(&b.0));
    // Unwrap, refining wherever consecutive angles are too far apart to be
    // joined unambiguously.
    let mut total = 0.0;
    let mut stack: Vec<((f64, f64), (f64, f64), u32)> =
        angles.windows(2).rev().map(|w| (w[0], w[1], 0)).collect();
    while let Some((l, r, depth)) = stack.pop() {
        let d = wrap_angle(r.1 - l.1);
        if d.abs() < 1.0 || depth >= 30 {
            total += d;
            continue;
        }
        let m = 0.5 * (l.0 + r.0);
        let mid = (m, sample(m)?.1);
        evals += 1;
        stack.push((mid, r, depth + 1));
        stack.push((l, mid, depth + 1));
    }
    Ok(Some((integral + total, evals)))
}

/// `∫ η` along a piecewise geodesic path: through developed frames when
/// available, otherwise by adaptive quadrature of the pointwise form.
pub fn integrate_eta(eta: &Eta, nodes: &[Complex64], tol: f64) -> Result<f64> {
    let mut total = 0.0;
    for w in nodes.windows(2) {
        total += match eta_transport(&*eta.section, w[0], w[1], tol)? {
            Some((v, _)) => v,
            None => crate::fieldcalc::line_integral_adaptive(eta, w, tol)?.0,
        };
    }
    Ok(total)
}

/// Periods of `η` (unreduced) by adaptive integration.
pub fn eta_periods_adaptive(eta: &Eta, loops: &LoopBasis, tol: f64) -> Result<CohClass> {
    let mut p = [0.0; 4];
    for (k, l) in loops.loops.iter().enumerate().take(4) {
        p[k] = integrate_eta(eta, &l.nodes, tol)?;
    }
    eta.check()?;
    Ok(CohClass::new(p))
}

/// `C_{h,h'}(ψ)`: periods of `η_{ψ,b}` for the polar section, mod 2π.
pub fn c_invariant(
    psi: Arc<dyn PlaneMap>,
    h: Arc<dyn MetricField>,
    hp: Arc<dyn MetricField>,
    loops: &LoopBasis,
) -> Result<CohClassMod2Pi> {
    let eta = Eta::new(Arc::new(PolarSection::new(psi, h, hp)));
    Ok(eta_periods_adaptive(&eta, loops, ETA_TOL)?.reduce())
}

// ---------------------------------------------------------------------------
// Trivializing angle

/// Tolerance for periods to count as lying in 2πℤ.
pub const LATTICE_TOL: f64 = 1e-3;

/// A function `θ` with `dθ = η_{ψ,b}`, so that `η_{ψ, R_θ b} = 0`.
///
/// On the fundamental domain `θ(z) = ∫ η` along the geodesic from `i`; it
/// extends by `θ(g·z) = θ(z) + χ(g)` with `χ` the rounded periods, which lie
/// in 2πℤ. Values already computed serve as anchors for nearby points.
pub struct TrivializingAngle {
    eta: Arc<Eta>,
    group: Arc<crate::fuchsian::FuchsianGroup>,
    /// Unreduced periods of `η`.
    pub periods: CohClass,
    lattice: [f64; 4],
    anchors: Mutex<Vec<(Complex64, f64)>>,
    tol: f64,
}

impl TrivializingAngle {
    pub fn periods_vector(&self) -> [f64; 4] {
        self.periods.periods
    }

    /// `θ` at a point of the fundamental domain.
    fn base_value(&self, z0: Complex64) -> Result<f64> {
        let (start, base) = {
            let a = self.anchors.lock().unwrap();
            a.iter()
                .map(|&(p, v)| (crate::lie2::h2_dist(p, z0), p, v))
                .min_by(|x, y| x.0.total_cmp(&y.0))
                .map(|(_, p, v)| (p, v))
                .unwrap_or((I, 0.0))
        };
        if start == z0 {
            return Ok(base);
        }
        let v = base + integrate_eta(&self.eta, &[start, z0], self.tol)?;
        self.anchors.lock().unwrap().push((z0, v));
        Ok(v)
    }

    pub fn try_value(&self, z: Complex64) -> Result<f64> {
        let r = self.group.reduce(z)?;
        let ab = crate::orbit::word_class(&r.word);
        let shift: f64 = (0..4).map(|i| ab[i] as f64 * self.lattice[i]).sum();
        Ok(self.base_value(r.z0)? + shift)
    }

    pub fn value(&self, z: Complex64) -> f64 {
        self.try_value(z).expect("trivializing angle evaluation")
    }
}

impl ScalarField for TrivializingAngle {
    fn eval(&self, z: &CJet) -> Jet {
        let value = self.value(z.value());
        if z.order() == 0 {
            return Jet::constant(value).truncate(0);
        }
        let (loc, out) = local_for(z);
        // η at order `out − 1` in local coordinates, then integrate.
        let loc_eta = CJet::local(loc.value(), out);
        let e = self.eta.eval(&loc_eta);
        let e = [e[0].truncate(out - 1), e[1].truncate(out - 1)];
        let th = integrate_closed(value, &e);
        pull(z, &th, out)
    }

    fn periods(&self) -> [f64; 4] {
        self.lattice
    }
}

/// Builds the trivializing angle, or reports the obstruction when some
/// period of `η` is not in 2πℤ.
pub fn trivializing_angle(surface: &Surface, eta: Arc<Eta>) -> Result<TrivializingAngle> {
    let periods = eta_periods_adaptive(&eta, &surface.loops, ETA_TOL)?;
    let two_pi = 2.0 * std::f64::consts::PI;
    let lattice = periods.periods.map(|p| (p / two_pi).round() * two_pi);
    let off = (0..4).map(|i| (periods.periods[i] - lattice[i]).abs()).fold(0.0, f64::max);
    if off > LATTICE_TOL {
        return Err(Error::Obstruction { periods: periods.periods });
    }
    Ok(TrivializingAngle {
        eta,
        group: Arc::new(surface.group.clone()),
        periods,
        lattice,
        anchors: Mutex::new(Vec::new()),
        tol: ETA_TOL,
    })
}

// ---------------------------------------------------------------------------
// Pointwise and infinitesimal checks

/// `sup |⋆d∇b|_h` over sample points: zero exactly for Codazzi sections.
pub fn sup_codazzi(section: &dyn Section, points: &[Complex64]) -> f64 {
    points
        .iter()
        .map(|&z| {
            let s = section.eval(&CJet::local(z, 1));
            let v = hodge_dual_dnabla(&s.g, &s.b);
            crate::fieldcalc::norm(&s.g.value(), [v[0].val(), v[1].val()])
        })
        .fold(0.0, f64::max)
}

/// `sup |η|_h` over sample points.
pub fn sup_eta(eta: &Eta, points: &[Complex64]) -> f64 {
    points
        .iter()
        .map(|&z| {
            let e = eta.eval(&CJet::local(z, 1));
            covector_norm_at(z, [e[0].val(), e[1].val()])
        })
        .fold(0.0, f64::max)
}

/// Central difference in `t` of the unreduced `η`-periods of the polar
/// sections of `ψ_t` (`h' = h`), next to `[Ω_h(X_0, ·)]`.
#[derive(Clone, Copy, Debug)]
pub struct Infinitesimal {
    pub derivative: CohClass,
    pub expected: CohClass,
}

impl Infinitesimal {
    pub fn relative_error(&self) -> f64 {
        self.derivative.sub(&self.expected).max_abs() / self.expected.max_abs().max(f64::MIN_POSITIVE)
    }
}

fn short_flow(field: &Arc<dyn VectorField>, t: f64) -> crate::flow::FlowMap {
    crate::flow::FlowMap { field: field.clone(), t0: 0.0, t1: t, steps: 4 }
}

pub fn infinitesimal_formula(field: Arc<dyn VectorField>, loops: &LoopBasis, dt: f64) -> Result<Infinitesimal> {
    let h: Arc<dyn MetricField> = Arc::new(crate::fieldcalc::hyperbolic_metric());
    let periods = |t: f64| -> Result<CohClass> {
        let sec = PolarSection::new(Arc::new(short_flow(&field, t)), h.clone(), h.clone());
        eta_periods_adaptive(&Eta::new(Arc::new(sec)), loops, 1e-6 * dt)
    };
    let derivative = periods(dt)?.sub(&periods(-dt)?).scale(0.5 / dt);
    let expected = crate::fieldcalc::period(&OmegaDual { field: &*field, t: 0.0 }, loops)?;
    Ok(Infinitesimal { derivative, expected })
}

/// With `ḃ` the `t`-derivative at 0 of the polar sections of `ψ_t`,
/// `⋆d∇ḃ − J_h X` must be an `h`-gradient. Returns the curl of its dual
/// 1-form relative to `|X|_h`, at `z`.
pub fn hodge_identity_residual(field: Arc<dyn VectorField>, z: Complex64, dt: f64) -> f64 {
    let h: Arc<dyn MetricField> = Arc::new(crate::fieldcalc::hyperbolic_metric());
    let at = CJet::local(z, 2);
    let b = |t: f64| {
        let sec = PolarSection::new(Arc::new(short_flow(&field, t)), h.clone(), h.clone());
        Section::eval(&sec, &at).b
    };
    let (bp, bm) = (b(dt), b(-dt));
    let bdot = JMat2 {
        m: std::array::from_fn(|i| std::array::from_fn(|j| (bp.m[i][j] - bm.m[i][j]) * (0.5 / dt))),
    };
    let g = h.eval(&at);
    let star = hodge_dual_dnabla(&g, &bdot);
    let g1 = g.truncate(1);
    let x = field.eval(0.0, &at.truncate(1));
    let jx = almost_complex(&g1).apply(&x);
    let v = [star[0] - jx[0], star[1] - jx[1]];
    let curl = crate::fieldcalc::exterior_d(&g1.apply(&v)).val();
    let xn = crate::fieldcalc::norm(&g1.value(), [x[0].val(), x[1].val()]);
    // The curl is a density; divide by the area element.
    curl / g.value().det().sqrt() / xn.max(f64::MIN_POSITIVE)
}

/// Unreduced `η`-periods of `R_ϑ b` minus those of `b`.
pub fn section_ambiguity(base: Arc<dyn Section>, theta: Arc<dyn ScalarField>, loops: &LoopBasis) -> Result<CohClass> {
    let p0 = eta_periods_adaptive(&Eta::new(base.clone()), loops, ETA_TOL)?;
    let p1 = eta_periods_adaptive(&Eta::new(Arc::new(rotate_section(base, theta))), loops, ETA_TOL)?;
    Ok(p1.sub(&p0))
}

/// Distance of each component from 2πℤ.
pub fn lattice_defect(c: &CohClass) -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    c.periods.iter().map(|p| (p - two_pi * (p / two_pi).round()).abs()).fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldcalc::{hyperbolic_metric, IdentityMap};
    use crate::flow::{FieldSum, FlowMap};
    use crate::orbit::BumpSum;

    fn field(s: &Surface, c: [f64; 4]) -> Arc<dyn VectorField> {
        let h = BumpSum::new(s, &[(Complex64::new(0.2, 1.1), 0.9, 0.3), (Complex64::new(-0.5, 0.8), 0.7, -0.2)]);
        let u = ClassPotential::new(s, c);
        Arc::new(FieldSum(vec![
            Arc::new(SymplecticField::autonomous(Arc::new(h))),
            Arc::new(SymplecticField::autonomous(Arc::new(u))),
        ]))
    }

    fn quick() -> FluxQuadrature {
        FluxQuadrature { time_nodes: 4, ..Default::default() }
    }

    #[test]
    fn flux_of_class_field_is_its_class() {
        let s = Surface::standard();
        let c = [0.3, 0.0, -0.2, 0.1];
        let f = flux(&*field(&s, c), &s.loops, quick()).unwrap();
        for i in 0..4 {
            assert!((f.periods[i] - c[i]).abs() < 1e-6, "{:?}", f);
        }
    }

    #[test]
    fn polar_section_of_identity_is_trivial() {
        let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
        let sec = PolarSection::new(Arc::new(IdentityMap), h.clone(), h);
        let z = CJet::local(Complex64::new(0.2, 0.7), 2);
        let s = Section::eval(&sec, &z);
        assert!((s.b.value() - crate::mat::Mat2::IDENTITY).max_abs() < 1e-14);
        let (a, b) = (eta_connection(&s), eta_hodge(&s));
        for k in 0..2 {
            assert!(a[k].val().abs() < 1e-12 && b[k].val().abs() < 1e-12);
        }
    }

    #[test]
    fn eta_expressions_agree_and_eta_is_closed() {
        let s = Surface::standard();
        let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
        let psi = FlowMap::new(field(&s, [0.3, 0.0, -0.2, 0.1]));
        let sec = PolarSection::new(Arc::new(psi), h.clone(), h);
        let s0 = Section::eval(&sec, &CJet::local(Complex64::new(0.1, 0.9), 3));
        let (iso, det) = section_residuals(&s0);
        assert!(iso < 1e-10 && det < 1e-10, "{iso} {det}");
        let (a, b) = (eta_connection(&s0), eta_hodge(&s0));
        for k in 0..2 {
            assert!((a[k].val() - b[k].val()).abs() < 1e-8, "{} {}", a[k].val(), b[k].val());
        }
        let d = crate::fieldcalc::exterior_d(&b);
        assert!(d.val().abs() < 1e-6, "dη = {}", d.val());
    }

    #[test]
    fn flux_matches_c_invariant_and_swept_area() {
        let s = Surface::standard();
        let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
        let vf = field(&s, [0.3, 0.0, -0.2, 0.1]);
        let psi = Arc::new(FlowMap::new(vf.clone()));
        let fl = flux(&*vf, &s.loops, quick()).unwrap();
        let c = c_invariant(psi.clone(), h.clone(), h, &s.loops).unwrap();
        assert!(fl.reduce().approx_eq(&c, 1e-5), "{:?} {:?}", fl, c);
        let sw = swept_flux(&IdentityMap, &*psi, &s.loops, 16, 8);
        assert!(sw.sub(&fl).max_abs() < 1e-5, "{:?} {:?}", sw, fl);
    }

    #[test]
    fn non_lattice_periods_obstruct() {
        let s = Surface::standard();
        let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
        let psi = FlowMap::new(field(&s, [0.3, 0.0, -0.2, 0.1]));
        let eta = Arc::new(Eta::new(Arc::new(PolarSection::new(Arc::new(psi), h.clone(), h))));
        assert!(matches!(trivializing_angle(&s, eta), Err(Error::Obstruction { .. })));
    }

    #[test]
    fn trivializing_rotation_kills_eta() {
        let s = Surface::standard();
        let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
        let two_pi = 2.0 * std::f64::consts::PI;
        let hb = Arc::new(crate::harmonic::HarmonicBasis::new(&s).unwrap());
        let u = crate::harmonic::HarmonicPotential::new(hb, [two_pi, 0.0, 0.0, 0.0]);
        let psi = FlowMap::new(Arc::new(SymplecticField::autonomous(Arc::new(u))));
        let sec: Arc<dyn Section> = Arc::new(PolarSection::new(Arc::new(psi), h.clone(), h));
        let eta = Arc::new(Eta::new(sec.clone()));
        let theta = Arc::new(trivializing_angle(&s, eta).unwrap());
        let rotated = Arc::new(rotate_section(sec, theta.clone()));
        let z = CJet::local(Complex64::new(0.15, 0.95), 1);
        let e = eta_hodge(&Section::eval(&*rotated, &z));
        assert!(e[0].val().abs() < 1e-6 && e[1].val().abs() < 1e-6, "{:?}", e);
        let zs = [Complex64::new(0.15, 0.95), Complex64::new(-0.3, 0.6)];
        assert!(sup_codazzi(&*rotated, &zs) < 1e-4);
        let g = &s.group.generators[1];
        let zz = Complex64::new(0.15, 0.95);
        let jump = theta.value(g.apply(zz)) - theta.value(zz);
        assert!((jump - theta.periods()[1]).abs() < 1e-9, "{jump}");
    }

    #[test]
    fn rotation_shifts_eta_by_minus_dtheta() {
        let s = Surface::standard();
        let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
        let psi = FlowMap::new(field(&s, [0.3, 0.0, -0.2, 0.1]));
        let base: Arc<dyn Section> = Arc::new(PolarSection::new(Arc::new(psi), h.clone(), h));
        let theta: Arc<dyn ScalarField> =
            Arc::new(BumpSum::new(&s, &[(Complex64::new(0.1, 0.8), 0.8, 1.3)]));
        let rotated = rotate_section(base.clone(), theta.clone());
        let z = CJet::local(Complex64::new(-0.2, 0.9), 2);
        let e0 = eta_hodge(&base.eval(&z));
        let e1 = eta_hodge(&Section::eval(&rotated, &z));
        let dt = theta.eval(&z);
        assert!((e1[0].val() - e0[0].val() + dt.dx()).abs() < 1e-8);
        assert!((e1[1].val() - e0[1].val() + dt.dy()).abs() < 1e-8);
    }

    #[test]
    fn polar_section_is_not_codazzi_when_eta_is_nonzero() {
        let s = Surface::standard();
        let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
        let psi = FlowMap::new(field(&s, [0.3, 0.0, -0.2, 0.1]));
        let sec = Arc::new(PolarSection::new(Arc::new(psi), h.clone(), h));
        let zs = crate::harmonic::domain_samples(2, 2);
        let eta = Eta::new(sec.clone());
        assert!(sup_eta(&eta, &zs) > 1e-2);
        assert!(sup_codazzi(&*sec, &zs) > 1e-2);
    }

    #[test]
    fn infinitesimal_formula_holds() {
        let s = Surface::standard();
        let r = infinitesimal_formula(field(&s, [0.3, 0.0, -0.2, 0.1]), &s.loops, 1e-3).unwrap();
        assert!(r.relative_error() < 1e-3, "{r:?}");
    }

    #[test]
    fn hodge_identity_holds() {
        let s = Surface::standard();
        for z in [Complex64::new(0.1, 0.9), Complex64::new(-0.4, 0.7)] {
            let r = hodge_identity_residual(field(&s, [0.3, 0.0, -0.2, 0.1]), z, 1e-4);
            assert!(r.abs() < 1e-3, "{r}");
        }
    }

    #[test]
    fn rotating_by_a_winding_angle_shifts_periods_by_the_lattice() {
        let s = Surface::standard();
        let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());
        let psi = FlowMap::new(field(&s, [0.3, 0.0, -0.2, 0.1]));
        let base: Arc<dyn Section> = Arc::new(PolarSection::new(Arc::new(psi), h.clone(), h));
        let two_pi = 2.0 * std::f64::consts::PI;
        let theta = Arc::new(ClassPotential::new(&s, [two_pi, 0.0, 0.0, -two_pi]));
        let d = section_ambiguity(base, theta, &s.loops).unwrap();
        assert!(lattice_defect(&d) < 1e-3, "{d:?}");
        assert!((d.periods[0] + two_pi).abs() < 1e-3 && (d.periods[3] - two_pi).abs() < 1e-3, "{d:?}");
    }
}

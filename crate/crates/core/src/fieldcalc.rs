//! Tensor fields on the surface, evaluated in the upper half-plane chart on
//! jets, with the Levi-Civita calculus built on top: Christoffel symbols,
//! connection forms, exterior covariant derivatives, Hodge duals, area forms
//! and periods.
//!
//! Fixed conventions: `J_h` is the counterclockwise quarter turn of `h`, and
//! `Ω_h(u, v) = h(J_h u, v)`, so `Ω_h = √det h · dx∧dy`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fuchsian::{LoopBasis, Surface};
use crate::jet::{CJet, Jet, MAX_ORDER};
use crate::lie2::MoebiusElt;
use crate::mat::{JMat2, JVec2, Mat2};

/// Periods of a closed 1-form over the loops `(a₁, b₁, a₂, b₂)`.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CohClass {
    pub periods: [f64; 4],
}

impl CohClass {
    pub fn new(periods: [f64; 4]) -> Self {
        CohClass { periods }
    }

    pub fn add(&self, o: &CohClass) -> CohClass {
        CohClass { periods: std::array::from_fn(|i| self.periods[i] + o.periods[i]) }
    }

    pub fn sub(&self, o: &CohClass) -> CohClass {
        CohClass { periods: std::array::from_fn(|i| self.periods[i] - o.periods[i]) }
    }

    pub fn scale(&self, s: f64) -> CohClass {
        CohClass { periods: self.periods.map(|p| p * s) }
    }

    pub fn max_abs(&self) -> f64 {
        self.periods.iter().fold(0.0f64, |a, p| a.max(p.abs()))
    }

    pub fn reduce(&self) -> CohClassMod2Pi {
        CohClassMod2Pi::new(self.periods)
    }
}

/// Periods reduced componentwise into `[0, 2π)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CohClassMod2Pi {
    pub periods: [f64; 4],
}

/// Wraparound-aware distance on the circle of length 2π.
pub fn circle_dist(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(2.0 * PI);
    d.min(2.0 * PI - d)
}

impl CohClassMod2Pi {
    pub fn new(periods: [f64; 4]) -> Self {
        CohClassMod2Pi { periods: periods.map(|p| p.rem_euclid(2.0 * PI)) }
    }

    pub fn dist(&self, o: &CohClassMod2Pi) -> f64 {
        (0..4).map(|i| circle_dist(self.periods[i], o.periods[i])).fold(0.0, f64::max)
    }

    pub fn approx_eq(&self, o: &CohClassMod2Pi, tol: f64) -> bool {
        self.dist(o) <= tol
    }
}

/// Transformation rule of a field under the deck group.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FieldKind {
    Scalar,
    Vector,
    OneForm,
    Endomorphism,
}

/// A smooth map of the half-plane, evaluated on jets so that derivatives
/// are transported through compositions.
pub trait PlaneMap: Send + Sync {
    fn map_jet(&self, z: &CJet) -> CJet;

    fn apply(&self, z: Complex64) -> Complex64 {
        self.map_jet(&CJet::local(z, 0)).value()
    }

    /// Real Jacobian at `z`.
    fn jacobian(&self, z: Complex64) -> Mat2 {
        let w = self.map_jet(&CJet::local(z, 1));
        Mat2::new(w.re.dx(), w.re.dy(), w.im.dx(), w.im.dy())
    }
}

pub struct IdentityMap;

impl PlaneMap for IdentityMap {
    fn map_jet(&self, z: &CJet) -> CJet {
        *z
    }
}

impl PlaneMap for MoebiusElt {
    fn map_jet(&self, z: &CJet) -> CJet {
        self.apply_jet(z)
    }
}

/// `maps[n-1] ∘ ⋯ ∘ maps[0]`.
pub struct Composition {
    pub maps: Vec<Arc<dyn PlaneMap>>,
}

impl PlaneMap for Composition {
    fn map_jet(&self, z: &CJet) -> CJet {
        self.maps.iter().fold(*z, |w, m| m.map_jet(&w))
    }
}

/// Jacobian matrix of a jet point with respect to its own variables.
pub fn jet_jacobian(w: &CJet) -> JMat2 {
    JMat2::new(w.re.partial_x(), w.re.partial_y(), w.im.partial_x(), w.im.partial_y())
}

/// Local coordinates about the value of `z`, one order higher than needed
/// for an output of order `out` after one differentiation.
pub fn local_for(z: &CJet) -> (CJet, u8) {
    let out = z.order().min(MAX_ORDER - 1);
    (CJet::local(z.value(), out + 1), out)
}

/// Re-expresses a jet in local coordinates about `z.value()` in the
/// variables of `z`.
pub fn pull(z: &CJet, local: &Jet, out: u8) -> Jet {
    z.pullback(&local.truncate(out))
}

pub fn pull_vec(z: &CJet, v: &JVec2, out: u8) -> JVec2 {
    [pull(z, &v[0], out), pull(z, &v[1], out)]
}

pub fn pull_mat(z: &CJet, m: &JMat2, out: u8) -> JMat2 {
    m.map(|e| pull(z, e, out))
}

// ---------------------------------------------------------------------------
// Field traits

pub trait ScalarField: Send + Sync {
    /// Value as a jet in the variables of `z`.
    fn eval(&self, z: &CJet) -> Jet;

    /// Periods `f(g·z) − f(z)` over the basis loops; zero when invariant.
    fn periods(&self) -> [f64; 4] {
        [0.0; 4]
    }
}

pub trait OneFormField: Send + Sync {
    /// Components `(α_x, α_y)`; the order may be lower than that of `z`.
    fn eval(&self, z: &CJet) -> JVec2;
}

pub trait EndoField: Send + Sync {
    fn eval(&self, z: &CJet) -> JMat2;
}

/// Time-dependent vector field.
pub trait VectorField: Send + Sync {
    fn eval(&self, t: f64, z: &CJet) -> JVec2;

    fn value(&self, t: f64, z: Complex64) -> [f64; 2] {
        let v = self.eval(t, &CJet::local(z, 0));
        [v[0].val(), v[1].val()]
    }
}

pub trait MetricField: Send + Sync {
    /// Components `G_ij` at the jet point `z`.
    fn eval(&self, z: &CJet) -> JMat2;

    fn name(&self) -> &str;

    /// A map `f` with this metric equal to `f*h`, `h` the hyperbolic metric,
    /// when one is known.
    fn developing_map(&self) -> Option<Arc<dyn PlaneMap>> {
        None
    }
}

impl ScalarField for crate::orbit::BumpSum {
    fn eval(&self, z: &CJet) -> Jet {
        crate::orbit::BumpSum::eval(self, z)
    }
}

impl ScalarField for crate::orbit::ClassPotential {
    fn eval(&self, z: &CJet) -> Jet {
        crate::orbit::ClassPotential::eval(self, z)
    }

    fn periods(&self) -> [f64; 4] {
        crate::orbit::ClassPotential::periods(self)
    }
}

/// Linear combination of scalar fields.
pub struct ScalarSum {
    pub terms: Vec<(f64, Arc<dyn ScalarField>)>,
}

impl ScalarField for ScalarSum {
    fn eval(&self, z: &CJet) -> Jet {
        let mut out = Jet::constant(0.0).truncate(z.order());
        for (c, f) in &self.terms {
            out += f.eval(z) * *c;
        }
        out
    }

    fn periods(&self) -> [f64; 4] {
        let mut p = [0.0; 4];
        for (c, f) in &self.terms {
            let q = f.periods();
            for i in 0..4 {
                p[i] += c * q[i];
            }
        }
        p
    }
}

/// Differential `df` of a scalar field.
pub struct Differential(pub Arc<dyn ScalarField>);

impl OneFormField for Differential {
    fn eval(&self, z: &CJet) -> JVec2 {
        let (loc, out) = local_for(z);
        let f = self.0.eval(&loc);
        pull_vec(z, &[f.partial_x(), f.partial_y()], out)
    }
}

// ---------------------------------------------------------------------------
// Metrics

/// The hyperbolic metric `|dz|²/Im(z)²`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Hyperbolic;

pub fn hyperbolic_metric() -> Hyperbolic {
    Hyperbolic
}

impl MetricField for Hyperbolic {
    fn eval(&self, z: &CJet) -> JMat2 {
        let r = z.im.square().recip();
        JMat2::scalar(r)
    }

    fn name(&self) -> &str {
        "h"
    }

    fn developing_map(&self) -> Option<Arc<dyn PlaneMap>> {
        Some(Arc::new(IdentityMap))
    }
}

/// Pullback `f*g` of a metric by a map.
pub struct PullbackMetric {
    pub map: Arc<dyn PlaneMap>,
    pub base: Arc<dyn MetricField>,
    pub label: String,
}

impl MetricField for PullbackMetric {
    fn eval(&self, z: &CJet) -> JMat2 {
        let (loc, out) = local_for(z);
        let w = self.map.map_jet(&loc);
        let d = jet_jacobian(&w);
        let g = self.base.eval(&w).truncate(out);
        pull_mat(z, &(d.transpose() * g * d), out)
    }

    fn name(&self) -> &str {
        &self.label
    }

    fn developing_map(&self) -> Option<Arc<dyn PlaneMap>> {
        let d = self.base.developing_map()?;
        Some(Arc::new(Composition { maps: vec![self.map.clone(), d] }))
    }
}

// ---------------------------------------------------------------------------
// Pointwise Riemannian calculus on jets

/// Christoffel symbols `Γ[k][i][j]` of a metric jet; one order lower.
pub fn christoffel(g: &JMat2) -> [[[Jet; 2]; 2]; 2] {
    let o = g.order() - 1;
    let dg = [g.partial_x(), g.partial_y()];
    let gi = g.truncate(o).inverse();
    let mut out = [[[Jet::zero(); 2]; 2]; 2];
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut s = Jet::constant(0.0).truncate(o);
                for l in 0..2 {
                    let t = dg[i].m[l][j] + dg[j].m[l][i] - dg[l].m[i][j];
                    s += gi.m[k][l] * t;
                }
                out[k][i][j] = s * 0.5;
            }
        }
    }
    out
}

/// `∇_{∂_i} W` for a vector field jet `W` (one order lower).
pub fn covariant_derivative(gamma: &[[[Jet; 2]; 2]; 2], w: &JVec2, i: usize) -> JVec2 {
    let dw = if i == 0 { [w[0].partial_x(), w[1].partial_x()] } else { [w[0].partial_y(), w[1].partial_y()] };
    let o = dw[0].order().min(gamma[0][0][0].order());
    std::array::from_fn(|k| {
        let mut s = dw[k].truncate(o);
        for j in 0..2 {
            s += gamma[k][i][j] * w[j].truncate(o);
        }
        s
    })
}

/// `√det G`, the density of the area form.
pub fn area_density(g: &JMat2) -> Jet {
    g.det().sqrt()
}

/// Counterclockwise quarter turn of the metric `g`.
pub fn almost_complex(g: &JMat2) -> JMat2 {
    let r = area_density(g).recip();
    JMat2::new(-g.m[0][1] * r, -g.m[1][1] * r, g.m[0][0] * r, g.m[0][1] * r)
}

/// `Ω_g(u, v) = g(J u, v)`.
pub fn area_form(g: &JMat2, u: &JVec2, v: &JVec2) -> Jet {
    g.form(&almost_complex(g).apply(u), v)
}

/// Gradient of a scalar with derivative `df = (f_x, f_y)`.
pub fn grad(g: &JMat2, df: &JVec2) -> JVec2 {
    g.inverse().apply(df)
}

/// Divergence of a vector field jet (one order lower).
pub fn div(g: &JMat2, x: &JVec2) -> Jet {
    let s = area_density(g);
    let a = s * x[0];
    let b = s * x[1];
    (a.partial_x() + b.partial_y()) / s.truncate(a.order() - 1)
}

/// Rotation by angle `theta` in the metric `g`: `cos θ + sin θ J`.
pub fn rotation(g: &JMat2, theta: &Jet) -> JMat2 {
    let o = theta.order().min(g.order());
    let j = almost_complex(g).truncate(o);
    JMat2::scalar(theta.cos()) + j.scale(theta.sin())
}

/// Maximum deviation from orthonormality and positive orientation.
pub fn frame_residual(g: &Mat2, v1: [f64; 2], v2: [f64; 2]) -> f64 {
    let e11 = g.form(v1, v1) - 1.0;
    let e22 = g.form(v2, v2) - 1.0;
    let e12 = g.form(v1, v2);
    let orient = v1[0] * v2[1] - v1[1] * v2[0];
    let r = e11.abs().max(e22.abs()).max(e12.abs());
    if orient <= 0.0 {
        r.max(1.0)
    } else {
        r
    }
}

/// Connection form `ω(∂_i) = g(∇_{∂_i} v₁, v₂)` of an oriented orthonormal
/// frame; one order lower than the inputs.
pub fn connection_form(g: &JMat2, v1: &JVec2, v2: &JVec2) -> Result<JVec2> {
    let residual = frame_residual(
        &g.value(),
        [v1[0].val(), v1[1].val()],
        [v2[0].val(), v2[1].val()],
    );
    if residual > 1e-8 {
        return Err(Error::Frame { residual });
    }
    Ok(connection_form_unchecked(g, v1, v2))
}

pub fn connection_form_unchecked(g: &JMat2, v1: &JVec2, v2: &JVec2) -> JVec2 {
    let gamma = christoffel(g);
    std::array::from_fn(|i| {
        let d = covariant_derivative(&gamma, v1, i);
        let o = d[0].order();
        g.truncate(o).form(&d, &[v2[0].truncate(o), v2[1].truncate(o)])
    })
}

/// `d∇b(∂_x, ∂_y) = ∇_x(b ∂_y) − ∇_y(b ∂_x)`, one order lower.
pub fn dnabla(g: &JMat2, b: &JMat2) -> JVec2 {
    let gamma = christoffel(g);
    let bx = b.column(0);
    let by = b.column(1);
    let a = covariant_derivative(&gamma, &by, 0);
    let c = covariant_derivative(&gamma, &bx, 1);
    [a[0] - c[0], a[1] - c[1]]
}

/// Hodge dual `⋆d∇b = d∇b(v₁, v₂)` for any oriented orthonormal frame, which
/// equals `d∇b(∂_x, ∂_y) / √det G`.
pub fn hodge_dual_dnabla(g: &JMat2, b: &JMat2) -> JVec2 {
    let d = dnabla(g, b);
    let r = area_density(g).truncate(d[0].order()).recip();
    [d[0] * r, d[1] * r]
}

/// `h`-norm of a vector.
pub fn norm(g: &Mat2, v: [f64; 2]) -> f64 {
    g.form(v, v).sqrt()
}

/// `h`-norm of a 1-form `α`: `√(α G⁻¹ αᵀ)`.
pub fn covector_norm(g: &Mat2, a: [f64; 2]) -> f64 {
    g.inverse().form(a, a).sqrt()
}

/// Exterior derivative `∂_x α_y − ∂_y α_x` of a 1-form jet (one order lower).
pub fn exterior_d(a: &JVec2) -> Jet {
    a[1].partial_x() - a[0].partial_y()
}

/// Jet of a function whose differential is the given 1-form jet and whose
/// value is `value`; the 1-form is assumed closed to its order.
pub fn integrate_closed(value: f64, a: &JVec2) -> Jet {
    let o = a[0].order().min(a[1].order()) + 1;
    let mut c = [0.0; 15];
    c[0] = value;
    for d in 1..=o as usize {
        for j in 0..=d {
            let i = d - j;
            let k = crate::jet::idx(i, j);
            c[k] = if i >= 1 {
                a[0].coeff(i - 1, j) / i as f64
            } else {
                a[1].coeff(i, j - 1) / j as f64
            };
        }
    }
    Jet::from_coeffs(c, o)
}

/// Gauss curvature by Brioschi's formula from a metric jet of order ≥ 2.
pub fn gauss_curvature(g: &JMat2) -> f64 {
    use nalgebra::Matrix3;
    let (e, f, gg) = (&g.m[0][0], &g.m[0][1], &g.m[1][1]);
    let (ev, fv, gv) = (e.val(), f.val(), gg.val());
    let m1 = Matrix3::new(
        -0.5 * e.dyy() + f.dxy() - 0.5 * gg.dxx(), 0.5 * e.dx(), f.dx() - 0.5 * e.dy(),
        f.dy() - 0.5 * gg.dx(), ev, fv,
        0.5 * gg.dy(), fv, gv,
    );
    let m2 = Matrix3::new(
        0.0, 0.5 * e.dy(), 0.5 * gg.dx(),
        0.5 * e.dy(), ev, fv,
        0.5 * gg.dx(), fv, gv,
    );
    (m1.determinant() - m2.determinant()) / (ev * gv - fv * fv).powi(2)
}

/// Connection form values at `z` for the frame `v₁ = ∂_x/|∂_x|`, `v₂ = J v₁`.
pub fn canonical_connection_form(h: &dyn MetricField, z: Complex64) -> [f64; 2] {
    let g = h.eval(&CJet::local(z, 1));
    let v1 = [g.m[0][0].sqrt().recip(), Jet::constant(0.0).truncate(1)];
    let v2 = almost_complex(&g).apply(&v1);
    let w = connection_form_unchecked(&g, &v1, &v2);
    [w[0].val(), w[1].val()]
}

/// `dω` of the canonical frame by central differences of step `eps`,
/// expressed against `Ω_h`: the ratio `dω / Ω_h` at `z`.
pub fn curvature_ratio_fd(h: &dyn MetricField, z: Complex64, eps: f64) -> f64 {
    let w = |dx: f64, dy: f64| canonical_connection_form(h, z + Complex64::new(dx, dy));
    let d_wy_dx = (w(eps, 0.0)[1] - w(-eps, 0.0)[1]) / (2.0 * eps);
    let d_wx_dy = (w(0.0, eps)[0] - w(0.0, -eps)[0]) / (2.0 * eps);
    let density = h.eval(&CJet::local(z, 0)).value().det().sqrt();
    (d_wy_dx - d_wx_dy) / density
}

/// Residuals of the structure equation for the canonical frame over sample
/// points: `sup |dω/Ω_h + K|` (the identity `dω = −K Ω_h`, `K` from Brioschi)
/// and `sup |dω/Ω_h + 1|` (the form `dω = −Ω_h`).
#[derive(Clone, Copy, Debug)]
pub struct StructureResidual {
    pub eps: f64,
    pub residual: f64,
    pub literal_residual: f64,
    pub curvature: f64,
}

pub fn structure_equation_residual(h: &dyn MetricField, points: &[Complex64], eps: f64) -> StructureResidual {
    let mut out = StructureResidual { eps, residual: 0.0, literal_residual: 0.0, curvature: 0.0 };
    for &z in points {
        let ratio = curvature_ratio_fd(h, z, eps);
        let k = gauss_curvature(&h.eval(&CJet::local(z, 2)));
        out.residual = out.residual.max((ratio + k).abs());
        out.literal_residual = out.literal_residual.max((ratio + 1.0).abs());
        out.curvature = k;
    }
    out
}

/// Observed order `log₂(r(ε)/r(ε/2))` between consecutive residuals.
pub fn observed_order(coarse: f64, fine: f64) -> f64 {
    (coarse / fine).log2()
}

// ---------------------------------------------------------------------------
// Line integrals

/// `∫_γ α` along a piecewise geodesic loop, with `panels × nodes` Gauss
/// points per geodesic piece.
pub fn line_integral(
    form: &dyn OneFormField,
    nodes_path: &[Complex64],
    panels: usize,
    nodes: usize,
) -> Result<f64> {
    let rule = crate::quad::composite(0.0, 1.0, panels, nodes);
    let mut total = 0.0;
    for w in nodes_path.windows(2) {
        let arc = crate::hyperbolic::GeodesicArc::new(w[0], w[1]);
        for &(s, wt) in &rule {
            let (z, v) = arc.at(s);
            let a = form.eval(&CJet::local(z, 0));
            let val = a[0].val() * v.re + a[1].val() * v.im;
            if !val.is_finite() {
                return Err(Error::NumericOverflow(format!("1-form not finite at {z}")));
            }
            total += wt * val;
        }
    }
    Ok(total)
}

/// Adaptive version of [`line_integral`] with absolute tolerance `tol` per
/// geodesic piece; also returns the number of evaluations.
pub fn line_integral_adaptive(
    form: &dyn OneFormField,
    nodes_path: &[Complex64],
    tol: f64,
) -> Result<(f64, usize)> {
    let mut total = 0.0;
    let mut evals = 0;
    let mut bad = None;
    for w in nodes_path.windows(2) {
        let arc = crate::hyperbolic::GeodesicArc::new(w[0], w[1]);
        let mut f = |s: f64| {
            let (z, v) = arc.at(s);
            let a = form.eval(&CJet::local(z, 0));
            let val = a[0].val() * v.re + a[1].val() * v.im;
            if !val.is_finite() {
                bad = Some(z);
                return 0.0;
            }
            val
        };
        let (v, n) = crate::quad::adaptive(&mut f, 0.0, 1.0, PERIOD_NODES, tol, 16);
        total += v;
        evals += n;
    }
    if let Some(z) = bad {
        return Err(Error::NumericOverflow(format!("1-form not finite at {z}")));
    }
    Ok((total, evals))
}

pub fn period_adaptive(form: &dyn OneFormField, loops: &LoopBasis, tol: f64) -> Result<CohClass> {
    let mut p = [0.0; 4];
    for (k, l) in loops.loops.iter().enumerate().take(4) {
        p[k] = line_integral_adaptive(form, &l.nodes, tol)?.0;
    }
    Ok(CohClass::new(p))
}

/// Default quadrature for periods.
pub const PERIOD_PANELS: usize = 4;
pub const PERIOD_NODES: usize = 8;

pub fn period(form: &dyn OneFormField, loops: &LoopBasis) -> Result<CohClass> {
    period_with(form, loops, PERIOD_PANELS, PERIOD_NODES)
}

pub fn period_with(
    form: &dyn OneFormField,
    loops: &LoopBasis,
    panels: usize,
    nodes: usize,
) -> Result<CohClass> {
    let mut p = [0.0; 4];
    for (k, l) in loops.loops.iter().enumerate().take(4) {
        p[k] = line_integral(form, &l.nodes, panels, nodes)?;
    }
    Ok(CohClass::new(p))
}

/// Sum of two 1-form fields.
pub struct FormSum(pub Vec<(f64, Arc<dyn OneFormField>)>);

impl OneFormField for FormSum {
    fn eval(&self, z: &CJet) -> JVec2 {
        let mut acc: Option<JVec2> = None;
        for (c, f) in &self.0 {
            let v = f.eval(z);
            let v = [v[0] * *c, v[1] * *c];
            acc = Some(match acc {
                None => v,
                Some(a) => [a[0] + v[0], a[1] + v[1]],
            });
        }
        acc.unwrap_or([Jet::zero(), Jet::zero()])
    }
}

// ---------------------------------------------------------------------------
// Equivariance checks

/// Residual of the transformation rule of `kind` between values at `z` and
/// `g·z`, for a field given by `eval` (values as 2×2 matrices; scalars in
/// entry (0,0), vectors and forms in the first column).
pub fn equivariance_residual(
    kind: FieldKind,
    g: &MoebiusElt,
    z: Complex64,
    eval: &dyn Fn(Complex64) -> Mat2,
    period_shift: f64,
) -> f64 {
    let a = eval(z);
    let b = eval(g.apply(z));
    let d = g.jacobian(z);
    let expect = match kind {
        FieldKind::Scalar => a + Mat2::new(period_shift, 0.0, 0.0, 0.0),
        FieldKind::Vector => d * a,
        FieldKind::OneForm => {
            // α(gz) = α(z) Dg⁻¹ as row vectors; stored as a column.
            let row = Mat2::new(a.m[0][0], a.m[1][0], 0.0, 0.0) * d.inverse();
            Mat2::new(row.m[0][0], 0.0, row.m[0][1], 0.0)
        }
        FieldKind::Endomorphism => d * a * d.inverse(),
    };
    (b - expect).max_abs()
}

/// Convenience: the standard surface with its loops refined once.
pub fn standard_loops(surface: &Surface) -> LoopBasis {
    surface.loops.clone()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn at(z: Complex64, order: u8) -> CJet {
        CJet::local(z, order)
    }

    #[test]
    fn hyperbolic_metric_examples() {
        let h = Hyperbolic;
        let g = h.eval(&at(Complex64::new(0.0, 1.0), 2)).value();
        assert_eq!(g, Mat2::IDENTITY);
        let g = h.eval(&at(Complex64::new(0.0, 2.0), 2)).value();
        assert!((g - Mat2::scalar(0.25)).max_abs() < 1e-16);
    }

    #[test]
    fn complex_structure_squares_to_minus_one() {
        let g = Hyperbolic.eval(&at(Complex64::new(0.4, 0.7), 1));
        let j = almost_complex(&g).value();
        assert!((j * j + Mat2::IDENTITY).max_abs() < 1e-14);
        let y = 0.7;
        let v1 = [Jet::constant(y), Jet::zero()];
        let v2 = [Jet::zero(), Jet::constant(y)];
        assert!((area_form(&g, &v1, &v2).val() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn integrate_closed_inverts_differential() {
        let z = at(Complex64::new(0.3, 1.1), 4);
        let f = (z.re * z.im).sin() + z.im.ln();
        let df = [f.partial_x(), f.partial_y()];
        let back = integrate_closed(f.val(), &df);
        for i in 0..15 {
            assert!((back.coeffs()[i] - f.coeffs()[i]).abs() < 1e-13);
        }
    }

    #[test]
    fn mod_two_pi_distance_wraps() {
        let a = CohClass::new([0.01, 2.0 * PI - 0.01, 1.0, 3.0]).reduce();
        let b = CohClass::new([2.0 * PI - 0.01, 0.01, 1.0 + 2.0 * PI, -2.0 * PI + 3.0]).reduce();
        assert!(a.dist(&b) < 0.02 + 1e-12);
    }

    struct RoundSphere;

    impl MetricField for RoundSphere {
        fn eval(&self, z: &CJet) -> JMat2 {
            JMat2::scalar((z.norm_sqr() + 1.0).square().recip() * 4.0)
        }

        fn name(&self) -> &str {
            "sphere"
        }
    }

    #[test]
    fn structure_equation_follows_curvature() {
        let pts: Vec<Complex64> =
            [(0.3, 0.8), (-0.4, 1.7), (1.1, 0.5)].iter().map(|&(x, y)| Complex64::new(x, y)).collect();
        let r = structure_equation_residual(&Hyperbolic, &pts, 1e-4);
        assert!((r.curvature + 1.0).abs() < 1e-12);
        assert!(r.residual < 1e-6, "{r:?}");
        assert!((r.literal_residual - 2.0).abs() < 1e-6);
        let coarse = structure_equation_residual(&Hyperbolic, &pts, 2e-2).residual;
        let fine = structure_equation_residual(&Hyperbolic, &pts, 1e-2).residual;
        assert!(observed_order(coarse, fine) > 1.9);
        // On the unit sphere the two forms coincide.
        let s = structure_equation_residual(&RoundSphere, &pts, 1e-4);
        assert!((s.curvature - 1.0).abs() < 1e-10);
        assert!(s.residual < 1e-6 && s.literal_residual < 1e-6, "{s:?}");
    }
}

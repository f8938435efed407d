//! Equivariant surfaces in AdS³ = PSL(2,ℝ) reconstructed from a map and a
//! section, their induced geometry, Gauss map and the tensor `b̃`.
//!
//! Points of AdS³ are determinant-one matrices, tangent vectors are
//! left-trivialized into traceless matrices, and the metric is
//! `⟨u, v⟩ = ½ tr(uv)`. The map `φ` is always taken in developed form, so
//! both hyperbolic metrics are the standard one in the half-plane chart.

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fieldcalc::{
    almost_complex, dnabla, gauss_curvature, hyperbolic_metric, jet_jacobian, norm, pull, EndoField, MetricField,
    PlaneMap,
};
use crate::fuchsian::FuchsianGroup;
use crate::jet::{CJet, Jet};
use crate::lie2::{h2_dist, MoebiusElt, Sl2Vec, TimelikeGeodesic, H2Point};
use crate::mat::{JMat2, Mat2};
use crate::symplect::Section;

/// Tolerance of the frame check in the reconstruction.
pub const FRAME_TOL: f64 = 1e-7;
/// Smallest eigenvalue of `h⁻¹ I` below which a point counts as singular.
pub const IMMERSION_TOL: f64 = 1e-6;
pub const NEWTON_MAX_ITER: usize = 50;
pub const NEWTON_TOL: f64 = 1e-12;
/// Step of the central differences in [`AdSImmersion::induced_geometry`].
pub const FD_STEP: f64 = 1e-4;

/// `σ_{φ,b}`: `σ(x)` is the isometry with `σ(φ(x)) = x` and
/// `dσ_{φ(x)} ∘ dφ_x = −b_x`.
pub struct AdSImmersion {
    pub phi: Arc<dyn PlaneMap>,
    pub section: Arc<dyn Section>,
    pub rho_l: Arc<FuchsianGroup>,
    pub rho_r: Arc<FuchsianGroup>,
}

pub fn reconstruct_sigma(
    phi: Arc<dyn PlaneMap>,
    section: Arc<dyn Section>,
    rho_l: Arc<FuchsianGroup>,
    rho_r: Arc<FuchsianGroup>,
) -> AdSImmersion {
    AdSImmersion { phi, section, rho_l, rho_r }
}

fn jconst(v: f64, order: u8) -> Jet {
    Jet::constant(v).truncate(order)
}

/// `½ tr(uv)` on jet matrices.
fn jinner(u: &JMat2, v: &JMat2) -> Jet {
    (u.m[0][0] * v.m[0][0] + u.m[0][1] * v.m[1][0] + u.m[1][0] * v.m[0][1] + u.m[1][1] * v.m[1][1]) * 0.5
}

fn bracket(u: &JMat2, v: &JMat2) -> JMat2 {
    *u * *v - *v * *u
}

fn sl2(m: &Mat2) -> Sl2Vec {
    Sl2Vec::from_mat(*m)
}

/// Inverse of a determinant-one matrix.
fn sl_inverse(m: &JMat2) -> JMat2 {
    JMat2::new(m.m[1][1], -m.m[0][1], -m.m[1][0], m.m[0][0])
}

/// Applies the Möbius map with jet entries to a jet point.
fn moebius_jet(g: &JMat2, z: &CJet) -> CJet {
    let [[a, b], [c, d]] = g.m;
    let num = CJet::new(a * z.re + b, a * z.im);
    let den = CJet::new(c * z.re + d, c * z.im);
    num / den
}

/// Jets at a point of the local chart: `σ`, the frame `E_i = σ⁻¹∂_iσ`,
/// the induced metric, the unit normal and (order permitting) the shape
/// operator.
#[derive(Clone, Copy, Debug)]
pub struct GeometryJet {
    pub sigma: JMat2,
    pub frame: [JMat2; 2],
    pub metric: JMat2,
    pub normal: JMat2,
    /// `B` with `∇N = −dσ∘B`, in chart coordinates.
    pub shape: Option<JMat2>,
}

/// Pointwise data of the induced geometry.
#[derive(Clone, Copy, Debug)]
pub struct SurfaceGeometry {
    pub x: Complex64,
    pub sigma: MoebiusElt,
    pub metric: Mat2,
    pub normal: Sl2Vec,
    pub shape: Mat2,
    /// `K` of the induced metric (Brioschi).
    pub curvature: f64,
    /// `−1 − det B`, the value the Gauss equation predicts.
    pub gauss_equation: f64,
}

impl SurfaceGeometry {
    /// Residuals of `⟨N,N⟩ = −1` and `⟨N, E_i⟩ = 0` are zero by
    /// construction; this reports the `I`-self-adjointness of `B`.
    pub fn shape_asymmetry(&self) -> f64 {
        let ib = self.metric * self.shape;
        (ib.m[0][1] - ib.m[1][0]).abs() / self.metric.max_abs()
    }

    pub fn mean_curvature(&self) -> f64 {
        self.shape.trace()
    }
}

impl AdSImmersion {
    /// `(Φ, DΦ, b)` at the local jet of the given order.
    fn frame_data(&self, x0: Complex64, order: u8) -> Result<(CJet, JMat2, JMat2)> {
        let w = self.phi.map_jet(&CJet::local(x0, order + 1));
        let dphi = jet_jacobian(&w);
        let b = self.section.eval(&CJet::local(x0, order)).b;
        Ok((w.truncate(order), dphi, b))
    }

    /// `σ` as a jet in the local chart about `x0`.
    pub fn sigma_jet(&self, x0: Complex64, order: u8) -> Result<JMat2> {
        let (w, dphi, b) = self.frame_data(x0, order)?;
        let l = (b * dphi.inverse()).map(|j| -*j);
        let lv = l.value();
        // Conformal part λ and its mismatch.
        let conf = (lv.m[0][0] - lv.m[1][1]).abs().max((lv.m[0][1] + lv.m[1][0]).abs());
        let ratio = x0.im / w.im.val();
        let lam_re = (l.m[0][0] + l.m[1][1]) * 0.5;
        let lam_im = (l.m[1][0] - l.m[0][1]) * 0.5;
        let lam_abs = (lam_re * lam_re + lam_im * lam_im).sqrt();
        let residual = (conf + (lam_abs.val() - ratio).abs()) / ratio;
        if !(residual < FRAME_TOL) {
            return Err(Error::InvalidSection { residual });
        }
        let (ur, ui) = (lam_re / lam_abs, lam_im / lam_abs);
        // Half-angle cosine and sine, on the well-conditioned branch.
        let (c, s) = if ur.val() >= 0.0 {
            let c = ((ur + 1.0) * 0.5).sqrt();
            (c, ui / (c * 2.0))
        } else {
            let s = ((-ur + 1.0) * 0.5).sqrt();
            let s = if ui.val() < 0.0 { -s } else { s };
            (ui / (s * 2.0), s)
        };
        let rot = JMat2::new(c, s, -s, c);
        let x = CJet::local(x0, order);
        let sy = x.im.sqrt();
        let ax = JMat2::new(sy, x.re / sy, jconst(0.0, order), sy.recip());
        let sv = w.im.sqrt();
        let aw_inv = JMat2::new(sv.recip(), -(w.re / sv), jconst(0.0, order), sv);
        Ok(ax * rot * aw_inv)
    }

    pub fn sigma(&self, x: Complex64) -> Result<MoebiusElt> {
        MoebiusElt::try_from_mat(self.sigma_jet(x, 0)?.value())
    }

    /// `sup` over generators of the distance between `σ(g·x)` and
    /// `ρ_l(g) σ(x) ρ_r(g)⁻¹`.
    pub fn equivariance_residual(&self, x: Complex64) -> Result<f64> {
        let s = self.sigma(x)?;
        let mut worst: f64 = 0.0;
        for (gl, gr) in self.rho_l.generators.iter().zip(&self.rho_r.generators) {
            let a = self.sigma(gl.apply(x))?;
            let b = *gl * s * gr.inverse();
            worst = worst.max(a.dist(&b));
        }
        Ok(worst)
    }

    /// Jets of the induced geometry; `sigma_order ≥ 1`, and `≥ 2` for `B`.
    pub fn geometry_jet(&self, x0: Complex64, sigma_order: u8) -> Result<GeometryJet> {
        let sigma = self.sigma_jet(x0, sigma_order)?;
        let inv = sl_inverse(&sigma.truncate(sigma_order - 1));
        let frame = [inv * sigma.partial_x(), inv * sigma.partial_y()];
        let metric = JMat2::new(
            jinner(&frame[0], &frame[0]),
            jinner(&frame[0], &frame[1]),
            jinner(&frame[1], &frame[0]),
            jinner(&frame[1], &frame[1]),
        );
        let mv = metric.value();
        if !(mv.m[0][0] > 0.0 && mv.det() > 0.0) {
            return Err(Error::NotSpacelike { at: format!("{x0}") });
        }
        let n = bracket(&frame[0], &frame[1]);
        let nn = jinner(&n, &n);
        if !(nn.val() < 0.0) {
            return Err(Error::NormalNotTimelike { at: format!("{x0}") });
        }
        let mut scale = (-nn).sqrt().recip();
        if !sl2(&n.value()).scale(scale.val()).is_future() {
            scale = -scale;
        }
        let normal = n.scale(scale);
        let shape = if sigma_order >= 2 {
            let o = sigma_order - 2;
            let e = [frame[0].truncate(o), frame[1].truncate(o)];
            let nt = normal.truncate(o);
            let dn = [normal.partial_x(), normal.partial_y()];
            // ∇_i N = ∂_i N + ½[E_i, N] for left-trivialized fields.
            let cov: Vec<JMat2> =
                (0..2).map(|i| dn[i] + bracket(&e[i], &nt).map(|j| *j * 0.5)).collect();
            let m = JMat2::new(jinner(&cov[0], &e[0]), jinner(&cov[0], &e[1]), jinner(&cov[1], &e[0]), jinner(&cov[1], &e[1]));
            // ∇_i N = Σ_j β_ij E_j with β = M I⁻¹; B = −βᵀ.
            let beta = m * metric.truncate(o).inverse();
            Some(beta.transpose().map(|j| -*j))
        } else {
            None
        };
        Ok(GeometryJet { sigma, frame, metric, normal, shape })
    }

    /// `I`, `N`, `B` and `K` at a point. First derivatives of `I` are exact;
    /// second derivatives come from central differences of them with step
    /// [`FD_STEP`].
    pub fn induced_geometry(&self, x: Complex64) -> Result<SurfaceGeometry> {
        let g = self.geometry_jet(x, 2)?;
        let shape = g.shape.expect("order two").value();
        let d = |dz: Complex64| -> Result<JMat2> {
            let p = self.geometry_jet(x + dz * FD_STEP, 2)?.metric;
            let m = self.geometry_jet(x - dz * FD_STEP, 2)?.metric;
            Ok((p - m).map(|j| *j * (0.5 / FD_STEP)))
        };
        let (dx, dy) = (d(Complex64::new(1.0, 0.0))?, d(Complex64::new(0.0, 1.0))?);
        // Symmetrized mixed partials.
        let second = |i: usize, j: usize| {
            let m = &g.metric.m[i][j];
            let mut c = [0.0; 15];
            c[0] = m.val();
            c[1] = m.dx();
            c[2] = m.dy();
            c[3] = 0.5 * dx.m[i][j].dx();
            c[4] = 0.5 * (dx.m[i][j].dy() + dy.m[i][j].dx());
            c[5] = 0.5 * dy.m[i][j].dy();
            Jet::from_coeffs(c, 2)
        };
        let metric2 = JMat2::new(second(0, 0), second(0, 1), second(1, 0), second(1, 1));
        Ok(SurfaceGeometry {
            x,
            sigma: MoebiusElt::try_from_mat(g.sigma.value())?,
            metric: g.metric.value(),
            normal: sl2(&g.normal.value()),
            shape,
            curvature: gauss_curvature(&metric2),
            gauss_equation: -1.0 - shape.det(),
        })
    }

    /// `ι_Σ(σ(x)) = (σ(x)·y, y)` with `y` fixed by the normal direction,
    /// as jets of order `sigma_order − 1`.
    pub fn gauss_map_jet(&self, x0: Complex64, sigma_order: u8) -> Result<(CJet, CJet)> {
        let g = self.geometry_jet(x0, sigma_order)?;
        let u = g.normal;
        let det = u.det();
        if !(det.val() > 0.0) {
            return Err(Error::NotTimelike { det: det.val() });
        }
        let c = u.m[1][0];
        let cabs = if c.val() < 0.0 { -c } else { c };
        let right = CJet::new((u.m[0][0] - u.m[1][1]) / (c * 2.0), det.sqrt() / cabs);
        let left = moebius_jet(&g.sigma.truncate(sigma_order - 1), &right);
        Ok((left, right))
    }

    pub fn gauss_map(&self, x: Complex64) -> Result<GaussMapPoint> {
        let (l, r) = self.gauss_map_jet(x, 1)?;
        Ok(GaussMapPoint { x, left: l.value(), right: r.value() })
    }

    /// `⟨E_i, u⟩ / |E_i|` for the direction `u` of `L_{x,φ(x)}`.
    pub fn orthogonality_residual(&self, x: Complex64) -> Result<f64> {
        let g = self.geometry_jet(x, 1)?;
        let target = H2Point::new(self.phi.apply(x))?;
        let u = TimelikeGeodesic { x: H2Point::new(x)?, y: target }.direction();
        let u = JMat2::constant(u.matrix());
        let mut worst: f64 = 0.0;
        for e in &g.frame {
            let r = jinner(e, &u).val().abs() / jinner(e, e).val().abs().sqrt();
            worst = worst.max(r);
        }
        Ok(worst)
    }
}

/// One point of the Gauss map.
#[derive(Clone, Copy, Debug)]
pub struct GaussMapPoint {
    pub x: Complex64,
    pub left: Complex64,
    pub right: Complex64,
}

/// `φ_Σ = (π_r∘ι_Σ) ∘ (π_l∘ι_Σ)⁻¹`, the left projection inverted by Newton's
/// method seeded at the identity. Jets up to first order.
pub struct ExtractedPhi {
    pub surface: Arc<AdSImmersion>,
}

pub fn extract_phi(surface: Arc<AdSImmersion>) -> ExtractedPhi {
    ExtractedPhi { surface }
}

impl ExtractedPhi {
    /// `(x, right(x), D right · D left⁻¹)` with `left(x) = p`.
    pub fn solve(&self, p: Complex64) -> Result<(Complex64, Complex64, Mat2)> {
        let mut x = p;
        for _ in 0..NEWTON_MAX_ITER {
            let (l, r) = self.surface.gauss_map_jet(x, 2)?;
            let jl = Mat2::new(l.re.dx(), l.re.dy(), l.im.dx(), l.im.dy());
            let f = l.value() - p;
            let step = jl.inverse().apply([f.re, f.im]);
            let next = x - Complex64::new(step[0], step[1]);
            if !(next.im > 0.0) || !next.re.is_finite() {
                break;
            }
            let done = (next - x).norm() <= NEWTON_TOL * x.im.max(1.0);
            x = next;
            if done {
                let (l, r) = if (l.value() - p).norm() > 1e-10 { self.surface.gauss_map_jet(x, 2)? } else { (l, r) };
                let jl = Mat2::new(l.re.dx(), l.re.dy(), l.im.dx(), l.im.dy());
                let jr = Mat2::new(r.re.dx(), r.re.dy(), r.im.dx(), r.im.dy());
                return Ok((x, r.value(), jr * jl.inverse()));
            }
        }
        Err(Error::ProjectionDegenerate { at: format!("{p}") })
    }
}

impl PlaneMap for ExtractedPhi {
    fn map_jet(&self, z: &CJet) -> CJet {
        let (_, w, d) = self.solve(z.value()).expect("left projection inverts");
        let o = z.order().min(1);
        let loc = |v: f64, a: f64, b: f64| {
            let mut c = [0.0; 15];
            c[0] = v;
            if o >= 1 {
                c[crate::jet::idx(1, 0)] = a;
                c[crate::jet::idx(0, 1)] = b;
            }
            Jet::from_coeffs(c, o)
        };
        CJet::new(
            pull(z, &loc(w.re, d.m[0][0], d.m[0][1]), o),
            pull(z, &loc(w.im, d.m[1][0], d.m[1][1]), o),
        )
    }
}

/// `b̃ = (id + J B)⁻¹ (id − J B)` with `J` the complex structure of `I`.
pub struct BTilde {
    pub surface: Arc<AdSImmersion>,
}

impl BTilde {
    /// `b̃` at a point.
    pub fn value_at(&self, x: Complex64) -> Result<Mat2> {
        let g = self.surface.geometry_jet(x, 2)?;
        let b = g.shape.expect("order two").value();
        let jb = almost_complex(&g.metric.truncate(0)).value() * b;
        let plus = Mat2::IDENTITY + jb;
        let det = plus.det();
        if det.abs() < 1e-8 {
            return Err(Error::TraceCondition { det });
        }
        Ok(plus.inverse() * (Mat2::IDENTITY - jb))
    }

    /// Jets up to first order; the derivatives are central differences
    /// with step [`FD_STEP`].
    pub fn eval_checked(&self, z: &CJet) -> Result<JMat2> {
        let x = z.value();
        let v = self.value_at(x)?;
        if z.order() == 0 {
            return Ok(JMat2::constant(v).truncate(0));
        }
        let diff = |dz: Complex64| -> Result<Mat2> {
            let p = self.value_at(x + dz * FD_STEP)?;
            let m = self.value_at(x - dz * FD_STEP)?;
            Ok((p - m).scale(0.5 / FD_STEP))
        };
        let (dx, dy) = (diff(Complex64::new(1.0, 0.0))?, diff(Complex64::new(0.0, 1.0))?);
        let entry = |i: usize, k: usize| {
            let mut c = [0.0; 15];
            c[0] = v.m[i][k];
            c[1] = dx.m[i][k];
            c[2] = dy.m[i][k];
            pull(z, &Jet::from_coeffs(c, 1), 1)
        };
        Ok(JMat2::new(entry(0, 0), entry(0, 1), entry(1, 0), entry(1, 1)))
    }
}

impl EndoField for BTilde {
    fn eval(&self, z: &CJet) -> JMat2 {
        self.eval_checked(z).expect("b-tilde is defined")
    }
}

/// `b̃⁻¹`, which is the tensor satisfying `φ_Σ*h_r = h_l(b̃⁻¹·, b̃⁻¹·)` in the
/// left-projection chart and agrees with the reconstruction datum.
pub struct BTildeInverse(pub BTilde);

impl EndoField for BTildeInverse {
    fn eval(&self, z: &CJet) -> JMat2 {
        self.0.eval(z).inverse()
    }
}

/// `sup |b̃ · b − id|` against the section used for the reconstruction.
pub fn btilde_discrepancy(s: Arc<AdSImmersion>, points: &[Complex64]) -> Result<f64> {
    let bt = BTilde { surface: s.clone() };
    let mut worst: f64 = 0.0;
    for &x in points {
        let b = s.section.eval(&CJet::local(x, 0)).b.value();
        worst = worst.max((bt.value_at(x)? * b - Mat2::IDENTITY).max_abs());
    }
    Ok(worst)
}

/// Residuals of the tensor-`b` conditions at sample points.
#[derive(Clone, Copy, Debug, Default, serde::Serialize)]
pub struct TensorReport {
    /// `|φ*h_r − h_l(b·,b·)|` relative to `|h_l|`.
    pub isometry: f64,
    pub det: f64,
    /// `|⋆d∇b|_h`.
    pub codazzi: f64,
    /// `min |tr b + 2|`.
    pub trace_margin: f64,
    /// `|h_l b − (h_l b)ᵀ|` relative to `|h_l|`.
    pub self_adjoint: f64,
}

impl TensorReport {
    pub fn tensor_b_passes(&self, tol: f64) -> bool {
        self.isometry < tol && self.det < tol && self.codazzi < tol && self.trace_margin > tol
    }

    pub fn minimal_lagrangian_passes(&self, tol: f64) -> bool {
        self.isometry < tol && self.det < tol && self.codazzi < tol && self.self_adjoint < tol
    }
}

pub fn verify_tensor_b(
    b: &dyn EndoField,
    phi: &dyn PlaneMap,
    h_l: &dyn MetricField,
    h_r: &dyn MetricField,
    points: &[Complex64],
) -> TensorReport {
    let mut r = TensorReport { trace_margin: f64::INFINITY, ..Default::default() };
    for &x in points {
        let z = CJet::local(x, 1);
        let g = h_l.eval(&z);
        let bj = b.eval(&z);
        let w = phi.map_jet(&z);
        let d = jet_jacobian(&w).value();
        let gp = d.transpose() * h_r.eval(&w.truncate(0)).value() * d;
        let gv = g.value();
        let bv = bj.value();
        r.isometry = r.isometry.max((gp - bv.transpose() * gv * bv).max_abs() / gv.max_abs());
        r.det = r.det.max((bv.det() - 1.0).abs());
        let c = dnabla(&g, &bj);
        let area = gv.det().sqrt();
        r.codazzi = r.codazzi.max(norm(&gv, [c[0].val() / area, c[1].val() / area]));
        r.trace_margin = r.trace_margin.min((bv.trace() + 2.0).abs());
        let gb = gv * bv;
        r.self_adjoint = r.self_adjoint.max((gb.m[0][1] - gb.m[1][0]).abs() / gv.max_abs());
    }
    r
}

pub fn verify_minimal_lagrangian(
    phi: &dyn PlaneMap,
    b_l: &dyn EndoField,
    h_l: &dyn MetricField,
    h_r: &dyn MetricField,
    points: &[Complex64],
) -> TensorReport {
    verify_tensor_b(b_l, phi, h_l, h_r, points)
}

/// Outcome of the immersion scan over sample points.
#[derive(Clone, Debug, Default, serde::Serialize)]
pub struct ImmersionScan {
    pub samples: usize,
    /// Points where `h⁻¹I` has an eigenvalue below [`IMMERSION_TOL`] or the
    /// induced metric is not Riemannian.
    pub singular: Vec<(f64, f64)>,
    /// Smallest eigenvalue of `h⁻¹ I` seen (negative when indefinite).
    pub min_eigenvalue: f64,
    pub max_curvature: f64,
    pub min_curvature: f64,
}

impl ImmersionScan {
    pub fn is_immersion(&self) -> bool {
        self.singular.is_empty()
    }
}

/// Scans `I` on the points; with `curvature` also records `K` (costlier).
pub fn immersion_scan(s: &AdSImmersion, points: &[Complex64], curvature: bool) -> Result<ImmersionScan> {
    let mut out = ImmersionScan {
        samples: points.len(),
        min_eigenvalue: f64::INFINITY,
        max_curvature: f64::NEG_INFINITY,
        min_curvature: f64::INFINITY,
        ..Default::default()
    };
    for &x in points {
        let sigma = s.sigma_jet(x, 1)?;
        let inv = sl_inverse(&sigma.truncate(0));
        let e = [inv * sigma.partial_x(), inv * sigma.partial_y()];
        let i = Mat2::new(
            jinner(&e[0], &e[0]).val(),
            jinner(&e[0], &e[1]).val(),
            jinner(&e[1], &e[0]).val(),
            jinner(&e[1], &e[1]).val(),
        );
        // h⁻¹ I with h = |dz|²/y².
        let a = i.scale(x.im * x.im);
        let half_tr = 0.5 * a.trace();
        let disc = (half_tr * half_tr - a.det()).max(0.0).sqrt();
        let min_eig = if half_tr >= 0.0 { a.det() / (half_tr + disc) } else { half_tr - disc };
        out.min_eigenvalue = out.min_eigenvalue.min(min_eig);
        if !(min_eig > IMMERSION_TOL) {
            out.singular.push((x.re, x.im));
            continue;
        }
        if curvature {
            let k = s.induced_geometry(x)?.curvature;
            out.max_curvature = out.max_curvature.max(k);
            out.min_curvature = out.min_curvature.min(k);
        }
    }
    Ok(out)
}

/// `sup` distance between the Gauss-map projections and `(x, φ(x))`.
pub fn gauss_map_round_trip(s: &AdSImmersion, points: &[Complex64]) -> Result<(f64, f64)> {
    let mut left: f64 = 0.0;
    let mut right: f64 = 0.0;
    for &x in points {
        let g = s.gauss_map(x)?;
        left = left.max(h2_dist(g.left, x));
        right = right.max(h2_dist(g.right, s.phi.apply(x)));
    }
    Ok((left, right))
}

/// `sup` distance between the extracted `φ_Σ` and `φ` at sample points.
pub fn extraction_error(s: Arc<AdSImmersion>, points: &[Complex64]) -> Result<f64> {
    let e = extract_phi(s.clone());
    let mut worst: f64 = 0.0;
    for &p in points {
        let (_, w, _) = e.solve(p)?;
        worst = worst.max(h2_dist(w, s.phi.apply(p)));
    }
    Ok(worst)
}

/// Writes `x, y, σ entries, K, tr B` per sample point; points where the
/// geometry fails are written with `NaN` geometry columns.
pub fn export_surface_csv(s: &AdSImmersion, points: &[Complex64], path: &std::path::Path) -> Result<()> {
    use std::io::Write;
    let mut f = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(f, "x,y,sigma_a,sigma_b,sigma_c,sigma_d,K,trB")?;
    for &x in points {
        match s.induced_geometry(x) {
            Ok(g) => {
                let [a, b, c, d] = g.sigma.entries();
                writeln!(f, "{},{},{a},{b},{c},{d},{},{}", x.re, x.im, g.curvature, g.mean_curvature())?;
            }
            Err(_) => writeln!(f, "{},{},NaN,NaN,NaN,NaN,NaN,NaN", x.re, x.im)?,
        }
    }
    Ok(())
}

/// The hyperbolic metric, shared by both sides in developed coordinates.
pub fn developed_metric() -> Arc<dyn MetricField> {
    Arc::new(hyperbolic_metric())
}

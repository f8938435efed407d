//! PSL(2,ℝ), its Lie algebra, the upper half-plane, and the anti-de Sitter
//! metric `⟨u, v⟩ = ½ tr(uv)` on sl(2,ℝ).
//!
//! Conventions: the hyperbolic metric is `|dz|² / Im(z)²`. A traceless `u`
//! generates the vector field `V(z) = b + (a − d) z − c z²` on the half-plane.
//! For elliptic `u` (det > 0) this field rotates about its zero, and we call
//! `u` future directed when that rotation is counterclockwise, i.e. `c < 0`.

use std::fmt;
use std::ops::Mul;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::jet::CJet;
use crate::mat::Mat2;

const DET_TOL: f64 = 1e-12;

/// Element of PSL(2,ℝ) stored as a determinant-one matrix with canonical sign.
#[derive(Clone, Copy, Debug)]
pub struct MoebiusElt {
    m: Mat2,
}

impl MoebiusElt {
    /// Builds the element from any matrix with positive determinant.
    ///
    /// # Panics
    /// If the determinant is not positive or an entry is not finite.
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Self::try_from_mat(Mat2::new(a, b, c, d)).expect("matrix must have positive determinant")
    }

    pub fn try_from_mat(m: Mat2) -> Result<Self> {
        let det = m.det();
        if !(det > 0.0) || !m.is_finite() {
            return Err(Error::NumericOverflow(format!("matrix {:?} has determinant {det}", m.m)));
        }
        let m = if (det - 1.0).abs() > 1e-15 { m.scale(1.0 / det.sqrt()) } else { m };
        Ok(Self::canonical(m))
    }

    fn canonical(mut m: Mat2) -> Self {
        let tr = m.trace();
        let flip = if tr.abs() > DET_TOL {
            tr < 0.0
        } else {
            m.m.iter().flatten().find(|v| v.abs() > DET_TOL).map_or(false, |v| *v < 0.0)
        };
        if flip {
            m = -m;
        }
        MoebiusElt { m }
    }

    pub fn identity() -> Self {
        MoebiusElt { m: Mat2::IDENTITY }
    }

    pub fn matrix(&self) -> Mat2 {
        self.m
    }

    pub fn entries(&self) -> [f64; 4] {
        [self.m.m[0][0], self.m.m[0][1], self.m.m[1][0], self.m.m[1][1]]
    }

    pub fn trace(&self) -> f64 {
        self.m.trace()
    }

    pub fn inverse(&self) -> Self {
        let [a, b, c, d] = self.entries();
        Self::canonical(Mat2::new(d, -b, -c, a))
    }

    /// `z ↦ (az + b)/(cz + d)` without validity checks.
    pub fn apply(&self, z: Complex64) -> Complex64 {
        let [a, b, c, d] = self.entries();
        (z * a + b) / (z * c + d)
    }

    /// Complex derivative `1/(cz + d)²`.
    pub fn deriv(&self, z: Complex64) -> Complex64 {
        let [_, _, c, d] = self.entries();
        let w = z * c + d;
        1.0 / (w * w)
    }

    pub fn apply_jet(&self, z: &CJet) -> CJet {
        let [a, b, c, d] = self.entries();
        z.moebius(a, b, c, d)
    }

    /// Real 2×2 Jacobian of the action at `z`.
    pub fn jacobian(&self, z: Complex64) -> Mat2 {
        let l = self.deriv(z);
        Mat2::new(l.re, -l.im, l.im, l.re)
    }

    /// Distance to another element in PSL: the smaller of the two sign choices.
    pub fn dist(&self, other: &MoebiusElt) -> f64 {
        let a = (self.m - other.m).max_abs();
        let b = (self.m + other.m).max_abs();
        a.min(b)
    }

    pub fn approx_eq(&self, other: &MoebiusElt, tol: f64) -> bool {
        self.dist(other) <= tol
    }

    pub fn is_finite(&self) -> bool {
        self.m.is_finite()
    }

    /// The affine map `z ↦ y z + x` sending `i` to `p = x + iy`.
    pub fn affine_to(p: Complex64) -> Self {
        let s = p.im.sqrt();
        MoebiusElt { m: Mat2::new(s, p.re / s, 0.0, 1.0 / s) }
    }

    /// Rotation by `theta` (counterclockwise) about `i`.
    pub fn rotation_about_i(theta: f64) -> Self {
        let (s, c) = (0.5 * theta).sin_cos();
        Self::canonical(Mat2::new(c, s, -s, c))
    }

    /// Rotation by `theta` (counterclockwise) about `p`.
    pub fn rotation_about(p: Complex64, theta: f64) -> Self {
        let t = Self::affine_to(p);
        t * Self::rotation_about_i(theta) * t.inverse()
    }

    /// Hyperbolic translation of length `len` along the imaginary axis.
    pub fn translation_i_axis(len: f64) -> Self {
        let e = (0.5 * len).exp();
        MoebiusElt { m: Mat2::new(e, 0.0, 0.0, 1.0 / e) }
    }
}

impl PartialEq for MoebiusElt {
    fn eq(&self, other: &Self) -> bool {
        self.approx_eq(other, 1e-12 * (1.0 + self.m.max_abs()))
    }
}

impl Mul for MoebiusElt {
    type Output = MoebiusElt;
    fn mul(self, r: MoebiusElt) -> MoebiusElt {
        let p = self.m * r.m;
        let det = p.det();
        let p = if (det - 1.0).abs() > 1e-14 { p.scale(1.0 / det.sqrt()) } else { p };
        Self::canonical(p)
    }
}

impl fmt::Display for MoebiusElt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [a, b, c, d] = self.entries();
        write!(f, "[[{a}, {b}], [{c}, {d}]]")
    }
}

/// Traceless 2×2 matrix: a left-trivialized tangent vector to AdS³.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Sl2Vec {
    u: Mat2,
}

impl Sl2Vec {
    /// Projects `m` onto trace zero.
    pub fn from_mat(m: Mat2) -> Self {
        let h = 0.5 * m.trace();
        Sl2Vec { u: m - Mat2::scalar(h) }
    }

    pub fn new(a: f64, b: f64, c: f64) -> Self {
        Sl2Vec { u: Mat2::new(a, b, c, -a) }
    }

    pub fn matrix(&self) -> Mat2 {
        self.u
    }

    pub fn det(&self) -> f64 {
        self.u.det()
    }

    pub fn scale(&self, s: f64) -> Self {
        Sl2Vec { u: self.u.scale(s) }
    }

    pub fn add(&self, o: &Sl2Vec) -> Self {
        Sl2Vec { u: self.u + o.u }
    }

    pub fn sub(&self, o: &Sl2Vec) -> Self {
        Sl2Vec { u: self.u - o.u }
    }

    pub fn bracket(&self, o: &Sl2Vec) -> Self {
        Sl2Vec { u: self.u * o.u - o.u * self.u }
    }

    /// `g u g⁻¹`.
    pub fn conjugate(&self, g: &MoebiusElt) -> Self {
        Sl2Vec::from_mat(g.m * self.u * g.inverse().m)
    }

    /// Future directed elliptic element (see module docs).
    pub fn is_future(&self) -> bool {
        self.det() > 0.0 && self.u.m[1][0] < 0.0
    }

    /// Standard basis: two spacelike unit vectors and one timelike unit vector.
    pub fn basis() -> [Sl2Vec; 3] {
        [Sl2Vec::new(1.0, 0.0, 0.0), Sl2Vec::new(0.0, 1.0, 1.0), Sl2Vec::new(0.0, 1.0, -1.0)]
    }

    pub fn coords(&self) -> [f64; 3] {
        let m = &self.u.m;
        [m[0][0], 0.5 * (m[0][1] + m[1][0]), 0.5 * (m[0][1] - m[1][0])]
    }
}

/// Anti-de Sitter inner product `½ tr(uv)`. For traceless `u` this gives
/// `⟨u, u⟩ = −det u`, so elliptic directions are exactly the timelike ones.
pub fn ads_inner(u: &Sl2Vec, v: &Sl2Vec) -> f64 {
    0.5 * (u.u * v.u).trace()
}

/// Group exponential (equal to the Riemannian exponential at the identity).
pub fn sl2_exp(u: &Sl2Vec) -> MoebiusElt {
    let det = u.det();
    let m = if det.abs() < 1e-14 {
        // u² = −det·I, so the series is I + u + u²/2 + u³/6 up to round-off.
        Mat2::IDENTITY.scale(1.0 - 0.5 * det) + u.u.scale(1.0 - det / 6.0)
    } else if det > 0.0 {
        let s = det.sqrt();
        Mat2::scalar(s.cos()) + u.u.scale(s.sin() / s)
    } else {
        let s = (-det).sqrt();
        Mat2::scalar(s.cosh()) + u.u.scale(s.sinh() / s)
    };
    MoebiusElt::try_from_mat(m).expect("exponential has determinant one")
}

/// Fixed point in the half-plane of the one-parameter group generated by an
/// elliptic `u = [[a, b], [c, d]]`: the root of `c z² + (d − a) z − b = 0`.
pub fn elliptic_fixed_point(u: &Sl2Vec) -> Result<H2Point> {
    let det = u.det();
    if !(det > 0.0) {
        return Err(Error::NotTimelike { det });
    }
    let m = &u.u.m;
    let (a, b, c, d) = (m[0][0], m[0][1], m[1][0], m[1][1]);
    // det > 0 forces c ≠ 0 and a negative discriminant.
    let x = (a - d) / (2.0 * c);
    let y = det.sqrt() / c.abs();
    let _ = b;
    H2Point::new(Complex64::new(x, y))
}

/// Point of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H2Point {
    pub z: Complex64,
}

impl H2Point {
    pub fn new(z: Complex64) -> Result<Self> {
        if !(z.im > 0.0) || !z.re.is_finite() || !z.im.is_finite() {
            return Err(Error::NumericOverflow(format!("{z} is not in the upper half-plane")));
        }
        Ok(H2Point { z })
    }

    pub fn i() -> Self {
        H2Point { z: Complex64::new(0.0, 1.0) }
    }
}

/// Tangent vector at a point of the half-plane, as a complex number.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct H2Tangent {
    pub base: H2Point,
    pub v: Complex64,
}

/// Hyperbolic distance in the half-plane.
pub fn h2_dist(z: Complex64, w: Complex64) -> f64 {
    2.0 * ((z - w).norm() / (2.0 * (z.im * w.im).sqrt())).asinh()
}

/// `cosh` of the hyperbolic distance.
pub fn h2_cosh_dist(z: Complex64, w: Complex64) -> f64 {
    1.0 + (z - w).norm_sqr() / (2.0 * z.im * w.im)
}

pub fn moebius_apply(g: &MoebiusElt, z: &H2Point) -> Result<H2Point> {
    H2Point::new(g.apply(z.z))
}

pub fn moebius_deriv(g: &MoebiusElt, t: &H2Tangent) -> Result<H2Tangent> {
    let base = moebius_apply(g, &t.base)?;
    let v = g.deriv(t.base.z) * t.v;
    if !v.re.is_finite() || !v.im.is_finite() {
        return Err(Error::NumericOverflow(format!("derivative at {}", t.base.z)));
    }
    Ok(H2Tangent { base, v })
}

/// `(a, b) · g = a g b⁻¹`.
pub fn isom_action(a: &MoebiusElt, b: &MoebiusElt, g: &MoebiusElt) -> MoebiusElt {
    *a * *g * b.inverse()
}

/// The timelike geodesic `L_{x,y} = { γ : γ(y) = x }`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TimelikeGeodesic {
    pub x: H2Point,
    pub y: H2Point,
}

impl TimelikeGeodesic {
    /// Point at parameter `t`: the element sending `y` to `x` after a
    /// rotation by `t` about `y`.
    pub fn point(&self, t: f64) -> MoebiusElt {
        let tx = MoebiusElt::affine_to(self.x.z);
        let ty = MoebiusElt::affine_to(self.y.z);
        tx * MoebiusElt::rotation_about_i(t) * ty.inverse()
    }

    /// Future directed unit tangent of the geodesic, left-trivialized at any
    /// of its points: the elliptic generator fixing `y`.
    pub fn direction(&self) -> Sl2Vec {
        let ty = MoebiusElt::affine_to(self.y.z);
        Sl2Vec::new(0.0, 0.5, -0.5).conjugate(&ty).scale(2.0)
    }
}

pub fn geodesic_membership(geo: &TimelikeGeodesic, g: &MoebiusElt) -> bool {
    let w = g.apply(geo.y.z);
    w.im > 0.0 && h2_dist(w, geo.x.z) < 1e-9
}

/// The unique isometry with `g(p) = q` whose derivative at `p` is `l`.
pub fn isometry_from_frame(p: &H2Point, q: &H2Point, l: &Mat2) -> Result<MoebiusElt> {
    let ratio = q.z.im / p.z.im;
    let m = &l.m;
    let lam = Complex64::new(0.5 * (m[0][0] + m[1][1]), 0.5 * (m[1][0] - m[0][1]));
    let conf = (m[0][0] - m[1][1]).abs().max((m[0][1] + m[1][0]).abs());
    let residual = (conf + (lam.norm() - ratio).abs()) / ratio;
    if !(residual < 1e-8) {
        return Err(Error::InvalidFrame { residual });
    }
    let rot = MoebiusElt::rotation_about_i(lam.arg());
    Ok(MoebiusElt::affine_to(q.z) * rot * MoebiusElt::affine_to(p.z).inverse())
}

/// Sectional curvature of the bi-invariant metric on the plane spanned by
/// `x` and `y`: `¼⟨[x,y],[x,y]⟩ / (⟨x,x⟩⟨y,y⟩ − ⟨x,y⟩²)`.
pub fn sectional_curvature(x: &Sl2Vec, y: &Sl2Vec) -> f64 {
    let c = x.bracket(y);
    let area = ads_inner(x, x) * ads_inner(y, y) - ads_inner(x, y).powi(2);
    0.25 * ads_inner(&c, &c) / area
}

/// Finite-difference curvature oracle independent of the bracket formula.
///
/// In exponential coordinates `(s, t) ↦ exp(s x + t y)` about the identity,
/// for an orthonormal pair the metric coefficient satisfies
/// `g_ss(0, t) = 1 − K t²/3 + O(t⁴)`. The coefficient is evaluated through
/// the derivative of the exponential,
/// `exp(−A) ∂_s exp(A + s x) = ∫₀¹ Ad(exp(−τA)) x dτ`, and `K` is read off a
/// Richardson-extrapolated second difference.
pub fn numerical_sectional_curvature(x: &Sl2Vec, y: &Sl2Vec, h: f64) -> f64 {
    // Orthonormalize the (spacelike) pair first.
    let nx = x.scale(1.0 / ads_inner(x, x).sqrt());
    let y = y.sub(&nx.scale(ads_inner(&nx, y)));
    let ny = y.scale(1.0 / ads_inner(&y, &y).sqrt());
    let rule = crate::quad::gauss_legendre(16);
    let g = |t: f64| {
        let mut w = Sl2Vec::new(0.0, 0.0, 0.0);
        for &(tau, wt) in &rule {
            let e = sl2_exp(&ny.scale(-tau * t));
            w = w.add(&nx.conjugate(&e).scale(wt));
        }
        ads_inner(&w, &w)
    };
    let g0 = g(0.0);
    let second = |h: f64| 2.0 * (g(h) - g0) / (h * h);
    let d2 = (4.0 * second(0.5 * h) - second(h)) / 3.0;
    -1.5 * d2
}

/// Length of `t ↦ exp(t u)` on `[0, t_end]`, with the velocity taken by a
/// fourth-order central difference of the exponential.
pub fn one_parameter_length(u: &Sl2Vec, t_end: f64) -> f64 {
    let h = 1e-3;
    let speed = |t: f64| {
        let e = |s: f64| sl2_exp(&u.scale(s)).matrix();
        let g = e(t);
        // Keep the sign of neighbouring samples consistent with g.
        let align = |m: Mat2| if (m - g).max_abs() > (m + g).max_abs() { -m } else { m };
        let d = (align(e(t - 2.0 * h)) - align(e(t + 2.0 * h))
            + (align(e(t + h)) - align(e(t - h))).scale(8.0))
        .scale(1.0 / (12.0 * h));
        let v = Sl2Vec::from_mat(g.inverse() * d);
        ads_inner(&v, &v).abs().sqrt()
    };
    crate::quad::integrate(speed, 0.0, t_end, 16, 8)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn apply_examples() {
        let i = H2Point::i();
        let two_i = H2Point::new(c(0.0, 2.0)).unwrap();
        assert_eq!(moebius_apply(&MoebiusElt::identity(), &two_i).unwrap().z, c(0.0, 2.0));
        let t = MoebiusElt::new(1.0, 1.0, 0.0, 1.0);
        assert!((moebius_apply(&t, &i).unwrap().z - c(1.0, 1.0)).norm() < 1e-15);
        let s = MoebiusElt::new(0.0, 1.0, -1.0, 0.0);
        assert!((moebius_apply(&s, &i).unwrap().z - i.z).norm() < 1e-15);
    }

    #[test]
    fn deriv_matches_finite_difference() {
        let g = MoebiusElt::new(0.0, 1.0, -1.0, 0.0);
        let t = H2Tangent { base: H2Point::i(), v: c(1.0, 0.0) };
        let out = moebius_deriv(&g, &t).unwrap();
        let h = 1e-6;
        let fd = (g.apply(t.base.z + t.v * h) - g.apply(t.base.z - t.v * h)) / (2.0 * h);
        assert!((out.v - fd).norm() < 1e-8);
        let tr = MoebiusElt::new(1.0, 1.0, 0.0, 1.0);
        let out = moebius_deriv(&tr, &t).unwrap();
        assert!((out.v - c(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn canonical_sign_makes_projective_equality_decidable() {
        let g = MoebiusElt::new(2.0, 1.0, 1.0, 1.0);
        let h = MoebiusElt::new(-2.0, -1.0, -1.0, -1.0);
        assert_eq!(g.entries(), h.entries());
        assert!((g.matrix().det() - 1.0).abs() < 1e-12);
        let r = MoebiusElt::new(0.0, -1.0, 1.0, 0.0);
        assert!(r.entries()[1] > 0.0);
    }

    #[test]
    fn inner_product_examples() {
        let j = Sl2Vec::new(0.0, 0.5, -0.5);
        assert!((ads_inner(&j, &j) + 0.25).abs() < 1e-15);
        let h = Sl2Vec::new(0.5, 0.0, 0.0);
        assert!((ads_inner(&h, &h) - 0.25).abs() < 1e-15);
        assert!(ads_inner(&h, &j).abs() < 1e-15);
    }

    #[test]
    fn exp_examples() {
        assert_eq!(sl2_exp(&Sl2Vec::new(0.0, 0.0, 0.0)), MoebiusElt::identity());
        let half_j = Sl2Vec::new(0.0, 0.5, -0.5);
        let pi = std::f64::consts::PI;
        assert!(sl2_exp(&half_j.scale(2.0 * pi)).approx_eq(&MoebiusElt::identity(), 1e-14));
        let half_turn = MoebiusElt::new(0.0, 1.0, -1.0, 0.0);
        assert!(sl2_exp(&half_j.scale(pi)).approx_eq(&half_turn, 1e-14));
        let u = Sl2Vec::new(0.3, -0.7, 0.4);
        for t in [1e-2, 5e-3] {
            let ut = u.matrix().scale(t);
            let taylor = Mat2::IDENTITY + ut + (ut * ut).scale(0.5);
            let err = (sl2_exp(&u.scale(t)).matrix() - taylor).max_abs();
            assert!(err < t * t * t, "t = {t}: {err}");
        }
    }

    #[test]
    fn fixed_point_examples() {
        let p = elliptic_fixed_point(&Sl2Vec::new(0.0, 0.5, -0.5)).unwrap();
        assert!((p.z - c(0.0, 1.0)).norm() < 1e-15);
        let p = elliptic_fixed_point(&Sl2Vec::new(0.0, 2.0, -0.5)).unwrap();
        assert!((p.z - c(0.0, 2.0)).norm() < 1e-15);
        assert!(matches!(
            elliptic_fixed_point(&Sl2Vec::new(1.0, 0.0, 0.0)),
            Err(Error::NotTimelike { .. })
        ));
    }

    #[test]
    fn membership_examples() {
        let geo = TimelikeGeodesic { x: H2Point::i(), y: H2Point::i() };
        let j = Sl2Vec::new(0.0, 0.5, -0.5);
        for k in 0..20 {
            assert!(geodesic_membership(&geo, &sl2_exp(&j.scale(0.37 * k as f64))));
        }
        assert!(!geodesic_membership(&geo, &MoebiusElt::new(1.0, 1.0, 0.0, 1.0)));
    }

    #[test]
    fn frame_examples() {
        let i = H2Point::i();
        let g = isometry_from_frame(&i, &i, &Mat2::IDENTITY).unwrap();
        assert_eq!(g, MoebiusElt::identity());
        let g = isometry_from_frame(&i, &i, &Mat2::scalar(-1.0)).unwrap();
        assert!(g.approx_eq(&MoebiusElt::new(0.0, 1.0, -1.0, 0.0), 1e-14));
        assert!(matches!(
            isometry_from_frame(&i, &i, &Mat2::new(1.0, 0.0, 0.0, 2.0)),
            Err(Error::InvalidFrame { .. })
        ));
    }

    #[test]
    fn timelike_direction_is_future_and_unit() {
        let geo = TimelikeGeodesic {
            x: H2Point::new(c(0.3, 1.7)).unwrap(),
            y: H2Point::new(c(-1.1, 0.4)).unwrap(),
        };
        let u = geo.direction();
        assert!(u.is_future());
        assert!((ads_inner(&u, &u) + 1.0).abs() < 1e-12);
        assert!((elliptic_fixed_point(&u).unwrap().z - geo.y.z).norm() < 1e-12);
        assert!(geodesic_membership(&geo, &geo.point(0.9)));
    }

    #[test]
    fn loop_about_i_has_length_pi() {
        let half_j = Sl2Vec::new(0.0, 0.5, -0.5);
        let l = one_parameter_length(&half_j, 2.0 * std::f64::consts::PI);
        assert!((l - std::f64::consts::PI).abs() < 1e-9, "{l}");
    }

    #[test]
    fn finite_difference_curvature_is_minus_one() {
        let [e1, e2, _] = Sl2Vec::basis();
        let k = numerical_sectional_curvature(&e1, &e2, 1e-2);
        assert!((k + 1.0).abs() < 1e-6, "{k}");
    }

    #[test]
    fn closed_form_curvature_is_minus_one() {
        let [e1, e2, _] = Sl2Vec::basis();
        assert!((sectional_curvature(&e1, &e2) + 1.0).abs() < 1e-15);
    }
}

//! Truncated bivariate Taylor polynomials ("jets") in the chart coordinates
//! `(x, y)` of the upper half-plane.
//!
//! Every field in the crate is evaluated on jets, so derivatives up to fourth
//! derivatives come out of the same arithmetic that produces values. A jet
//! carries its own valid order: combining jets of different orders yields the
//! smaller one, and differentiating drops one order.

use std::ops::{Add, AddAssign, Div, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

/// Highest supported total degree.
pub const MAX_ORDER: u8 = 4;
const N_COEFF: usize = 15;

/// Index of the monomial `x^i y^j`.
#[inline]
pub const fn idx(i: usize, j: usize) -> usize {
    let d = i + j;
    d * (d + 1) / 2 + j
}

const fn degree_of(k: usize) -> usize {
    let mut d = 0;
    while (d + 1) * (d + 2) / 2 <= k {
        d += 1;
    }
    d
}

const fn exponents(k: usize) -> (usize, usize) {
    let d = degree_of(k);
    let j = k - d * (d + 1) / 2;
    (d - j, j)
}

const N_PAIRS: usize = 70;
/// Cumulative number of product terms needed for each truncation order.
const PAIRS_UPTO: [usize; 5] = [1, 5, 15, 35, 70];

const fn build_pairs() -> [(u8, u8, u8); N_PAIRS] {
    let mut out = [(0u8, 0u8, 0u8); N_PAIRS];
    let mut n = 0;
    let mut target_deg = 0;
    while target_deg <= MAX_ORDER as usize {
        let mut a = 0;
        while a < N_COEFF {
            let mut b = 0;
            while b < N_COEFF {
                if degree_of(a) + degree_of(b) == target_deg {
                    let (ia, ja) = exponents(a);
                    let (ib, jb) = exponents(b);
                    out[n] = (a as u8, b as u8, idx(ia + ib, ja + jb) as u8);
                    n += 1;
                }
                b += 1;
            }
            a += 1;
        }
        target_deg += 1;
    }
    out
}

const PAIRS: [(u8, u8, u8); N_PAIRS] = build_pairs();

#[inline(always)]
fn mul_upto<const P: usize>(a: &[f64; N_COEFF], b: &[f64; N_COEFF]) -> [f64; N_COEFF] {
    let mut c = [0.0; N_COEFF];
    let mut k = 0;
    while k < P {
        let (i, j, t) = PAIRS[k];
        c[t as usize] += a[i as usize] * b[j as usize];
        k += 1;
    }
    c
}

/// Truncated Taylor polynomial `Σ c_ij dx^i dy^j` about some base point.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet {
    c: [f64; N_COEFF],
    order: u8,
}

impl Default for Jet {
    fn default() -> Self {
        Jet::constant(0.0)
    }
}

impl Jet {
    /// An exact constant (valid at every order).
    pub fn constant(v: f64) -> Self {
        let mut c = [0.0; N_COEFF];
        c[0] = v;
        Jet { c, order: MAX_ORDER }
    }

    pub fn zero() -> Self {
        Jet::constant(0.0)
    }

    /// The coordinate `x` expanded about `x0`.
    pub fn var_x(x0: f64, order: u8) -> Self {
        let mut j = Jet::constant(x0);
        j.order = order.min(MAX_ORDER);
        if order > 0 {
            j.c[1] = 1.0;
        }
        j
    }

    /// The coordinate `y` expanded about `y0`.
    pub fn var_y(y0: f64, order: u8) -> Self {
        let mut j = Jet::constant(y0);
        j.order = order.min(MAX_ORDER);
        if order > 0 {
            j.c[2] = 1.0;
        }
        j
    }

    pub fn from_coeffs(c: [f64; N_COEFF], order: u8) -> Self {
        let mut j = Jet { c, order: order.min(MAX_ORDER) };
        j.clear_above();
        j
    }

    fn clear_above(&mut self) {
        let o = self.order as usize;
        let keep = (o + 1) * (o + 2) / 2;
        for v in self.c.iter_mut().skip(keep) {
            *v = 0.0;
        }
    }

    #[inline]
    pub fn order(&self) -> u8 {
        self.order
    }

    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.c[idx(i, j)]
    }

    pub fn coeffs(&self) -> &[f64; N_COEFF] {
        &self.c
    }

    #[inline]
    pub fn val(&self) -> f64 {
        self.c[0]
    }
    #[inline]
    pub fn dx(&self) -> f64 {
        debug_assert!(self.order >= 1);
        self.c[1]
    }
    #[inline]
    pub fn dy(&self) -> f64 {
        debug_assert!(self.order >= 1);
        self.c[2]
    }
    pub fn dxx(&self) -> f64 {
        debug_assert!(self.order >= 2);
        2.0 * self.c[3]
    }
    pub fn dxy(&self) -> f64 {
        debug_assert!(self.order >= 2);
        self.c[4]
    }
    pub fn dyy(&self) -> f64 {
        debug_assert!(self.order >= 2);
        2.0 * self.c[5]
    }

    /// Drop all terms above `order`.
    pub fn truncate(&self, order: u8) -> Self {
        if order >= self.order {
            return *self;
        }
        let mut j = *self;
        j.order = order;
        j.clear_above();
        j
    }

    /// Partial derivative in `x`; the result has one order less.
    pub fn partial_x(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut out = [0.0; N_COEFF];
        for k in 1..N_COEFF {
            let (i, j) = exponents(k);
            if i >= 1 && i + j <= self.order as usize {
                out[idx(i - 1, j)] += i as f64 * self.c[k];
            }
        }
        Jet { c: out, order: self.order - 1 }
    }

    /// Partial derivative in `y`; the result has one order less.
    pub fn partial_y(&self) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let mut out = [0.0; N_COEFF];
        for k in 1..N_COEFF {
            let (i, j) = exponents(k);
            if j >= 1 && i + j <= self.order as usize {
                out[idx(i, j - 1)] += j as f64 * self.c[k];
            }
        }
        Jet { c: out, order: self.order - 1 }
    }

    /// The jet with its constant term removed.
    pub fn increment(&self) -> Self {
        let mut j = *self;
        j.c[0] = 0.0;
        j
    }

    /// Applies a univariate function given its scaled derivatives
    /// `f_k = f^(k)(a0) / k!` at the constant term `a0`.
    fn apply(&self, f: [f64; 5]) -> Self {
        let d = self.increment();
        let mut out = Jet::constant(f[0]);
        out.order = self.order;
        if self.order == 0 {
            return out;
        }
        let mut p = d;
        for fk in f.iter().skip(1).take(self.order as usize) {
            out += p * *fk;
            p = p * d;
        }
        out
    }

    pub fn recip(&self) -> Self {
        let a = self.c[0];
        let r = 1.0 / a;
        let r2 = r * r;
        self.apply([r, -r2, r2 * r, -r2 * r2, r2 * r2 * r])
    }

    pub fn exp(&self) -> Self {
        let e = self.c[0].exp();
        self.apply([e, e, e / 2.0, e / 6.0, e / 24.0])
    }

    pub fn ln(&self) -> Self {
        let a = self.c[0];
        let r = 1.0 / a;
        self.apply([a.ln(), r, -r * r / 2.0, r * r * r / 3.0, -r * r * r * r / 4.0])
    }

    pub fn powf(&self, p: f64) -> Self {
        let a = self.c[0];
        let f0 = a.powf(p);
        let f1 = p * f0 / a;
        let f2 = p * (p - 1.0) / 2.0 * f0 / (a * a);
        let f3 = p * (p - 1.0) * (p - 2.0) / 6.0 * f0 / (a * a * a);
        let f4 = f3 * (p - 3.0) / (4.0 * a);
        self.apply([f0, f1, f2, f3, f4])
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.apply([s, c, -s / 2.0, -c / 6.0, s / 24.0])
    }

    pub fn cos(&self) -> Self {
        let (s, c) = self.c[0].sin_cos();
        self.apply([c, -s, -c / 2.0, s / 6.0, c / 24.0])
    }

    pub fn square(&self) -> Self {
        *self * *self
    }

    /// Evaluates this polynomial at `(u, v)`, where `u` and `v` are
    /// increments (jets with zero constant term) in some other variables.
    pub fn compose(&self, u: &Jet, v: &Jet) -> Jet {
        debug_assert!(u.c[0] == 0.0 && v.c[0] == 0.0);
        let order = self.order.min(u.order).min(v.order);
        let u = u.truncate(order);
        let v = v.truncate(order);
        let mut up = [Jet::constant(1.0); 5];
        let mut vp = [Jet::constant(1.0); 5];
        for k in 1..=order as usize {
            up[k] = up[k - 1] * u;
            vp[k] = vp[k - 1] * v;
        }
        let mut out = Jet::constant(self.c[0]);
        out.order = order;
        for k in 1..N_COEFF {
            let (i, j) = exponents(k);
            if i + j > order as usize || self.c[k] == 0.0 {
                continue;
            }
            out += up[i] * vp[j] * self.c[k];
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.c.iter().all(|v| v.is_finite())
    }
}

impl Add for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let mut c = [0.0; N_COEFF];
        for k in 0..N_COEFF {
            c[k] = self.c[k] + rhs.c[k];
        }
        let mut j = Jet { c, order };
        if self.order != rhs.order {
            j.clear_above();
        }
        j
    }
}

impl Sub for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, rhs: Jet) -> Jet {
        self + (-rhs)
    }
}

impl Neg for Jet {
    type Output = Jet;
    #[inline]
    fn neg(self) -> Jet {
        let mut j = self;
        for v in j.c.iter_mut() {
            *v = -*v;
        }
        j
    }
}

impl Mul for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: Jet) -> Jet {
        let order = self.order.min(rhs.order);
        let c = match order {
            0 => mul_upto::<{ PAIRS_UPTO[0] }>(&self.c, &rhs.c),
            1 => mul_upto::<{ PAIRS_UPTO[1] }>(&self.c, &rhs.c),
            2 => mul_upto::<{ PAIRS_UPTO[2] }>(&self.c, &rhs.c),
            3 => mul_upto::<{ PAIRS_UPTO[3] }>(&self.c, &rhs.c),
            _ => mul_upto::<{ PAIRS_UPTO[4] }>(&self.c, &rhs.c),
        };
        Jet { c, order }
    }
}

impl Div for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, rhs: Jet) -> Jet {
        self * rhs.recip()
    }
}

impl Add<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn add(self, rhs: f64) -> Jet {
        let mut j = self;
        j.c[0] += rhs;
        j
    }
}

impl Sub<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn sub(self, rhs: f64) -> Jet {
        self + (-rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: f64) -> Jet {
        let mut j = self;
        for v in j.c.iter_mut() {
            *v *= rhs;
        }
        j
    }
}

impl Div<f64> for Jet {
    type Output = Jet;
    #[inline]
    fn div(self, rhs: f64) -> Jet {
        self * (1.0 / rhs)
    }
}

impl Mul<Jet> for f64 {
    type Output = Jet;
    #[inline]
    fn mul(self, rhs: Jet) -> Jet {
        rhs * self
    }
}

impl AddAssign for Jet {
    #[inline]
    fn add_assign(&mut self, rhs: Jet) {
        *self = *self + rhs;
    }
}

impl SubAssign for Jet {
    #[inline]
    fn sub_assign(&mut self, rhs: Jet) {
        *self = *self - rhs;
    }
}

impl MulAssign<f64> for Jet {
    #[inline]
    fn mul_assign(&mut self, rhs: f64) {
        *self = *self * rhs;
    }
}

/// A complex-valued jet `re + i·im`, used for points of the upper
/// half-plane and for Möbius arithmetic on them.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct CJet {
    pub re: Jet,
    pub im: Jet,
}

impl CJet {
    pub fn new(re: Jet, im: Jet) -> Self {
        CJet { re, im }
    }

    /// Exact constant point.
    pub fn constant(z: Complex64) -> Self {
        CJet { re: Jet::constant(z.re), im: Jet::constant(z.im) }
    }

    /// The identity chart expanded about `z0`: `(x0 + dx) + i (y0 + dy)`.
    pub fn local(z0: Complex64, order: u8) -> Self {
        CJet { re: Jet::var_x(z0.re, order), im: Jet::var_y(z0.im, order) }
    }

    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re.val(), self.im.val())
    }

    pub fn order(&self) -> u8 {
        self.re.order().min(self.im.order())
    }

    pub fn truncate(&self, order: u8) -> Self {
        CJet { re: self.re.truncate(order), im: self.im.truncate(order) }
    }

    /// `(a z + b) / (c z + d)` for real coefficients.
    pub fn moebius(&self, a: f64, b: f64, c: f64, d: f64) -> CJet {
        let num = CJet { re: self.re * a + b, im: self.im * a };
        let den = CJet { re: self.re * c + d, im: self.im * c };
        num / den
    }

    pub fn norm_sqr(&self) -> Jet {
        self.re * self.re + self.im * self.im
    }

    /// Re-expands a function evaluated in local coordinates about
    /// `self.value()` in the variables of `self`.
    pub fn pullback(&self, local: &Jet) -> Jet {
        let z0 = self.value();
        local.compose(&(self.re - z0.re), &(self.im - z0.im))
    }
}

impl Add for CJet {
    type Output = CJet;
    fn add(self, r: CJet) -> CJet {
        CJet { re: self.re + r.re, im: self.im + r.im }
    }
}

impl Sub for CJet {
    type Output = CJet;
    fn sub(self, r: CJet) -> CJet {
        CJet { re: self.re - r.re, im: self.im - r.im }
    }
}

impl Mul for CJet {
    type Output = CJet;
    fn mul(self, r: CJet) -> CJet {
        CJet { re: self.re * r.re - self.im * r.im, im: self.re * r.im + self.im * r.re }
    }
}

impl Mul<f64> for CJet {
    type Output = CJet;
    fn mul(self, r: f64) -> CJet {
        CJet { re: self.re * r, im: self.im * r }
    }
}

impl Div for CJet {
    type Output = CJet;
    fn div(self, r: CJet) -> CJet {
        let inv = r.norm_sqr().recip();
        CJet {
            re: (self.re * r.re + self.im * r.im) * inv,
            im: (self.im * r.re - self.re * r.im) * inv,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn f(x: f64, y: f64) -> f64 {
        ((x * y + 1.0).ln() + (0.3 * x).exp() / (1.0 + y * y).sqrt()) * (x - y).sin()
    }

    fn fj(x: Jet, y: Jet) -> Jet {
        ((x * y + 1.0).ln() + (x * 0.3).exp() / (y * y + 1.0).sqrt()) * (x - y).sin()
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let (x0, y0) = (0.4, 0.7);
        let j = fj(Jet::var_x(x0, 3), Jet::var_y(y0, 3));
        let h = 1e-4;
        let fx = (f(x0 + h, y0) - f(x0 - h, y0)) / (2.0 * h);
        let fy = (f(x0, y0 + h) - f(x0, y0 - h)) / (2.0 * h);
        let h2 = 1e-3;
        let fxx = (f(x0 + h2, y0) - 2.0 * f(x0, y0) + f(x0 - h2, y0)) / (h2 * h2);
        let fxy = (f(x0 + h2, y0 + h2) - f(x0 + h2, y0 - h2) - f(x0 - h2, y0 + h2)
            + f(x0 - h2, y0 - h2))
            / (4.0 * h2 * h2);
        assert_abs_diff_eq!(j.val(), f(x0, y0), epsilon = 1e-14);
        assert_abs_diff_eq!(j.dx(), fx, epsilon = 1e-8);
        assert_abs_diff_eq!(j.dy(), fy, epsilon = 1e-8);
        assert_abs_diff_eq!(j.dxx(), fxx, epsilon = 1e-5);
        assert_abs_diff_eq!(j.dxy(), fxy, epsilon = 1e-5);
        // third derivative through the partial of the second
        let fxxy_fd = {
            let g = |y: f64| {
                let jj = fj(Jet::var_x(x0, 3), Jet::var_y(y, 3));
                jj.dxx()
            };
            (g(y0 + h) - g(y0 - h)) / (2.0 * h)
        };
        assert_abs_diff_eq!(j.partial_x().partial_x().partial_y().val(), fxxy_fd, epsilon = 1e-6);
    }

    #[test]
    fn fourth_order_univariate_coefficients() {
        let x0 = 0.7;
        let x = Jet::var_x(x0, 4);
        assert_abs_diff_eq!(x.sin().coeff(4, 0), x0.sin() / 24.0, epsilon = 1e-15);
        assert_abs_diff_eq!(x.recip().coeff(4, 0), x0.powi(-5), epsilon = 1e-13);
        assert_abs_diff_eq!(x.ln().coeff(4, 0), -x0.powi(-4) / 4.0, epsilon = 1e-13);
        let p = 2.5;
        let expect = p * (p - 1.0) * (p - 2.0) * (p - 3.0) / 24.0 * x0.powf(p - 4.0);
        assert_abs_diff_eq!(x.powf(p).coeff(4, 0), expect, epsilon = 1e-13);
        let y = Jet::var_y(0.2, 4);
        let xy2 = (x * y).square();
        assert_abs_diff_eq!(xy2.coeff(2, 2), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn order_is_the_minimum_of_operands() {
        let a = Jet::var_x(1.0, 3);
        let b = Jet::var_y(2.0, 1);
        let c = a * b;
        assert_eq!(c.order(), 1);
        assert_eq!(c.coeff(1, 1), 0.0);
        assert_eq!(a.partial_x().order(), 2);
    }

    #[test]
    fn composition_matches_direct_evaluation() {
        // g(s, t) = (s^2 + t, s t); f(x, y) as above; compare f∘g.
        let (s0, t0) = (0.3, 0.5);
        let s = Jet::var_x(s0, 3);
        let t = Jet::var_y(t0, 3);
        let gx = s * s + t;
        let gy = s * t;
        let direct = fj(gx, gy);
        let local = fj(Jet::var_x(gx.val(), 3), Jet::var_y(gy.val(), 3));
        let composed = local.compose(&gx.increment(), &gy.increment());
        for k in 0..N_COEFF {
            assert_abs_diff_eq!(direct.c[k], composed.c[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn complex_division_roundtrip() {
        let z = CJet::local(Complex64::new(0.2, 1.3), 3);
        let w = z.moebius(2.0, 1.0, 0.5, 1.0);
        let back = w.moebius(1.0, -1.0, -0.5, 2.0); // inverse matrix up to scale
        let d = back - z;
        for k in 0..N_COEFF {
            assert_abs_diff_eq!(d.re.c[k], 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(d.im.c[k], 0.0, epsilon = 1e-12);
        }
    }
}

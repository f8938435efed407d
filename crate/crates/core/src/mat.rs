//! 2×2 real matrices, plain and jet-valued.

use std::ops::{Add, Mul, Neg, Sub};

use crate::jet::Jet;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Mat2 {
    pub m: [[f64; 2]; 2],
}

impl Mat2 {
    pub const IDENTITY: Mat2 = Mat2 { m: [[1.0, 0.0], [0.0, 1.0]] };
    /// Counterclockwise quarter turn in chart coordinates.
    pub const QUARTER_TURN: Mat2 = Mat2 { m: [[0.0, -1.0], [1.0, 0.0]] };

    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Self {
        Mat2 { m: [[a, b], [c, d]] }
    }

    pub fn scalar(s: f64) -> Self {
        Mat2::new(s, 0.0, 0.0, s)
    }

    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        Mat2::new(c, -s, s, c)
    }

    pub fn det(&self) -> f64 {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> f64 {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        Mat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn inverse(&self) -> Self {
        let d = self.det();
        Mat2::new(self.m[1][1] / d, -self.m[0][1] / d, -self.m[1][0] / d, self.m[0][0] / d)
    }

    pub fn apply(&self, v: [f64; 2]) -> [f64; 2] {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn scale(&self, s: f64) -> Self {
        Mat2::new(self.m[0][0] * s, self.m[0][1] * s, self.m[1][0] * s, self.m[1][1] * s)
    }

    pub fn max_abs(&self) -> f64 {
        self.m.iter().flatten().fold(0.0f64, |a, v| a.max(v.abs()))
    }

    /// Quadratic form `uᵀ M v`.
    pub fn form(&self, u: [f64; 2], v: [f64; 2]) -> f64 {
        let mv = self.apply(v);
        u[0] * mv[0] + u[1] * mv[1]
    }

    /// Principal square root of a matrix with positive eigenvalues.
    pub fn sqrt_positive(&self) -> Option<Self> {
        let det = self.det();
        if det <= 0.0 {
            return None;
        }
        let s = det.sqrt();
        let t = self.trace() + 2.0 * s;
        if t <= 0.0 {
            return None;
        }
        let r = t.sqrt();
        Some(Mat2::new(
            (self.m[0][0] + s) / r,
            self.m[0][1] / r,
            self.m[1][0] / r,
            (self.m[1][1] + s) / r,
        ))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, r: Mat2) -> Mat2 {
        Mat2::new(
            self.m[0][0] + r.m[0][0],
            self.m[0][1] + r.m[0][1],
            self.m[1][0] + r.m[1][0],
            self.m[1][1] + r.m[1][1],
        )
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, r: Mat2) -> Mat2 {
        self + (-r)
    }
}

impl Neg for Mat2 {
    type Output = Mat2;
    fn neg(self) -> Mat2 {
        self.scale(-1.0)
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, r: Mat2) -> Mat2 {
        let a = &self.m;
        let b = &r.m;
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Jet-valued vector in chart coordinates.
pub type JVec2 = [Jet; 2];

/// Jet-valued 2×2 matrix (an endomorphism or a bilinear form in chart
/// coordinates).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JMat2 {
    pub m: [[Jet; 2]; 2],
}

impl JMat2 {
    pub fn new(a: Jet, b: Jet, c: Jet, d: Jet) -> Self {
        JMat2 { m: [[a, b], [c, d]] }
    }

    pub fn identity() -> Self {
        JMat2::constant(Mat2::IDENTITY)
    }

    pub fn constant(m: Mat2) -> Self {
        JMat2::new(
            Jet::constant(m.m[0][0]),
            Jet::constant(m.m[0][1]),
            Jet::constant(m.m[1][0]),
            Jet::constant(m.m[1][1]),
        )
    }

    pub fn scalar(s: Jet) -> Self {
        JMat2::new(s, Jet::zero(), Jet::zero(), s)
    }

    pub fn value(&self) -> Mat2 {
        Mat2::new(self.m[0][0].val(), self.m[0][1].val(), self.m[1][0].val(), self.m[1][1].val())
    }

    pub fn order(&self) -> u8 {
        self.m.iter().flatten().map(|j| j.order()).min().unwrap_or(0)
    }

    pub fn map(&self, f: impl Fn(&Jet) -> Jet) -> Self {
        JMat2::new(f(&self.m[0][0]), f(&self.m[0][1]), f(&self.m[1][0]), f(&self.m[1][1]))
    }

    pub fn partial_x(&self) -> Self {
        self.map(|j| j.partial_x())
    }

    pub fn partial_y(&self) -> Self {
        self.map(|j| j.partial_y())
    }

    pub fn det(&self) -> Jet {
        self.m[0][0] * self.m[1][1] - self.m[0][1] * self.m[1][0]
    }

    pub fn trace(&self) -> Jet {
        self.m[0][0] + self.m[1][1]
    }

    pub fn transpose(&self) -> Self {
        JMat2::new(self.m[0][0], self.m[1][0], self.m[0][1], self.m[1][1])
    }

    pub fn inverse(&self) -> Self {
        let r = self.det().recip();
        JMat2::new(self.m[1][1] * r, -self.m[0][1] * r, -self.m[1][0] * r, self.m[0][0] * r)
    }

    pub fn scale(&self, s: Jet) -> Self {
        self.map(|j| *j * s)
    }

    pub fn apply(&self, v: &JVec2) -> JVec2 {
        [
            self.m[0][0] * v[0] + self.m[0][1] * v[1],
            self.m[1][0] * v[0] + self.m[1][1] * v[1],
        ]
    }

    pub fn column(&self, k: usize) -> JVec2 {
        [self.m[0][k], self.m[1][k]]
    }

    /// Bilinear form `uᵀ M v`.
    pub fn form(&self, u: &JVec2, v: &JVec2) -> Jet {
        let mv = self.apply(v);
        u[0] * mv[0] + u[1] * mv[1]
    }

    /// Principal square root of a matrix with positive eigenvalues.
    pub fn sqrt_positive(&self) -> Self {
        let s = self.det().sqrt();
        let r = (self.trace() + s * 2.0).sqrt().recip();
        JMat2::new(
            (self.m[0][0] + s) * r,
            self.m[0][1] * r,
            self.m[1][0] * r,
            (self.m[1][1] + s) * r,
        )
    }

    pub fn truncate(&self, order: u8) -> Self {
        self.map(|j| j.truncate(order))
    }
}

impl Add for JMat2 {
    type Output = JMat2;
    fn add(self, r: JMat2) -> JMat2 {
        JMat2::new(
            self.m[0][0] + r.m[0][0],
            self.m[0][1] + r.m[0][1],
            self.m[1][0] + r.m[1][0],
            self.m[1][1] + r.m[1][1],
        )
    }
}

impl Sub for JMat2 {
    type Output = JMat2;
    fn sub(self, r: JMat2) -> JMat2 {
        JMat2::new(
            self.m[0][0] - r.m[0][0],
            self.m[0][1] - r.m[0][1],
            self.m[1][0] - r.m[1][0],
            self.m[1][1] - r.m[1][1],
        )
    }
}

impl Mul for JMat2 {
    type Output = JMat2;
    fn mul(self, r: JMat2) -> JMat2 {
        let a = &self.m;
        let b = &r.m;
        JMat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

pub fn jvec_add(a: &JVec2, b: &JVec2) -> JVec2 {
    [a[0] + b[0], a[1] + b[1]]
}

pub fn jvec_scale(a: &JVec2, s: Jet) -> JVec2 {
    [a[0] * s, a[1] * s]
}

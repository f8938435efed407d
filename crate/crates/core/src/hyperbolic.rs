//! Hyperbolic plane helpers: Cayley map, geodesic arcs, polar directions.

use num_complex::Complex64;

use crate::lie2::{h2_dist, MoebiusElt};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Upper half-plane to Poincaré disc, sending `i` to `0`.
pub fn to_disc(z: Complex64) -> Complex64 {
    (z - I) / (z + I)
}

/// Poincaré disc to upper half-plane.
pub fn from_disc(w: Complex64) -> Complex64 {
    I * (1.0 + w) / (1.0 - w)
}

/// Point at hyperbolic distance `d` from `i` in the tangent direction `phi`
/// (angle measured counterclockwise from the positive real direction).
pub fn polar_from_i(phi: f64, d: f64) -> Complex64 {
    // In the disc the direction is rotated by −π/2.
    let w = Complex64::from_polar((0.5 * d).tanh(), phi - std::f64::consts::FRAC_PI_2);
    from_disc(w)
}

/// Initial direction at `i` of the geodesic towards `z`.
pub fn direction_from_i(z: Complex64) -> f64 {
    to_disc(z).arg() + std::f64::consts::FRAC_PI_2
}

/// Unit-speed geodesic segment between two points of the half-plane.
#[derive(Clone, Copy, Debug)]
pub struct GeodesicArc {
    frame: MoebiusElt,
    pub length: f64,
}

impl GeodesicArc {
    pub fn new(p: Complex64, q: Complex64) -> Self {
        let t = MoebiusElt::affine_to(p);
        let w = t.inverse().apply(q);
        let length = h2_dist(p, q);
        let phi = if length > 0.0 { direction_from_i(w) } else { std::f64::consts::FRAC_PI_2 };
        let frame = t * MoebiusElt::rotation_about_i(phi - std::f64::consts::FRAC_PI_2);
        GeodesicArc { frame, length }
    }

    /// Point and velocity (with respect to the normalized parameter
    /// `s ∈ [0, 1]`) at parameter `s`.
    pub fn at(&self, s: f64) -> (Complex64, Complex64) {
        let e = (s * self.length).exp();
        let w = I * e;
        let z = self.frame.apply(w);
        let v = self.frame.deriv(w) * (I * e * self.length);
        (z, v)
    }

    pub fn point(&self, s: f64) -> Complex64 {
        self.at(s).0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cayley_roundtrip() {
        let z = Complex64::new(0.3, 2.1);
        assert!((from_disc(to_disc(z)) - z).norm() < 1e-14);
        assert!(to_disc(I).norm() < 1e-16);
    }

    #[test]
    fn polar_coordinates() {
        let z = polar_from_i(1.1, 0.7);
        assert!((h2_dist(z, I) - 0.7).abs() < 1e-13);
        assert!((direction_from_i(z) - 1.1).abs() < 1e-13);
        assert!((polar_from_i(std::f64::consts::FRAC_PI_2, 1.0) - I * 1f64.exp()).norm() < 1e-13);
    }

    #[test]
    fn arc_hits_endpoints_at_unit_speed() {
        let p = Complex64::new(-0.4, 0.6);
        let q = Complex64::new(1.3, 2.2);
        let arc = GeodesicArc::new(p, q);
        assert!((arc.point(0.0) - p).norm() < 1e-13);
        assert!((arc.point(1.0) - q).norm() < 1e-12);
        let (z, v) = arc.at(0.37);
        assert!((v.norm() / z.im - arc.length).abs() < 1e-12);
        let mid = arc.point(0.5);
        assert!((h2_dist(p, mid) - 0.5 * arc.length).abs() < 1e-12);
    }
}

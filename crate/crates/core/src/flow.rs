//! Vector fields built from potentials and their flows, integrated with
//! fixed-step RK4 directly on jets. Integrating a jet state is the same as
//! integrating the variational equations, so Jacobians and their
//! derivatives come out of the flow itself.

use std::sync::Arc;

use num_complex::Complex64;

use crate::fieldcalc::{local_for, pull_vec, PlaneMap, ScalarField, VectorField};
use crate::jet::{CJet, Jet};
use crate::mat::JVec2;

pub const DEFAULT_STEPS: usize = 256;

/// Time profile `a(t) = Σ c_k t^k`.
#[derive(Clone, Debug, PartialEq)]
pub struct Profile(pub Vec<f64>);

impl Profile {
    pub fn constant(c: f64) -> Self {
        Profile(vec![c])
    }

    pub fn at(&self, t: f64) -> f64 {
        self.0.iter().rev().fold(0.0, |acc, c| acc * t + c)
    }

    /// `∫₀¹ a(t) dt`.
    pub fn mean(&self) -> f64 {
        self.0.iter().enumerate().map(|(k, c)| c / (k as f64 + 1.0)).sum()
    }
}

fn combined(terms: &[(Profile, Arc<dyn ScalarField>)], t: f64, z: &CJet) -> Jet {
    let mut p = Jet::constant(0.0).truncate(z.order());
    for (a, f) in terms {
        let c = a.at(t);
        if c != 0.0 {
            p += f.eval(z) * c;
        }
    }
    p
}

/// `X_t = y²(∂_y P_t, −∂_x P_t)` with `P_t = Σ a_m(t) u_m`: the field with
/// `Ω_h(X_t, ·) = dP_t`. Invariant potentials give Hamiltonian fields;
/// multivalued ones add a flux.
#[derive(Clone)]
pub struct SymplecticField {
    pub terms: Vec<(Profile, Arc<dyn ScalarField>)>,
}

impl SymplecticField {
    pub fn autonomous(p: Arc<dyn ScalarField>) -> Self {
        SymplecticField { terms: vec![(Profile::constant(1.0), p)] }
    }

    /// Flux class `∫₀¹ [dP_t] dt`, known in closed form from the potentials.
    pub fn expected_flux(&self) -> [f64; 4] {
        let mut out = [0.0; 4];
        for (a, f) in &self.terms {
            let p = f.periods();
            let m = a.mean();
            for i in 0..4 {
                out[i] += m * p[i];
            }
        }
        out
    }

    pub fn scaled(&self, s: f64) -> Self {
        SymplecticField {
            terms: self
                .terms
                .iter()
                .map(|(a, f)| (Profile(a.0.iter().map(|c| c * s).collect()), f.clone()))
                .collect(),
        }
    }
}

impl VectorField for SymplecticField {
    fn eval(&self, t: f64, z: &CJet) -> JVec2 {
        let (loc, out) = local_for(z);
        let p = combined(&self.terms, t, &loc);
        let y2 = loc.im.square();
        let x = [y2 * p.partial_y(), -(y2 * p.partial_x())];
        pull_vec(z, &x, out)
    }
}

/// `h`-gradient field `y²(∂_x P, ∂_y P)`; its flows are not area preserving.
#[derive(Clone)]
pub struct GradientField {
    pub terms: Vec<(Profile, Arc<dyn ScalarField>)>,
}

impl VectorField for GradientField {
    fn eval(&self, t: f64, z: &CJet) -> JVec2 {
        let (loc, out) = local_for(z);
        let p = combined(&self.terms, t, &loc);
        let y2 = loc.im.square();
        let x = [y2 * p.partial_x(), y2 * p.partial_y()];
        pull_vec(z, &x, out)
    }
}

/// Sum of vector fields.
pub struct FieldSum(pub Vec<Arc<dyn VectorField>>);

impl VectorField for FieldSum {
    fn eval(&self, t: f64, z: &CJet) -> JVec2 {
        let mut acc: Option<JVec2> = None;
        for f in &self.0 {
            let v = f.eval(t, z);
            acc = Some(match acc {
                None => v,
                Some(a) => [a[0] + v[0], a[1] + v[1]],
            });
        }
        acc.expect("empty field sum")
    }
}

/// Time-`[t0, t1]` map of a time-dependent vector field.
#[derive(Clone)]
pub struct FlowMap {
    pub field: Arc<dyn VectorField>,
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl FlowMap {
    pub fn new(field: Arc<dyn VectorField>) -> Self {
        FlowMap { field, t0: 0.0, t1: 1.0, steps: DEFAULT_STEPS }
    }

    pub fn with_steps(mut self, steps: usize) -> Self {
        self.steps = steps;
        self
    }

    /// Flow between other times.
    pub fn between(&self, t0: f64, t1: f64) -> Self {
        let steps = ((self.steps as f64) * (t1 - t0).abs()).ceil().max(1.0) as usize;
        FlowMap { field: self.field.clone(), t0, t1, steps }
    }

    /// Backward flow: the inverse map.
    pub fn inverse(&self) -> Self {
        FlowMap { field: self.field.clone(), t0: self.t1, t1: self.t0, steps: self.steps }
    }

    fn add(z: &CJet, v: &JVec2, h: f64) -> CJet {
        CJet::new(z.re + v[0] * h, z.im + v[1] * h)
    }
}

impl PlaneMap for FlowMap {
    fn map_jet(&self, z: &CJet) -> CJet {
        let h = (self.t1 - self.t0) / self.steps as f64;
        let mut w = *z;
        for n in 0..self.steps {
            let t = self.t0 + n as f64 * h;
            let k1 = self.field.eval(t, &w);
            let k2 = self.field.eval(t + 0.5 * h, &Self::add(&w, &k1, 0.5 * h));
            let k3 = self.field.eval(t + 0.5 * h, &Self::add(&w, &k2, 0.5 * h));
            let k4 = self.field.eval(t + h, &Self::add(&w, &k3, h));
            let re = w.re + (k1[0] + (k2[0] + k3[0]) * 2.0 + k4[0]) * (h / 6.0);
            let im = w.im + (k1[1] + (k2[1] + k3[1]) * 2.0 + k4[1]) * (h / 6.0);
            w = CJet::new(re, im);
        }
        w
    }
}

/// `Ω_h`-determinant of the Jacobian at a point: `det Dψ · y² / Im(ψ)²`.
pub fn symplectic_determinant(map: &dyn PlaneMap, z: Complex64) -> f64 {
    let w = map.map_jet(&CJet::local(z, 1));
    let d = w.re.dx() * w.im.dy() - w.re.dy() * w.im.dx();
    d * (z.im / w.value().im).powi(2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fuchsian::Surface;
    use crate::orbit::{BumpSum, ClassPotential};

    fn hamiltonian(s: &Surface) -> SymplecticField {
        let h = BumpSum::new(s, &[(Complex64::new(0.2, 1.1), 0.9, 0.3), (Complex64::new(-0.5, 0.8), 0.7, -0.2)]);
        SymplecticField::autonomous(Arc::new(h))
    }

    #[test]
    fn constant_potential_gives_zero_field() {
        let s = Surface::standard();
        let f = SymplecticField::autonomous(Arc::new(BumpSum::new(&s, &[])));
        let v = f.value(0.0, Complex64::new(0.1, 1.0));
        assert_eq!(v, [0.0, 0.0]);
    }

    #[test]
    fn flow_is_area_preserving() {
        let s = Surface::standard();
        let flow = FlowMap::new(Arc::new(hamiltonian(&s)));
        for z in [Complex64::new(0.1, 1.0), Complex64::new(-0.6, 0.5)] {
            let d = symplectic_determinant(&flow, z);
            assert!((d - 1.0).abs() < 1e-6, "{d}");
        }
    }

    #[test]
    fn flow_is_equivariant() {
        let s = Surface::standard();
        let field = hamiltonian(&s);
        let u = ClassPotential::new(&s, [0.3, 0.0, -0.2, 0.1]);
        let sum = FieldSum(vec![Arc::new(field), Arc::new(SymplecticField::autonomous(Arc::new(u)))]);
        let flow = FlowMap::new(Arc::new(sum)).with_steps(64);
        let z = Complex64::new(0.3, 0.9);
        let fz = flow.apply(z);
        for g in &s.group.generators {
            let a = flow.apply(g.apply(z));
            let b = g.apply(fz);
            assert!(crate::lie2::h2_dist(a, b) < 1e-7);
        }
    }

    #[test]
    fn backward_flow_inverts() {
        let s = Surface::standard();
        let flow = FlowMap::new(Arc::new(hamiltonian(&s))).with_steps(64);
        let z = Complex64::new(0.3, 0.9);
        let back = flow.inverse().apply(flow.apply(z));
        assert!((back - z).norm() < 1e-9);
    }

    #[test]
    fn jacobian_matches_finite_differences() {
        let s = Surface::standard();
        let flow = FlowMap::new(Arc::new(hamiltonian(&s))).with_steps(64);
        let z = Complex64::new(0.3, 0.9);
        let jac = flow.jacobian(z);
        // Richardson-extrapolated central differences.
        let d = |e: Complex64| {
            let c = |s: f64| (flow.apply(z + e * s) - flow.apply(z - e * s)) / (2.0 * s * e.norm());
            (c(0.5) * 4.0 - c(1.0)) / 3.0
        };
        let fx = d(Complex64::new(1e-4, 0.0));
        let fy = d(Complex64::new(0.0, 1e-4));
        assert!((jac.m[0][0] - fx.re).abs() < 1e-8);
        assert!((jac.m[1][0] - fx.im).abs() < 1e-8);
        assert!((jac.m[0][1] - fy.re).abs() < 1e-8);
        assert!((jac.m[1][1] - fy.im).abs() < 1e-8);
    }
}

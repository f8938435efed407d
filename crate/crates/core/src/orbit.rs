//! Invariant and multivalued scalar functions built from orbit sums of
//! rapidly decaying radial profiles.

use std::sync::Arc;

use num_complex::Complex64;

use crate::fuchsian::{circumradius, pair, FuchsianGroup, Surface, BASIS_GENERATORS};
use crate::hyperbolic::I;
use crate::jet::{CJet, Jet};
use crate::lie2::{h2_cosh_dist, MoebiusElt};

/// Width of the partition-of-unity profile.
pub const PARTITION_WIDTH: f64 = 1.0;

/// Abelianization vector in the basis `(a₁, b₁, a₂, b₂)` of a generator.
pub fn generator_class(k: usize) -> [i32; 4] {
    let mut v = [0; 4];
    if let Some(p) = BASIS_GENERATORS.iter().position(|&g| g == k) {
        v[p] = 1;
    } else {
        let p = BASIS_GENERATORS.iter().position(|&g| g == pair(k)).expect("paired generator");
        v[p] = -1;
    }
    v
}

pub fn word_class(word: &[usize]) -> [i32; 4] {
    let mut v = [0; 4];
    for &k in word {
        let c = generator_class(k);
        for i in 0..4 {
            v[i] += c[i];
        }
    }
    v
}

/// Radial Gaussian in `q = cosh d − 1`: `exp(−q/s)` with `s = cosh w − 1`
/// for a width `w`. Treated as zero once `q/s` exceeds [`Bump::CUTOFF`].
#[derive(Clone, Copy, Debug)]
pub struct Bump {
    scale: f64,
}

impl Bump {
    /// `exp(−36)` is about `2e−16`.
    pub const CUTOFF: f64 = 36.0;

    pub fn new(width: f64) -> Self {
        Bump { scale: width.cosh() - 1.0 }
    }

    pub fn width(&self) -> f64 {
        (self.scale + 1.0).acosh()
    }

    /// Distance beyond which the profile is dropped.
    pub fn radius(&self) -> f64 {
        (1.0 + Self::CUTOFF * self.scale).acosh()
    }

    pub fn contains(&self, cosh_d: f64) -> bool {
        (cosh_d - 1.0) < Self::CUTOFF * self.scale
    }

    pub fn eval(&self, cosh_d: &Jet) -> Jet {
        ((*cosh_d - 1.0) * (-1.0 / self.scale)).exp()
    }
}

/// `cosh d(z, w)` for a jet `z` and a fixed point `w`.
pub fn cosh_dist_jet(z: &CJet, w: Complex64) -> Jet {
    let dx = z.re - w.re;
    let dy = z.im - w.im;
    (dx * dx + dy * dy) / (z.im * (2.0 * w.im)) + 1.0
}

/// Orbit points `g·p` near the fundamental domain, with the classes of `g`.
#[derive(Clone, Debug)]
pub struct OrbitList {
    pub points: Vec<(Complex64, [i32; 4])>,
    /// The elements `g` with `g·p` the corresponding point.
    pub elements: Vec<MoebiusElt>,
}

impl OrbitList {
    /// All `g·p` with `d(i, g·p) ≤ reach`, enumerated by breadth-first search
    /// over the Cayley graph.
    pub fn new(group: &FuchsianGroup, p: Complex64, reach: f64) -> Self {
        let dp = crate::lie2::h2_dist(p, I);
        let mut out = Vec::new();
        let mut elements = Vec::new();
        let mut seen = std::collections::HashSet::new();
        let mut queue = std::collections::VecDeque::new();
        let key = |z: Complex64| ((z.re * 1e8).round() as i64, (z.im.ln() * 1e8).round() as i64);
        seen.insert(key(I));
        queue.push_back((MoebiusElt::identity(), [0i32; 4]));
        while let Some((g, ab)) = queue.pop_front() {
            let gp = g.apply(p);
            if crate::lie2::h2_dist(gp, I) <= reach {
                out.push((gp, ab));
                elements.push(g);
            }
            for k in 0..group.generators.len() {
                let h = g * group.generators[k];
                let c = h.apply(I);
                // Elements moving i further than reach + d(i, p) cannot contribute.
                if crate::lie2::h2_dist(c, I) > reach + dp {
                    continue;
                }
                if seen.insert(key(c)) {
                    let gc = generator_class(k);
                    let mut ab2 = ab;
                    for i in 0..4 {
                        ab2[i] += gc[i];
                    }
                    queue.push_back((h, ab2));
                }
            }
        }
        OrbitList { points: out, elements }
    }
}

/// Reduces a jet point into the fundamental domain: returns the reduced
/// jet and the class of the reducing element.
pub fn reduce_jet(group: &FuchsianGroup, z: &CJet) -> (CJet, [i32; 4]) {
    let r = group.reduce(z.value()).expect("point too deep for reduction");
    if r.word.is_empty() {
        return (*z, [0; 4]);
    }
    (r.g.inverse().apply_jet(z), word_class(&r.word))
}

/// Weighted orbit sums of radial bumps: `H(z) = Σ_j c_j Σ_g β_j(d(z, g p_j))`.
/// Invariant under the group.
#[derive(Clone, Debug)]
pub struct BumpSum {
    group: Arc<FuchsianGroup>,
    terms: Vec<(f64, Bump, OrbitList)>,
}

impl BumpSum {
    /// `centres` are `(p_j, width_j, c_j)`.
    pub fn new(surface: &Surface, centres: &[(Complex64, f64, f64)]) -> Self {
        let reach = circumradius() + 1e-6;
        let terms = centres
            .iter()
            .map(|&(p, r, c)| (c, Bump::new(r), OrbitList::new(&surface.group, p, reach + Bump::new(r).radius())))
            .collect();
        BumpSum { group: Arc::new(surface.group.clone()), terms }
    }

    pub fn eval(&self, z: &CJet) -> Jet {
        let (zr, _) = reduce_jet(&self.group, z);
        let z0 = zr.value();
        let mut out = Jet::constant(0.0).truncate(z.order());
        for (c, bump, orbit) in &self.terms {
            for (w, _) in &orbit.points {
                if bump.contains(h2_cosh_dist(z0, *w)) {
                    out += bump.eval(&cosh_dist_jet(&zr, *w)) * *c;
                }
            }
        }
        out
    }
}

/// Multivalued potential `u` with `u(g·z) = u(z) + χ(g)` and prescribed
/// values of `χ` on the basis loops, built from a partition of unity:
/// `u(z) = Σ_g χ(g) ρ(g⁻¹z) / Σ_g ρ(g⁻¹z)`.
#[derive(Clone, Debug)]
pub struct ClassPotential {
    group: Arc<FuchsianGroup>,
    periods: [f64; 4],
    bump: Bump,
    orbit: OrbitList,
}

impl ClassPotential {
    pub fn new(surface: &Surface, periods: [f64; 4]) -> Self {
        Self::with_width(surface, periods, PARTITION_WIDTH)
    }

    pub fn with_width(surface: &Surface, periods: [f64; 4], width: f64) -> Self {
        let bump = Bump::new(width);
        let orbit = OrbitList::new(&surface.group, I, circumradius() + bump.radius() + 1e-6);
        ClassPotential { group: Arc::new(surface.group.clone()), periods, bump, orbit }
    }

    pub fn periods(&self) -> [f64; 4] {
        self.periods
    }

    fn chi(&self, ab: &[i32; 4]) -> f64 {
        (0..4).map(|i| ab[i] as f64 * self.periods[i]).sum()
    }

    pub fn eval(&self, z: &CJet) -> Jet {
        let (zr, ab) = reduce_jet(&self.group, z);
        let z0 = zr.value();
        let mut num = Jet::constant(0.0).truncate(z.order());
        let mut den = num;
        for (w, wab) in &self.orbit.points {
            if self.bump.contains(h2_cosh_dist(z0, *w)) {
                let r = self.bump.eval(&cosh_dist_jet(&zr, *w));
                num += r * self.chi(wab);
                den += r;
            }
        }
        num / den + self.chi(&ab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn relation_has_trivial_class() {
        let s = Surface::standard();
        assert_eq!(word_class(&s.group.relation_word), [0; 4]);
    }

    #[test]
    fn bump_sum_is_invariant() {
        let s = Surface::standard();
        let h = BumpSum::new(&s, &[(Complex64::new(0.3, 1.4), 1.2, 1.0)]);
        let z = Complex64::new(0.5, 0.9);
        let v = h.eval(&CJet::local(z, 0)).val();
        assert!(v > 0.0);
        for g in &s.group.generators {
            let w = h.eval(&CJet::local(g.apply(z), 0)).val();
            assert!((v - w).abs() < 1e-12);
        }
    }

    #[test]
    fn class_potential_shifts_by_periods() {
        let s = Surface::standard();
        let per = [0.7, -1.1, 0.25, 2.0];
        let u = ClassPotential::new(&s, per);
        let z = Complex64::new(-0.2, 1.3);
        let v = u.eval(&CJet::local(z, 0)).val();
        for (k, g) in s.group.generators.iter().enumerate() {
            let w = u.eval(&CJet::local(g.apply(z), 0)).val();
            let c = generator_class(k);
            let chi: f64 = (0..4).map(|i| c[i] as f64 * per[i]).sum();
            assert!((w - v - chi).abs() < 1e-12, "generator {k}");
        }
    }
}

//! Smooth closed 1-forms close to the harmonic representatives, obtained by
//! minimizing Dirichlet energy over a finite space of invariant functions
//! added to a partition-of-unity potential.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fieldcalc::ScalarField;
use crate::fuchsian::{circumradius, inradius, side_direction, FuchsianGroup, Surface, N_SIDES};
use crate::hyperbolic::{polar_from_i, I};
use crate::jet::{CJet, Jet};
use crate::lie2::MoebiusElt;
use crate::orbit::{reduce_jet, Bump, OrbitList};

/// Size of the correction basis: highest power of the disc coordinate `ζ`
/// and of `|ζ|²`, and the width of the shared radial profile.
#[derive(Clone, Copy, Debug)]
pub struct BasisParams {
    pub angular: usize,
    pub radial: usize,
    pub width: f64,
}

impl Default for BasisParams {
    fn default() -> Self {
        BasisParams { angular: 8, radial: 1, width: 0.6 }
    }
}

impl BasisParams {
    fn len(&self) -> usize {
        (2 * self.angular + 1) * (self.radial + 1)
    }
}

const MAX_ANGULAR: usize = 8;

/// Translates of `i` together with the inverse elements, shared by the
/// partition of unity and the correction basis.
/// The Cayley transform of `g⁻¹` as complex Möbius coefficients: maps `z`
/// to the disc coordinate `ζ` of `g⁻¹z` about `i`.
#[derive(Clone, Copy, Debug)]
struct DiscChart([Complex64; 4]);

impl DiscChart {
    fn new(ginv: &MoebiusElt) -> Self {
        let [a, b, c, d] = ginv.entries();
        // (w − i)/(w + i) with w = (a z + b)/(c z + d).
        let i = Complex64::i();
        DiscChart([a - i * c, b - i * d, a + i * c, b + i * d])
    }

    fn value(&self, z: Complex64) -> Complex64 {
        let [a, b, c, d] = self.0;
        (a * z + b) / (c * z + d)
    }

    fn jet(&self, z: &CJet) -> CJet {
        let [a, b, c, d] = self.0;
        let lin = |p: Complex64, q: Complex64| CJet {
            re: z.re * p.re - z.im * p.im + q.re,
            im: z.re * p.im + z.im * p.re + q.im,
        };
        lin(a, b) / lin(c, d)
    }
}

/// Translates of `i` with the disc charts about them, shared by the
/// partition of unity and the correction basis.
#[derive(Clone, Debug)]
struct Orbit {
    group: Arc<FuchsianGroup>,
    /// `1/s` for the profile `exp(−q/s)`.
    inv_scale: f64,
    /// Largest `|ζ|²` inside the cutoff.
    r2_cut: f64,
    params: BasisParams,
    points: Vec<(DiscChart, [i32; 4])>,
}

/// Per-point sums: partition numerator per class direction, denominator,
/// correction basis values (when requested) and a combined correction.
struct Terms {
    num: [Jet; 4],
    den: Jet,
    basis: Vec<Jet>,
    correction: Jet,
    class: [i32; 4],
}

/// Correction coefficients in basis order: for each radial power, the
/// constant term then `(Re ζ^m, Im ζ^m)` pairs.
type Coeffs = [f64];


impl Orbit {
    fn new(surface: &Surface, params: BasisParams) -> Self {
        assert!(params.angular <= MAX_ANGULAR);
        let bump = Bump::new(params.width);
        let list = OrbitList::new(&surface.group, I, circumradius() + bump.radius() + 1e-6);
        let points: Vec<(DiscChart, [i32; 4])> = list
            .points
            .iter()
            .zip(&list.elements)
            .map(|(&(_, ab), g)| (DiscChart::new(&g.inverse()), ab))
            .collect();
        let scale = params.width.cosh() - 1.0;
        // q = cosh d − 1 = 2|ζ|²/(1 − |ζ|²).
        let q_cut = Bump::CUTOFF * scale;
        Orbit {
            group: Arc::new(surface.group.clone()),
            inv_scale: 1.0 / scale,
            r2_cut: q_cut / (2.0 + q_cut),
            params,
            points,
        }
    }

    fn terms(&self, z: &CJet, with_basis: bool, combined: Option<&Coeffs>) -> Terms {
        let (zr, class) = reduce_jet(&self.group, z);
        let z0 = zr.value();
        let o = z.order();
        let zero = Jet::constant(0.0).truncate(o);
        let mut num = [zero; 4];
        let mut den = zero;
        let mut basis = if with_basis { vec![zero; self.params.len()] } else { Vec::new() };
        let mut correction = zero;
        let one = CJet::constant(Complex64::new(1.0, 0.0)).truncate(o);
        for (chart, ab) in &self.points {
            if chart.value(z0).norm_sqr() >= self.r2_cut {
                continue;
            }
            let zeta = chart.jet(&zr);
            let r2 = zeta.norm_sqr();
            let q = r2 * 2.0 / ((r2 * -1.0) + 1.0);
            let rho = (q * -self.inv_scale).exp();
            den += rho;
            for i in 0..4 {
                if ab[i] != 0 {
                    num[i] += rho * ab[i] as f64;
                }
            }
            if combined.is_none() && !with_basis {
                continue;
            }
            let mut powers = [one; MAX_ANGULAR + 1];
            let na = self.params.angular;
            for m in 1..=na {
                powers[m] = powers[m - 1] * zeta;
            }
            if let Some(c) = combined {
                let mut radial = rho;
                let mut k = 0;
                for _ in 0..=self.params.radial {
                    let mut poly = Jet::constant(c[k]).truncate(o);
                    k += 1;
                    for p in &powers[1..=na] {
                        poly += p.re * c[k] + p.im * c[k + 1];
                        k += 2;
                    }
                    correction += poly * radial;
                    radial = radial * r2;
                }
            }
            if with_basis {
                let mut radial = rho;
                let mut k = 0;
                for _ in 0..=self.params.radial {
                    basis[k] += radial;
                    k += 1;
                    for p in &powers[1..=na] {
                        basis[k] += p.re * radial;
                        basis[k + 1] += p.im * radial;
                        k += 2;
                    }
                    radial = radial * r2;
                }
            }
        }
        // Normalizing by the partition sum makes the correction space
        // reproduce local polynomials in ζ.
        let inv = den.recip();
        for b in basis.iter_mut() {
            *b = *b * inv;
        }
        let correction = correction * inv;
        Terms { num, den, basis, correction, class }
    }
}

/// Quadrature nodes over the fundamental octagon in polar coordinates about
/// its centre: `(point, weight)` with the hyperbolic area element included.
pub fn octagon_quadrature(angular: usize, radial: usize) -> Vec<(Complex64, f64)> {
    let r_in = inradius().tanh();
    let half = std::f64::consts::FRAC_PI_8;
    let mut out = Vec::new();
    for k in 0..N_SIDES {
        let c = side_direction(k);
        for (a, wa) in crate::quad::composite(-half, half, 1, angular) {
            let rho_max = (r_in / a.cos()).atanh();
            for (s, ws) in crate::quad::composite(0.0, rho_max, 1, radial) {
                out.push((polar_from_i(c + a, s), wa * ws * s.sinh()));
            }
        }
    }
    out
}

/// Interior sample points of the octagon (the quadrature nodes).
pub fn domain_samples(angular: usize, radial: usize) -> Vec<Complex64> {
    octagon_quadrature(angular, radial).into_iter().map(|(z, _)| z).collect()
}

/// Four smooth potentials `u_k` with `u_k(g·z) = u_k(z) + [g]_k`, each of
/// approximately least Dirichlet energy.
#[derive(Debug)]
pub struct HarmonicBasis {
    orbit: Orbit,
    coeffs: [Vec<f64>; 4],
    energies: [[f64; 4]; 4],
}

impl HarmonicBasis {
    pub fn new(surface: &Surface) -> Result<Self> {
        Self::with_params(surface, BasisParams::default())
    }

    pub fn with_params(surface: &Surface, params: BasisParams) -> Result<Self> {
        let orbit = Orbit::new(surface, params);
        let n = params.len();
        let mut m = DMatrix::<f64>::zeros(n, n);
        let mut rhs = DMatrix::<f64>::zeros(n, 4);
        let mut c0 = [[0.0; 4]; 4];
        for (z, w) in octagon_quadrature(24, 16) {
            let t = orbit.terms(&CJet::local(z, 1), true, None);
            let y2 = z.im * z.im;
            let grad = |f: &Jet| [f.dx(), f.dy()];
            let db: Vec<[f64; 2]> = t.basis.iter().map(grad).collect();
            let du: Vec<[f64; 2]> = (0..4).map(|i| grad(&(t.num[i] / t.den))).collect();
            for a in 0..n {
                for b in a..n {
                    let v = w * y2 * (db[a][0] * db[b][0] + db[a][1] * db[b][1]);
                    m[(a, b)] += v;
                    if a != b {
                        m[(b, a)] += v;
                    }
                }
                for i in 0..4 {
                    rhs[(a, i)] -= w * y2 * (db[a][0] * du[i][0] + db[a][1] * du[i][1]);
                }
            }
            for i in 0..4 {
                for j in 0..4 {
                    c0[i][j] += w * y2 * (du[i][0] * du[j][0] + du[i][1] * du[j][1]);
                }
            }
        }
        let svd = m.clone().svd(true, true);
        let tol = svd.singular_values.max() * 1e-12;
        let sol = svd.solve(&rhs, tol).map_err(|e| Error::Solver(e.to_string()))?;
        let coeffs: [Vec<f64>; 4] = std::array::from_fn(|i| sol.column(i).iter().copied().collect());
        // Energy form of the corrected potentials: c0 + 2 aᵀ(−rhs) + aᵀ M a.
        let mut energies = [[0.0; 4]; 4];
        for i in 0..4 {
            for j in 0..4 {
                let ai = DVector::from_column_slice(&coeffs[i]);
                let aj = DVector::from_column_slice(&coeffs[j]);
                let cross = -(ai.dot(&rhs.column(j)) + aj.dot(&rhs.column(i)));
                energies[i][j] = c0[i][j] + cross + (ai.transpose() * &m * &aj)[(0, 0)];
            }
        }
        Ok(HarmonicBasis { orbit, coeffs, energies })
    }

    /// Dirichlet energy `∫ |du|²` of the potential with the given periods.
    pub fn energy(&self, periods: &[f64; 4]) -> f64 {
        let mut e = 0.0;
        for i in 0..4 {
            for j in 0..4 {
                e += periods[i] * periods[j] * self.energies[i][j];
            }
        }
        e
    }

    /// Correction coefficients for a combination of the basis potentials.
    fn combine(&self, periods: &[f64; 4]) -> Vec<f64> {
        (0..self.orbit.params.len()).map(|k| (0..4).map(|i| periods[i] * self.coeffs[i][k]).sum()).collect()
    }

    pub fn eval(&self, periods: &[f64; 4], z: &CJet) -> Jet {
        self.eval_combined(periods, &self.combine(periods), z)
    }

    fn eval_combined(&self, periods: &[f64; 4], c: &Coeffs, z: &CJet) -> Jet {
        let t = self.orbit.terms(z, false, Some(c));
        let mut out = t.correction;
        let mut num = Jet::constant(0.0).truncate(z.order());
        for i in 0..4 {
            if periods[i] != 0.0 {
                num += t.num[i] * periods[i];
                out = out + periods[i] * t.class[i] as f64;
            }
        }
        out + num / t.den
    }
}

/// Near-harmonic multivalued potential with prescribed periods.
#[derive(Clone, Debug)]
pub struct HarmonicPotential {
    pub basis: Arc<HarmonicBasis>,
    pub periods: [f64; 4],
    combined: Vec<f64>,
}

impl HarmonicPotential {
    pub fn new(basis: Arc<HarmonicBasis>, periods: [f64; 4]) -> Self {
        let combined = basis.combine(&periods);
        HarmonicPotential { basis, periods, combined }
    }
}

impl ScalarField for HarmonicPotential {
    fn eval(&self, z: &CJet) -> Jet {
        self.basis.eval_combined(&self.periods, &self.combined, z)
    }

    fn periods(&self) -> [f64; 4] {
        self.periods
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quadrature_covers_the_octagon() {
        let area: f64 = octagon_quadrature(24, 16).iter().map(|p| p.1).sum();
        assert!((area - 4.0 * std::f64::consts::PI).abs() < 1e-7, "{area}");
    }

    #[test]
    fn potentials_shift_by_periods_and_lower_energy() {
        let s = Surface::standard();
        let hb = HarmonicBasis::new(&s).unwrap();
        let per = [0.7, -1.1, 0.25, 2.0];
        let u = HarmonicPotential::new(Arc::new(hb), per);
        let z = Complex64::new(-0.2, 1.3);
        let v = u.eval(&CJet::local(z, 0)).val();
        for (k, g) in s.group.generators.iter().enumerate() {
            let w = u.eval(&CJet::local(g.apply(z), 0)).val();
            let c = crate::orbit::generator_class(k);
            let chi: f64 = (0..4).map(|i| c[i] as f64 * per[i]).sum();
            assert!((w - v - chi).abs() < 1e-12, "generator {k}");
        }
        let e = u.basis.energy(&[1.0, 0.0, 0.0, 0.0]);
        eprintln!("energies {:?}", u.basis.energies);
        assert!(e > 0.0);
    }
}

use std::f64::consts::PI;
use std::sync::Arc;

use adsflux::fieldcalc::{circle_dist, hyperbolic_metric, ScalarField};
use adsflux::flow::{symplectic_determinant, FlowMap, SymplecticField};
use adsflux::fuchsian::Surface;
use adsflux::harness::{load, Overrides};
use adsflux::jet::{CJet, Jet};
use adsflux::lie2::{ads_inner, h2_dist, isom_action, sectional_curvature, sl2_exp, Sl2Vec};
use adsflux::orbit::BumpSum;
use adsflux::symplect::{eta_connection, eta_hodge, rotate_section, section_residuals, PolarSection, Section};
use num_complex::Complex64;
use proptest::prelude::*;

fn sl2() -> impl Strategy<Value = Sl2Vec> {
    (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64).prop_map(|(a, b, c)| Sl2Vec::new(a, b, c))
}

fn uhp() -> impl Strategy<Value = Complex64> {
    (-2.0..2.0f64, 0.2..3.0f64).prop_map(|(x, y)| Complex64::new(x, y))
}

/// `θ = a x + b y + c x y`.
struct Bilinear([f64; 3]);

impl ScalarField for Bilinear {
    fn eval(&self, z: &CJet) -> Jet {
        let [a, b, c] = self.0;
        z.re * a + z.im * b + z.re * z.im * c
    }
}

proptest! {
    #[test]
    fn moebius_maps_are_hyperbolic_isometries(u in sl2(), z in uhp(), w in uhp()) {
        let g = sl2_exp(&u);
        let d = h2_dist(z, w);
        prop_assert!((h2_dist(g.apply(z), g.apply(w)) - d).abs() < 1e-9 * (1.0 + d));
    }

    #[test]
    fn killing_form_is_ad_invariant(u in sl2(), v in sl2(), x in sl2()) {
        let g = sl2_exp(&x);
        let before = ads_inner(&u, &v);
        let after = ads_inner(&u.conjugate(&g), &v.conjugate(&g));
        prop_assert!((before - after).abs() < 1e-9 * (1.0 + before.abs()));
        prop_assert!(u.bracket(&v).add(&v.bracket(&u)).coords().iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn jacobi_identity(u in sl2(), v in sl2(), w in sl2()) {
        let j = u.bracket(&v.bracket(&w))
            .add(&v.bracket(&w.bracket(&u)))
            .add(&w.bracket(&u.bracket(&v)));
        prop_assert!(j.coords().iter().all(|c| c.abs() < 1e-12));
    }

    #[test]
    fn spacelike_planes_have_curvature_minus_one(u in sl2(), v in sl2()) {
        let area = ads_inner(&u, &u) * ads_inner(&v, &v) - ads_inner(&u, &v).powi(2);
        prop_assume!(ads_inner(&u, &u) > 0.1 && area > 0.05);
        prop_assert!((sectional_curvature(&u, &v) + 1.0).abs() < 1e-9);
    }

    #[test]
    fn product_action_is_a_group_action(a in sl2(), b in sl2(), c in sl2(), d in sl2(), g in sl2()) {
        let (a, b, c, d, g) = (sl2_exp(&a), sl2_exp(&b), sl2_exp(&c), sl2_exp(&d), sl2_exp(&g));
        let two_steps = isom_action(&a, &b, &isom_action(&c, &d, &g));
        let one_step = isom_action(&(a * c), &(b * d), &g);
        prop_assert!(two_steps.approx_eq(&one_step, 1e-9));
    }

    #[test]
    fn jet_derivatives_match_finite_differences(x in -1.0..1.0f64, y in 0.5..2.0f64) {
        let f = |z: &CJet| (z.re * z.im).sin() + z.im.ln() * z.re.square();
        let j = f(&CJet::local(Complex64::new(x, y), 2));
        let v = |x: f64, y: f64| f(&CJet::local(Complex64::new(x, y), 0)).val();
        let h = 1e-4;
        let fx = (v(x + h, y) - v(x - h, y)) / (2.0 * h);
        let fyy = (v(x, y + h) - 2.0 * v(x, y) + v(x, y - h)) / (h * h);
        prop_assert!((j.dx() - fx).abs() < 1e-7);
        prop_assert!((j.dyy() - fyy).abs() < 1e-5);
    }

    #[test]
    fn circle_distance_is_a_metric_on_angles(a in -20.0..20.0f64, b in -20.0..20.0f64, k in -3i32..3) {
        let d = circle_dist(a, b);
        prop_assert!((0.0..=PI + 1e-12).contains(&d));
        prop_assert!((d - circle_dist(b, a)).abs() < 1e-12);
        prop_assert!((d - circle_dist(a + 2.0 * PI * k as f64, b)).abs() < 1e-9);
    }

    #[test]
    fn rotated_sections_stay_isometric_and_shift_eta_by_minus_dtheta(
        u in sl2(), z in uhp(), c in (-1.0..1.0f64, -1.0..1.0f64, -1.0..1.0f64),
    ) {
        // A non-isometric ψ: a Möbius map followed by a shear.
        let g = sl2_exp(&u.scale(0.5));
        let psi: Arc<dyn adsflux::fieldcalc::PlaneMap> = Arc::new(Shear(g));
        let h = Arc::new(hyperbolic_metric());
        let base: Arc<dyn Section> = Arc::new(PolarSection::new(psi, h.clone(), h));
        let theta = Bilinear([c.0, c.1, c.2]);
        let rotated = rotate_section(base.clone(), Arc::new(Bilinear([c.0, c.1, c.2])));
        let zj = CJet::local(z, 1);
        let s = rotated.eval(&zj);
        let (iso, det) = section_residuals(&s);
        prop_assert!(iso < 1e-9 && det < 1e-9);
        let e0 = eta_hodge(&base.eval(&zj));
        let e1 = eta_connection(&s);
        let dtheta = theta.eval(&zj);
        let diff = [e1[0].val() - e0[0].val(), e1[1].val() - e0[1].val()];
        // η_{R_θ b} = η_b − dθ
        let err = (diff[0] + dtheta.dx()).abs().max((diff[1] + dtheta.dy()).abs());
        prop_assert!(err < 1e-8, "η shift {:?} vs dθ ({}, {})", diff, dtheta.dx(), dtheta.dy());
    }

    #[test]
    fn config_hash_ignores_layout(seed in 0u64..1000, steps in 8usize..512) {
        let d = tempfile::tempdir().unwrap();
        let a = d.path().join("a.cfg");
        let b = d.path().join("b.cfg");
        std::fs::write(&a, format!("name = s\nkind = flux_vs_c\nseed = {seed}\nsteps = {steps}\n")).unwrap();
        std::fs::write(&b, format!("# same keys\nsteps   =   {steps}\n\nseed = {seed}  # trailing\nkind = flux_vs_c\nname = s\n")).unwrap();
        let ha = load(&a, Overrides::default()).unwrap().remove(0).config_hash;
        let hb = load(&b, Overrides::default()).unwrap().remove(0).config_hash;
        prop_assert_eq!(ha.clone(), hb);
        let over = Overrides { seed: Some(seed + 1), ..Overrides::default() };
        prop_assert_ne!(ha, load(&a, over).unwrap().remove(0).config_hash);
    }
}

/// `z ↦ g(z) + 0.3·Im g(z)`, which does not preserve `h`.
struct Shear(adsflux::lie2::MoebiusElt);

impl adsflux::fieldcalc::PlaneMap for Shear {
    fn map_jet(&self, z: &CJet) -> CJet {
        let w = self.0.apply_jet(z);
        CJet::new(w.re + w.im * 0.3, w.im)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(6))]

    #[test]
    fn hamiltonian_flows_preserve_area(
        cx in -0.4..0.4f64, cy in 0.6..1.3f64, amp in 0.05..0.2f64, z in (-0.3..0.3f64, 0.7..1.3f64),
    ) {
        let s = Surface::standard();
        let bump = BumpSum::new(&s, &[(Complex64::new(cx, cy), 0.8, amp)]);
        let flow = FlowMap::new(Arc::new(SymplecticField::autonomous(Arc::new(bump)))).with_steps(32);
        let det = symplectic_determinant(&flow, Complex64::new(z.0, z.1));
        prop_assert!((det - 1.0).abs() < 1e-6, "det = {det}");
    }
}

//! The AdS₃ model PSL(2,ℝ): curvature, timelike loops and the action of
//! pairs of isometries of the hyperbolic plane.

use std::f64::consts::PI;

use adsflux::lie2::{
    ads_inner, geodesic_membership, isom_action, numerical_sectional_curvature, one_parameter_length,
    sectional_curvature, H2Point, MoebiusElt, Sl2Vec, TimelikeGeodesic,
};
use num_complex::Complex64;

fn main() {
    let [e1, e2, e3] = Sl2Vec::basis();
    println!("basis norms ⟨e,e⟩: {:.3} {:.3} {:.3}", ads_inner(&e1, &e1), ads_inner(&e2, &e2), ads_inner(&e3, &e3));
    println!(
        "K(e1, e2): bracket formula {:.12}, finite differences {:.9}",
        sectional_curvature(&e1, &e2),
        numerical_sectional_curvature(&e1, &e2, 1e-2)
    );

    let u = Sl2Vec::new(0.0, 0.5, -0.5);
    println!("length of the closed timelike loop: {:.12} (π = {PI:.12})", one_parameter_length(&u, 2.0 * PI));

    let x = H2Point::new(Complex64::new(0.3, 1.4)).unwrap();
    let y = H2Point::new(Complex64::new(-0.2, 0.7)).unwrap();
    let geo = TimelikeGeodesic { x, y };
    let a = MoebiusElt::translation_i_axis(0.8);
    let b = MoebiusElt::rotation_about(Complex64::new(0.1, 1.2), 0.6);
    let moved = isom_action(&a, &b, &geo.point(1.0));
    let image = TimelikeGeodesic {
        x: H2Point::new(a.apply(x.z)).unwrap(),
        y: H2Point::new(b.apply(y.z)).unwrap(),
    };
    println!("(a, b)·L_(x,y) lies on L_(a x, b y): {}", geodesic_membership(&image, &moved));
}

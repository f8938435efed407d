//! Connection forms of an orthonormal frame and the structure equation
//! dω = −K Ω for the hyperbolic metric and for a pulled-back metric.

use std::sync::Arc;

use adsflux::fieldcalc::{
    area_density, connection_form, exterior_d, hyperbolic_metric, observed_order, structure_equation_residual,
    MetricField, PullbackMetric,
};
use adsflux::jet::CJet;
use adsflux::lie2::MoebiusElt;
use num_complex::Complex64;

fn main() {
    let h = hyperbolic_metric();
    let pts = [Complex64::new(0.3, 0.8), Complex64::new(-0.4, 1.7)];
    for step in [4e-2, 2e-2, 1e-2] {
        let r = structure_equation_residual(&h, &pts, step);
        println!("step {step:.0e}: residual {:.3e}", r.residual);
    }
    let a = structure_equation_residual(&h, &pts, 2e-2).residual;
    let b = structure_equation_residual(&h, &pts, 1e-2).residual;
    println!("observed order {:.3}", observed_order(a, b));

    // With jets the same identity holds exactly for a pulled-back metric.
    let g = PullbackMetric {
        map: Arc::new(MoebiusElt::rotation_about(Complex64::new(0.0, 1.0), 0.4)),
        base: Arc::new(hyperbolic_metric()),
        label: "r*h".into(),
    };
    let z = CJet::local(Complex64::new(0.2, 1.1), 3);
    let m = g.eval(&z);
    let v1 = [m.m[0][0].sqrt().recip(), m.m[0][0] * 0.0];
    let v2 = adsflux::fieldcalc::almost_complex(&m).apply(&v1);
    let omega = connection_form(&m, &v1, &v2).unwrap();
    let d_omega = exterior_d(&omega);
    println!("dω = {:.12}, area density = {:.12}", d_omega.val(), area_density(&m).val());
}

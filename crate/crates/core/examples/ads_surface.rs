//! From a Hamiltonian flow to an equivariant spacelike surface in AdS₃ and
//! back: curvature, Gauss map and extraction of the flow from the surface.

use std::sync::Arc;

use adsflux::adsurf::{extract_phi, immersion_scan};
use adsflux::fieldcalc::PlaneMap;
use adsflux::flow::{FlowMap, SymplecticField};
use adsflux::fuchsian::Surface;
use adsflux::harmonic::domain_samples;
use adsflux::harness::scenarios::reconstruct;
use adsflux::lie2::h2_dist;
use adsflux::orbit::BumpSum;
use num_complex::Complex64;

fn main() -> adsflux::error::Result<()> {
    let s = Surface::standard();
    let h = BumpSum::new(&s, &[(Complex64::new(0.1, 0.9), 0.8, 0.15), (Complex64::new(-0.3, 1.2), 0.7, -0.1)]);
    let psi: Arc<dyn PlaneMap> = Arc::new(FlowMap::new(Arc::new(SymplecticField::autonomous(Arc::new(h)))).with_steps(64));
    let rec = reconstruct(&s, psi.clone(), None)?;
    let surf = &rec.surface;

    let pts = domain_samples(2, 2);
    let scan = immersion_scan(surf, &pts, true)?;
    println!("{} samples, spacelike immersion: {}", scan.samples, scan.is_immersion());
    println!("K in [{:.6}, {:.6}]", scan.min_curvature, scan.max_curvature);

    let x = Complex64::new(0.05, 1.05);
    let g = surf.induced_geometry(x)?;
    println!("at {x}: K = {:.6}, Gauss equation −1 − det B = {:.6}, H = {:.2e}", g.curvature, g.gauss_equation, g.mean_curvature());
    let gm = surf.gauss_map(x)?;
    println!("Gauss map ({:.6}, {:.6}), ψ(x) = {:.6}", gm.left, gm.right, psi.apply(x));

    let ex = extract_phi(rec.surface.clone());
    let worst = pts.iter().map(|&p| h2_dist(ex.solve(p).unwrap().1, psi.apply(p))).fold(0.0, f64::max);
    println!("max distance between extracted and original map: {worst:.2e}");
    Ok(())
}

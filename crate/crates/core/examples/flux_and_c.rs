//! Flux of a symplectic flow against its C-invariant, and the vanishing of
//! both for a Hamiltonian flow.

use std::sync::Arc;

use adsflux::fieldcalc::{hyperbolic_metric, IdentityMap, MetricField, PlaneMap};
use adsflux::flow::{FieldSum, FlowMap, SymplecticField};
use adsflux::fuchsian::Surface;
use adsflux::harmonic::{HarmonicBasis, HarmonicPotential};
use adsflux::orbit::BumpSum;
use adsflux::symplect::{c_invariant, flux, swept_flux, FluxQuadrature};
use num_complex::Complex64;

fn main() -> adsflux::error::Result<()> {
    let s = Surface::standard();
    let basis = Arc::new(HarmonicBasis::new(&s)?);
    let h: Arc<dyn MetricField> = Arc::new(hyperbolic_metric());

    let bump = SymplecticField::autonomous(Arc::new(BumpSum::new(&s, &[(Complex64::new(0.1, 0.9), 0.8, 0.15)])));
    let class = [0.3, -0.2, 0.1, 0.25];
    let harmonic = SymplecticField::autonomous(Arc::new(HarmonicPotential::new(basis, class)));

    for (label, field) in [
        ("hamiltonian", Arc::new(bump.clone()) as Arc<dyn adsflux::fieldcalc::VectorField>),
        ("with class", Arc::new(FieldSum(vec![Arc::new(bump), Arc::new(harmonic)]))),
    ] {
        let psi: Arc<dyn PlaneMap> = Arc::new(FlowMap::new(field.clone()).with_steps(128));
        let fl = flux(&*field, &s.loops, FluxQuadrature::default())?;
        let sw = swept_flux(&IdentityMap, &*psi, &s.loops, 16, 8);
        let c = c_invariant(psi, h.clone(), h.clone(), &s.loops)?;
        println!("{label}");
        println!("  flux        {:?}", fl.periods);
        println!("  swept area  {:?}", sw.periods);
        println!("  C mod 2π    {:?}", c.periods);
        println!("  |flux − C|  {:.2e}", fl.reduce().dist(&c));
    }
    println!("target class {class:?}");
    Ok(())
}

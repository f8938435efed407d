//! Harmonic representative of a cohomology class on a triangulated octagon.

use std::sync::Arc;

use adsflux::fieldcalc::CohClass;
use adsflux::fuchsian::Surface;
use adsflux::mesh::{harmonic_oneform, OctagonMesh};

fn main() -> adsflux::error::Result<()> {
    let s = Surface::standard();
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(20);
    let mesh = Arc::new(OctagonMesh::new(&s, n)?);
    let class = CohClass::new([1.0, -0.5, 0.25, 2.0]);
    let form = harmonic_oneform(&s, &class, mesh.clone())?;
    println!("mesh n = {n}: {} vertices", mesh.vertex_count());
    println!("periods    {:?}", form.periods().periods);
    println!("period err {:.2e}", form.periods().sub(&class).max_abs());
    println!("co-closed residual {:.2e}", form.coclosed_residual);
    Ok(())
}

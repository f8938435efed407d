//! Numerical verification toolkit for symplectomorphisms of a closed genus-2
//! hyperbolic surface, the flux homomorphism, the connection-form invariant
//! `C_{h,h'}`, and equivariant spacelike surfaces in anti-de Sitter 3-space.

pub mod adsurf;
pub mod error;
pub mod fieldcalc;
pub mod flow;
pub mod fuchsian;
pub mod harmonic;
pub mod harness;
pub mod hyperbolic;
pub mod jet;
pub mod lie2;
pub mod mat;
pub mod mesh;
pub mod orbit;
pub mod quad;
pub mod symplect;

pub use error::{Error, Result};

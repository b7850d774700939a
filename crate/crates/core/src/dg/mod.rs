//! Uniform 1-D mesh, broken polynomial space and the symmetric interior
//! penalty form.

mod assembly;
mod block;
mod field;
mod legendre;
mod mesh;
mod projection;
mod space;

pub use assembly::{
    assemble_stiffness, broken_norm, broken_norm_error, smooth_load, SmoothFn, StiffnessOperator,
};
pub use block::{BandCholesky, BlockTridiag};
pub use field::Field;
pub use legendre::{legendre_values, legendre_with_derivatives, GaussRule};
pub use mesh::Mesh1D;
pub use projection::{galerkin_project, l2_project};
pub use space::{default_sigma0, DGSpace, SpaceLayout};

//! Q-Wiener noise with `Q = Lambda^{-s}`: truncated expansion, projection
//! onto the dG space, reproducible draws and dyadic coupling.

mod bessel;
mod covariance;
mod model;
mod projector;
mod stream;

pub use bessel::spherical_bessel;
pub use covariance::ModalCovariance;
pub use model::{default_truncation, zeta_tail, NoiseModel};
pub use projector::{project_modes, projected_norms_sq, projected_trace, NoiseProjector};
pub use stream::{coarsen_pair, dyadic_shift, sample_increment, DyadicCascade, NoiseStream};

pub mod cli;
pub mod dg;
pub mod error;
pub mod harness;
pub mod integrators;
pub mod noise;
pub mod observables;
pub mod spectral;

pub use error::{Error, Result};

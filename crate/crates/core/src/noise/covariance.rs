//! Covariance of the projected noise in the eigenbasis of `Lambda_h`.
//!
//! For linear problems the whole state evolves in the eigenbasis, and the
//! projected increment `Phi^T P_h Delta W` is a Gaussian vector of dimension
//! `N_h` with covariance `tau C`, `C = Phi^T P_h Q P_h Phi`. Sampling it via a
//! square root of `C` needs `N_h` normals per step instead of `J`.

use nalgebra::{DMatrix, DVector};

use super::model::NoiseModel;
use super::projector::project_modes;
use crate::dg::DGSpace;
use crate::error::Result;
use crate::spectral::SpectralOperator;

#[derive(Debug, Clone)]
pub struct ModalCovariance {
    cov: DMatrix<f64>,
    root: DMatrix<f64>,
}

impl ModalCovariance {
    pub fn new(model: &NoiseModel, space: &DGSpace, spectral: &SpectralOperator) -> Result<Self> {
        let n = space.n_dofs();
        let modes = project_modes(model, space)?;
        let mut p = DMatrix::zeros(n, modes.len());
        for (j, m) in modes.iter().enumerate() {
            let sq = model.q(j + 1).sqrt();
            for (i, &c) in m.coeffs().iter().enumerate() {
                p[(i, j)] = sq * c;
            }
        }
        let b = spectral.vectors().tr_mul(&p);
        let cov = &b * b.transpose();
        let root = match cov.clone().cholesky() {
            Some(ch) => ch.l(),
            None => {
                let eig = cov.clone().symmetric_eigen();
                let mut v = eig.eigenvectors;
                for (j, &l) in eig.eigenvalues.iter().enumerate() {
                    let s = l.max(0.0).sqrt();
                    v.column_mut(j).scale_mut(s);
                }
                v
            }
        };
        Ok(Self { cov, root })
    }

    pub fn dim(&self) -> usize {
        self.cov.nrows()
    }

    /// `C` (covariance per unit time).
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.cov
    }

    /// Square root `R` with `R R^T = C`.
    pub fn root(&self) -> &DMatrix<f64> {
        &self.root
    }

    /// Per-mode variance rates `C_jj`.
    pub fn diagonal(&self) -> Vec<f64> {
        self.cov.diagonal().iter().copied().collect()
    }

    /// `sqrt(tau) R z` for a vector of standard normals.
    pub fn sample(&self, tau: f64, z: &[f64]) -> Vec<f64> {
        let v = &self.root * DVector::from_column_slice(z);
        v.iter().map(|x| x * tau.sqrt()).collect()
    }
}

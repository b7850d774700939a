//! Eigendecomposition of the discrete operator and everything that is
//! diagonal in its eigenbasis.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::dg::{Field, SpaceLayout, StiffnessOperator};
use crate::error::{Error, Result};

/// Default fraction of the Verlet stability limit used for time steps.
pub const DEFAULT_SAFETY: f64 = 0.9;

/// Eigenpairs of `Lambda_h`, ascending.
#[derive(Debug, Clone)]
pub struct SpectralOperator {
    layout: SpaceLayout,
    h: f64,
    eigenvalues: Vec<f64>,
    // Columns are the L2-orthonormal eigenvectors in modal coordinates.
    vectors: DMatrix<f64>,
}

/// Spectral coefficients of a displacement/velocity pair.
#[derive(Debug, Clone, PartialEq)]
pub struct ModalState {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
}

impl ModalState {
    pub fn zeros(n: usize) -> Self {
        Self {
            a: vec![0.0; n],
            b: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.a.len()
    }

    pub fn is_empty(&self) -> bool {
        self.a.is_empty()
    }
}

/// Full symmetric eigendecomposition of the stiffness matrix.
pub fn decompose(stiffness: &StiffnessOperator) -> Result<SpectralOperator> {
    let layout = stiffness.layout();
    let dense = stiffness.matrix().to_dense();
    let eig = SymmetricEigen::try_new(dense, f64::EPSILON, 0).ok_or(Error::EigenConvergence)?;
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let lmax = order
        .last()
        .map(|&i| eig.eigenvalues[i].abs())
        .unwrap_or(0.0);
    let eigenvalues = order
        .iter()
        .map(|&i| {
            let l = eig.eigenvalues[i];
            if l.abs() <= 1e-12 * lmax {
                0.0
            } else {
                l
            }
        })
        .collect::<Vec<_>>();
    if eigenvalues.iter().any(|&l| l < 0.0) {
        return Err(Error::Singular(format!(
            "stiffness has a negative eigenvalue {:e}",
            eigenvalues[0]
        )));
    }
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        vectors.set_column(c, &eig.eigenvectors.column(i));
    }
    Ok(SpectralOperator {
        layout,
        h: (layout.b - layout.a) / layout.n_elements as f64,
        eigenvalues,
        vectors,
    })
}

/// Largest eigenvalue of the stiffness matrix without forming eigenvectors.
pub fn lambda_max(stiffness: &StiffnessOperator) -> f64 {
    stiffness.matrix().max_eigenvalue(1e-13)
}

/// `safety * 2 / sqrt(lambda_max)`.
pub fn stable_tau(lambda_max: f64, safety: f64) -> f64 {
    safety * 2.0 / lambda_max.sqrt()
}

/// Refuse `tau` unless `tau * sqrt(lambda_max) < 2 * safety`.
pub fn check_cfl(tau: f64, lambda_max: f64, safety: f64) -> Result<()> {
    let product = tau * lambda_max.sqrt();
    let limit = 2.0 * safety;
    if product < limit {
        Ok(())
    } else {
        Err(Error::Cfl { tau, product, limit })
    }
}

/// `lambda^alpha`, erroring on a negative power of a zero eigenvalue.
#[inline]
pub fn mode_power(lambda: f64, alpha: f64) -> Result<f64> {
    if lambda == 0.0 {
        if alpha < 0.0 {
            return Err(Error::ZeroEigenvalue { alpha });
        }
        return Ok(if alpha == 0.0 { 1.0 } else { 0.0 });
    }
    Ok(lambda.powf(alpha))
}

/// Squared m-norm contribution of one mode.
#[inline]
pub fn mode_norm_m_sq(lambda: f64, tau: f64, a: f64, b: f64, alpha: f64) -> Result<f64> {
    let w = 1.0 - tau * tau * lambda / 4.0;
    let pb = if b == 0.0 { 0.0 } else { mode_power(lambda, alpha - 1.0)? };
    Ok(0.5 * mode_power(lambda, alpha)? / w * a * a + 0.5 * pb * b * b)
}

/// `sin(t sqrt(lambda)) / sqrt(lambda)` with the limit `t` at zero.
#[inline]
pub fn sinc_scaled(lambda: f64, t: f64) -> f64 {
    if lambda == 0.0 {
        t
    } else {
        let w = lambda.sqrt();
        (t * w).sin() / w
    }
}

impl SpectralOperator {
    pub fn layout(&self) -> SpaceLayout {
        self.layout
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn n_modes(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// Column `j` is the coefficient vector of `phi_{h,j}`.
    pub fn vectors(&self) -> &DMatrix<f64> {
        &self.vectors
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    /// Empirical `C_s = lambda_max h^2`.
    pub fn cs_estimate(&self) -> f64 {
        self.lambda_max() * self.h * self.h
    }

    pub fn eigenvector(&self, j: usize) -> Field {
        Field::from_layout(self.layout, self.vectors.column(j).iter().copied().collect())
    }

    fn check(&self, u: &Field) -> Result<()> {
        if u.layout() != self.layout {
            return Err(Error::SpaceMismatch(format!(
                "spectral operator on {:?}, field on {:?}",
                self.layout,
                u.layout()
            )));
        }
        Ok(())
    }

    /// Spectral coefficients `(u, phi_{h,j})`.
    pub fn to_modal(&self, u: &Field) -> Result<Vec<f64>> {
        self.check(u)?;
        let c = DVector::from_column_slice(u.coeffs());
        Ok(self.vectors.tr_mul(&c).as_slice().to_vec())
    }

    pub fn from_modal(&self, m: &[f64]) -> Field {
        let v = DVector::from_column_slice(m);
        Field::from_layout(self.layout, (&self.vectors * v).as_slice().to_vec())
    }

    pub fn modal_state(&self, u1: &Field, u2: &Field) -> Result<ModalState> {
        Ok(ModalState {
            a: self.to_modal(u1)?,
            b: self.to_modal(u2)?,
        })
    }

    pub fn fields(&self, s: &ModalState) -> (Field, Field) {
        (self.from_modal(&s.a), self.from_modal(&s.b))
    }

    /// Apply a mode-wise multiplier to a field.
    pub fn apply_multiplier(&self, mult: &[f64], u: &Field) -> Result<Field> {
        let mut m = self.to_modal(u)?;
        for (x, w) in m.iter_mut().zip(mult) {
            *x *= w;
        }
        Ok(self.from_modal(&m))
    }

    /// `lambda_j^alpha` for every mode.
    pub fn power_multiplier(&self, alpha: f64) -> Result<Vec<f64>> {
        self.eigenvalues.iter().map(|&l| mode_power(l, alpha)).collect()
    }

    /// `Lambda_h^alpha u`.
    pub fn frac_power(&self, alpha: f64, u: &Field) -> Result<Field> {
        let mult = self.power_multiplier(alpha)?;
        self.apply_multiplier(&mult, u)
    }

    /// `||Lambda_h^{alpha/2} u||`.
    pub fn norm_h_alpha(&self, u: &Field, alpha: f64) -> Result<f64> {
        let m = self.to_modal(u)?;
        self.modal_norm_h_alpha(&m, alpha)
    }

    pub fn modal_norm_h_alpha(&self, m: &[f64], alpha: f64) -> Result<f64> {
        let mut s = 0.0;
        for (&l, &c) in self.eigenvalues.iter().zip(m) {
            if c != 0.0 {
                s += mode_power(l, alpha)? * c * c;
            }
        }
        Ok(s.sqrt())
    }

    /// `cos(t sqrt(lambda_j))`.
    pub fn trig_cos(&self, t: f64) -> Vec<f64> {
        self.eigenvalues.iter().map(|&l| (t * l.sqrt()).cos()).collect()
    }

    /// `lambda_j^{shift/2} sin(t sqrt(lambda_j))` for `shift` in {-1, 0, 1}.
    pub fn trig_sin_scaled(&self, t: f64, shift: i32) -> Result<Vec<f64>> {
        match shift {
            -1 => Ok(self.eigenvalues.iter().map(|&l| sinc_scaled(l, t)).collect()),
            0 => Ok(self.eigenvalues.iter().map(|&l| (t * l.sqrt()).sin()).collect()),
            1 => Ok(self
                .eigenvalues
                .iter()
                .map(|&l| l.sqrt() * (t * l.sqrt()).sin())
                .collect()),
            _ => Err(Error::InvalidParameter(format!(
                "sine shift must be -1, 0 or 1, got {shift}"
            ))),
        }
    }

    /// Discrete semigroup `E_h(t)` acting on a modal state.
    pub fn semigroup(&self, t: f64, s: &ModalState) -> ModalState {
        let mut out = ModalState::zeros(s.len());
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            let w = l.sqrt();
            let (c, sn) = ((t * w).cos(), (t * w).sin());
            out.a[j] = c * s.a[j] + sinc_scaled(l, t) * s.b[j];
            out.b[j] = -w * sn * s.a[j] + c * s.b[j];
        }
        out
    }

    /// `||s||_{m,alpha}`; requires `tau^2 lambda_max < 4`.
    pub fn norm_m_alpha(&self, tau: f64, s: &ModalState, alpha: f64) -> Result<f64> {
        check_cfl(tau, self.lambda_max(), 1.0)?;
        let mut acc = 0.0;
        for (j, &l) in self.eigenvalues.iter().enumerate() {
            acc += mode_norm_m_sq(l, tau, s.a[j], s.b[j], alpha)?;
        }
        Ok(acc.sqrt())
    }

    /// `|||s|||_{h,alpha}^2 = ||u_1||_{h,alpha}^2 + ||u_2||_{h,alpha-1}^2`.
    pub fn triple_norm_sq(&self, s: &ModalState, alpha: f64) -> Result<f64> {
        Ok(self.modal_norm_h_alpha(&s.a, alpha)?.powi(2)
            + self.modal_norm_h_alpha(&s.b, alpha - 1.0)?.powi(2))
    }

    /// `safety * 2 / sqrt(lambda_max)`.
    pub fn max_stable_tau(&self, safety: f64) -> f64 {
        stable_tau(self.lambda_max(), safety)
    }

    pub fn check_cfl(&self, tau: f64, safety: f64) -> Result<()> {
        check_cfl(tau, self.lambda_max(), safety)
    }
}

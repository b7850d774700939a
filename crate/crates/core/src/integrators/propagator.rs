//! Mode-wise one-step maps of the linear, noise-free schemes.

use rustfft::num_complex::Complex64;

use super::Scheme;
use crate::error::Result;
use crate::spectral::{check_cfl, sinc_scaled, ModalState, SpectralOperator};

/// Affine one-step map of a single mode: `y' = K y + d g`, where `g` is the
/// mode's forcing (noise plus `tau` times the projected nonlinearity).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModeKernel {
    pub k: [[f64; 2]; 2],
    pub d: [f64; 2],
}

impl ModeKernel {
    /// Noise-free position Verlet block and `D = [tau/2, 1]`.
    pub fn svm(lambda: f64, tau: f64) -> Self {
        let t2 = tau * tau * lambda;
        Self {
            k: [
                [1.0 - 0.5 * t2, tau - 0.25 * tau * t2],
                [-tau * lambda, 1.0 - 0.5 * t2],
            ],
            d: [0.5 * tau, 1.0],
        }
    }

    /// `E_h(tau)` applied after adding the forcing to the velocity.
    pub fn stm(lambda: f64, tau: f64) -> Self {
        let w = lambda.sqrt();
        let (s, c) = (tau * w).sin_cos();
        let sc = sinc_scaled(lambda, tau);
        Self {
            k: [[c, sc], [-w * s, c]],
            d: [sc, c],
        }
    }

    /// Inverse of `[[1, -tau], [tau lambda, 1]]`.
    pub fn sem(lambda: f64, tau: f64) -> Self {
        let det = 1.0 + tau * tau * lambda;
        Self {
            k: [[1.0 / det, tau / det], [-tau * lambda / det, 1.0 / det]],
            d: [tau / det, 1.0 / det],
        }
    }

    pub fn for_scheme(scheme: Scheme, lambda: f64, tau: f64) -> Self {
        match scheme {
            Scheme::Svm => Self::svm(lambda, tau),
            Scheme::Stm => Self::stm(lambda, tau),
            Scheme::Sem => Self::sem(lambda, tau),
        }
    }

    #[inline]
    pub fn apply(&self, a: f64, b: f64, g: f64) -> (f64, f64) {
        (
            self.k[0][0] * a + self.k[0][1] * b + self.d[0] * g,
            self.k[1][0] * a + self.k[1][1] * b + self.d[1] * g,
        )
    }

    /// Eigenvalues of `K` from its trace and determinant.
    pub fn eigenvalues(&self) -> (Complex64, Complex64) {
        block_eigenvalues(self.k)
    }

    /// Spectral radius of `K`.
    pub fn spectral_radius(&self) -> f64 {
        let (a, b) = self.eigenvalues();
        a.norm().max(b.norm())
    }
}

/// Eigenvalues of a real 2x2 matrix.
pub fn block_eigenvalues(m: [[f64; 2]; 2]) -> (Complex64, Complex64) {
    let tr = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let half = 0.5 * tr;
    let disc = half * half - det;
    if disc >= 0.0 {
        let r = disc.sqrt();
        (Complex64::new(half + r, 0.0), Complex64::new(half - r, 0.0))
    } else {
        let r = (-disc).sqrt();
        (Complex64::new(half, r), Complex64::new(half, -r))
    }
}

/// The Verlet propagator `M(tau)` in the eigenbasis of `Lambda_h`.
#[derive(Debug, Clone)]
pub struct PropagatorM {
    tau: f64,
    blocks: Vec<ModeKernel>,
}

impl PropagatorM {
    /// Requires strict CFL unless `allow_unstable` is set.
    pub fn new(spectral: &SpectralOperator, tau: f64, allow_unstable: bool) -> Result<Self> {
        if !allow_unstable {
            check_cfl(tau, spectral.lambda_max(), 1.0)?;
        }
        Ok(Self::from_eigenvalues(spectral.eigenvalues(), tau))
    }

    pub fn from_eigenvalues(lambdas: &[f64], tau: f64) -> Self {
        Self {
            tau,
            blocks: lambdas.iter().map(|&l| ModeKernel::svm(l, tau)).collect(),
        }
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn blocks(&self) -> &[ModeKernel] {
        &self.blocks
    }

    pub fn eigenvalues(&self) -> Vec<(Complex64, Complex64)> {
        self.blocks.iter().map(|b| b.eigenvalues()).collect()
    }
}

/// `M v` mode by mode.
pub fn propagator_apply(m: &PropagatorM, v: &ModalState) -> ModalState {
    let mut out = ModalState::zeros(v.len());
    for (j, blk) in m.blocks.iter().enumerate() {
        let (a, b) = blk.apply(v.a[j], v.b[j], 0.0);
        out.a[j] = a;
        out.b[j] = b;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_mode_eigenvalues() {
        let (p, m) = ModeKernel::svm(1.0, 1.0).eigenvalues();
        assert!((p.re - 0.5).abs() < 1e-15 && (p.im - 0.75f64.sqrt()).abs() < 1e-15);
        assert!((m.im + 0.75f64.sqrt()).abs() < 1e-15);
        assert!((p.norm() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn outside_cfl_grows() {
        // tau^2 lambda = 5
        let k = ModeKernel::svm(5.0, 1.0);
        assert!(k.spectral_radius() > 1.0);
        let (mut a, mut b) = (1.0, 0.0);
        let mut prev = 1.0;
        for _ in 0..100 {
            (a, b) = k.apply(a, b, 0.0);
            let n = (a * a + b * b).sqrt();
            assert!(n > prev);
            prev = n;
        }
    }

    #[test]
    fn sem_hand_solution() {
        let (a, b) = ModeKernel::sem(1.0, 1.0).apply(1.0, 0.0, 0.0);
        assert!((a - 0.5).abs() < 1e-15 && (b + 0.5).abs() < 1e-15);
        assert!(ModeKernel::sem(3.0, 0.1).spectral_radius() < 1.0);
    }

    #[test]
    fn schemes_agree_for_free_mode() {
        for s in [Scheme::Svm, Scheme::Stm, Scheme::Sem] {
            let k = ModeKernel::for_scheme(s, 0.0, 0.3);
            let (a, b) = k.apply(1.0, 2.0, 0.0);
            assert!((a - 1.6).abs() < 1e-15 && (b - 2.0).abs() < 1e-15, "{s:?}");
        }
    }

    #[test]
    fn stm_kernel_composes() {
        let k1 = ModeKernel::stm(7.0, 0.1);
        let k2 = ModeKernel::stm(7.0, 0.2);
        let (a, b) = k1.apply(0.3, -1.2, 0.0);
        let (a, b) = k1.apply(a, b, 0.0);
        let (c, d) = k2.apply(0.3, -1.2, 0.0);
        assert!((a - c).abs() < 1e-14 && (b - d).abs() < 1e-14);
    }
}

//! L2 projection of the noise eigenfunctions onto the dG space.
//!
//! On element `e` of a uniform mesh with `N` cells, the integral of
//! `psi_j` against `phi_k` has the closed form
//! `sqrt(2/L) sqrt((2k+1) h) j_k(omega_j) Im(i^k exp(i theta_je))` with
//! `omega_j = j pi / (2N)` and `theta_je = j pi (2e+1) / (2N)`, from
//! `int_{-1}^{1} exp(i w x) P_k(x) dx = 2 i^k j_k(w)`. Quadrature would alias
//! the modes the mesh cannot resolve, so it is not used here.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use super::bessel::spherical_bessel;
use super::model::NoiseModel;
use crate::dg::{DGSpace, Field, SpaceLayout};
use crate::error::{Error, Result};

fn check_domain(model: &NoiseModel, space: &DGSpace) -> Result<()> {
    let m = space.mesh();
    let tol = 1e-12 * model.length();
    if (m.a() - model.a()).abs() > tol || (m.length() - model.length()).abs() > tol {
        return Err(Error::SpaceMismatch(
            "noise model and space cover different intervals".into(),
        ));
    }
    Ok(())
}

/// Coefficients of `P_h psi_j` on element `e` (local index `k`).
fn mode_coefficients(model: &NoiseModel, space: &DGSpace, j: usize, out: &mut [f64]) {
    let n = space.n_elements();
    let nb = space.local_dofs();
    let h = space.h();
    let omega = j as f64 * PI / (2 * n) as f64;
    let jk = spherical_bessel(space.degree(), omega);
    let amp = (2.0 / model.length()).sqrt();
    for e in 0..n {
        let theta = j as f64 * PI * (2 * e + 1) as f64 / (2 * n) as f64;
        let (s, c) = theta.sin_cos();
        for k in 0..nb {
            // Im(i^k e^{i theta}) cycles through sin, cos, -sin, -cos.
            let im = match k % 4 {
                0 => s,
                1 => c,
                2 => -s,
                _ => -c,
            };
            out[e * nb + k] = amp * ((2 * k + 1) as f64 * h).sqrt() * jk[k] * im;
        }
    }
}

/// `P_h psi_j` for `j = 1 ..= J`.
pub fn project_modes(model: &NoiseModel, space: &DGSpace) -> Result<Vec<Field>> {
    check_domain(model, space)?;
    let mut out = Vec::with_capacity(model.n_modes());
    for j in 1..=model.n_modes() {
        let mut c = vec![0.0; space.n_dofs()];
        mode_coefficients(model, space, j, &mut c);
        out.push(Field::from_coeffs(space, c)?);
    }
    Ok(out)
}

/// `||P_h psi_j||^2` for `j = 1 ..= J`.
pub fn projected_norms_sq(model: &NoiseModel, space: &DGSpace) -> Result<Vec<f64>> {
    check_domain(model, space)?;
    let mut c = vec![0.0; space.n_dofs()];
    Ok((1..=model.n_modes())
        .map(|j| {
            mode_coefficients(model, space, j, &mut c);
            c.iter().map(|x| x * x).sum()
        })
        .collect())
}

/// `Tr(P_h Q P_h) = sum_j q_j ||P_h psi_j||^2`.
pub fn projected_trace(model: &NoiseModel, space: &DGSpace) -> Result<f64> {
    let norms = projected_norms_sq(model, space)?;
    Ok(norms.iter().enumerate().map(|(i, n)| model.q(i + 1) * n).sum())
}

/// Fast evaluation of `sum_j c_j P_h psi_j` by folding modes modulo `2N`
/// and one inverse FFT per local degree.
#[derive(Clone)]
pub struct NoiseProjector {
    layout: SpaceLayout,
    n_elements: usize,
    local: usize,
    n_modes: usize,
    // Per local degree k: scale sqrt(2/L) sqrt((2k+1) h).
    scale: Vec<f64>,
    // weights[k][j-1] = j_k(omega_j) exp(i pi j / (2N)).
    weights: Vec<Vec<Complex64>>,
    fft: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for NoiseProjector {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NoiseProjector")
            .field("layout", &self.layout)
            .field("n_modes", &self.n_modes)
            .finish()
    }
}

impl NoiseProjector {
    pub fn new(model: &NoiseModel, space: &DGSpace) -> Result<Self> {
        check_domain(model, space)?;
        let n = space.n_elements();
        let nb = space.local_dofs();
        let h = space.h();
        let amp = (2.0 / model.length()).sqrt();
        let scale = (0..nb).map(|k| amp * ((2 * k + 1) as f64 * h).sqrt()).collect();
        let mut weights = vec![Vec::with_capacity(model.n_modes()); nb];
        for j in 1..=model.n_modes() {
            let omega = j as f64 * PI / (2 * n) as f64;
            let jk = spherical_bessel(space.degree(), omega);
            // e^{i pi j / (2N)}: the half-cell offset of element centres.
            let phase = Complex64::from_polar(1.0, omega);
            for k in 0..nb {
                weights[k].push(phase * jk[k]);
            }
        }
        let fft = FftPlanner::new().plan_fft_inverse(2 * n);
        Ok(Self {
            layout: space.layout(),
            n_elements: n,
            local: nb,
            n_modes: model.n_modes(),
            scale,
            weights,
            fft,
        })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn layout(&self) -> SpaceLayout {
        self.layout
    }

    /// Coefficients of `sum_{j <= len} c_j P_h psi_j` written to `out`.
    /// `c` may be shorter than the model's truncation.
    pub fn project_into(&self, c: &[f64], out: &mut [f64]) {
        let n = self.n_elements;
        let m = 2 * n;
        let nb = self.local;
        let len = c.len().min(self.n_modes);
        let mut buf = vec![Complex64::new(0.0, 0.0); m];
        let mut scratch = vec![Complex64::new(0.0, 0.0); self.fft.get_inplace_scratch_len()];
        for k in 0..nb {
            buf.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
            let w = &self.weights[k];
            for jm1 in 0..len {
                let j = jm1 + 1;
                buf[j % m] += w[jm1] * c[jm1];
            }
            self.fft.process_with_scratch(&mut buf, &mut scratch);
            let sc = self.scale[k];
            for e in 0..n {
                let z = buf[e];
                let im = match k % 4 {
                    0 => z.im,
                    1 => z.re,
                    2 => -z.im,
                    _ => -z.re,
                };
                out[e * nb + k] = sc * im;
            }
        }
    }

    pub fn project(&self, c: &[f64]) -> Field {
        let mut out = vec![0.0; self.layout.n_dofs()];
        self.project_into(c, &mut out);
        Field::from_layout(self.layout, out)
    }
}

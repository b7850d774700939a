use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use super::nonlinearity::Nonlinearity;
use crate::dg::{
    assemble_stiffness, galerkin_project, l2_project, BandCholesky, DGSpace, Field, SmoothFn,
    StiffnessOperator,
};
use crate::error::{Error, Result};
use crate::spectral::{check_cfl, decompose, lambda_max, sinc_scaled, SpectralOperator, DEFAULT_SAFETY};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    /// Stochastic position Verlet.
    Svm,
    /// Stochastic trigonometric method.
    Stm,
    /// Semi-implicit Euler–Maruyama.
    Sem,
}

impl Scheme {
    pub const ALL: [Scheme; 3] = [Scheme::Svm, Scheme::Stm, Scheme::Sem];

    pub fn name(&self) -> &'static str {
        match self {
            Scheme::Svm => "svm",
            Scheme::Stm => "stm",
            Scheme::Sem => "sem",
        }
    }

    /// Only the explicit scheme is subject to the CFL restriction.
    pub fn is_explicit(&self) -> bool {
        matches!(self, Scheme::Svm)
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "svm" => Ok(Scheme::Svm),
            "stm" => Ok(Scheme::Stm),
            "sem" => Ok(Scheme::Sem),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Space, stiffness and spectral data shared by all steppers on one mesh.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub space: DGSpace,
    pub stiffness: StiffnessOperator,
    pub lambda_max: f64,
    pub spectral: Option<SpectralOperator>,
}

impl Discretization {
    /// Banded data only; `lambda_max` by inertia bisection.
    pub fn new(space: DGSpace) -> Self {
        let stiffness = assemble_stiffness(&space);
        let lambda_max = lambda_max(&stiffness);
        Self {
            space,
            stiffness,
            lambda_max,
            spectral: None,
        }
    }

    /// Including the full eigendecomposition.
    pub fn with_spectral(space: DGSpace) -> Result<Self> {
        let stiffness = assemble_stiffness(&space);
        let spectral = decompose(&stiffness)?;
        Ok(Self {
            space,
            stiffness,
            lambda_max: spectral.lambda_max(),
            spectral: Some(spectral),
        })
    }

    pub fn spectral(&self) -> Result<&SpectralOperator> {
        self.spectral
            .as_ref()
            .ok_or_else(|| Error::InvalidParameter("spectral decomposition not available".into()))
    }

    pub fn max_stable_tau(&self, safety: f64) -> f64 {
        crate::spectral::stable_tau(self.lambda_max, safety)
    }

    /// Empirical `lambda_max h^2`.
    pub fn cs_estimate(&self) -> f64 {
        self.lambda_max * self.space.h().powi(2)
    }
}

/// How the initial velocity is mapped into `V_h`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VelocityProjection {
    #[default]
    L2,
    Galerkin,
}

/// Displacement and velocity.
#[derive(Debug, Clone, PartialEq)]
pub struct State {
    pub u1: Field,
    pub u2: Field,
}

impl State {
    pub fn new(u1: Field, u2: Field) -> Result<Self> {
        u1.same_space(&u2)?;
        Ok(Self { u1, u2 })
    }

    pub fn zeros(space: &DGSpace) -> Self {
        Self {
            u1: Field::zeros(space),
            u2: Field::zeros(space),
        }
    }

    /// `u_{h,0} = Pi_h u_0` and `v_{h,0} = P_h v_0` (or `Pi_h v_0`).
    pub fn from_initial(
        disc: &Discretization,
        u0: &SmoothFn,
        v0: &SmoothFn,
        velocity: VelocityProjection,
    ) -> Result<Self> {
        let u1 = galerkin_project(&disc.space, &disc.stiffness, u0)?;
        let u2 = match velocity {
            VelocityProjection::L2 => l2_project(&disc.space, |x| v0.value(x)),
            VelocityProjection::Galerkin => galerkin_project(&disc.space, &disc.stiffness, v0)?,
        };
        Ok(Self { u1, u2 })
    }
}

/// Stability policy for the explicit scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CflPolicy {
    pub safety: f64,
    pub allow_unstable: bool,
}

impl Default for CflPolicy {
    fn default() -> Self {
        Self {
            safety: DEFAULT_SAFETY,
            allow_unstable: false,
        }
    }
}

/// One-step map of a scheme on a fixed discretization and step size.
pub struct Stepper<'a> {
    scheme: Scheme,
    tau: f64,
    disc: &'a Discretization,
    f: &'a Nonlinearity,
    sem: Option<BandCholesky>,
    // cos(tau w), sin(tau w)/w, w sin(tau w) per eigenmode.
    trig: Option<[Vec<f64>; 3]>,
}

impl<'a> Stepper<'a> {
    pub fn new(
        scheme: Scheme,
        tau: f64,
        disc: &'a Discretization,
        f: &'a Nonlinearity,
        policy: CflPolicy,
    ) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::InvalidParameter(format!("tau must be positive, got {tau}")));
        }
        if scheme.is_explicit() && !policy.allow_unstable {
            check_cfl(tau, disc.lambda_max, policy.safety)?;
        }
        let sem = match scheme {
            Scheme::Sem => Some(BandCholesky::factor(
                &disc.stiffness.matrix().shifted(1.0, tau * tau),
            )?),
            _ => None,
        };
        let trig = match scheme {
            Scheme::Stm => {
                let op = disc.spectral()?;
                let ev = op.eigenvalues();
                Some([
                    ev.iter().map(|&l| (tau * l.sqrt()).cos()).collect(),
                    ev.iter().map(|&l| sinc_scaled(l, tau)).collect(),
                    ev.iter().map(|&l| l.sqrt() * (tau * l.sqrt()).sin()).collect(),
                ])
            }
            _ => None,
        };
        Ok(Self {
            scheme,
            tau,
            disc,
            f,
            sem,
            trig,
        })
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn discretization(&self) -> &Discretization {
        self.disc
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        self.f
    }

    /// Advance one step; `increment` holds the coefficients of `P_h Delta W`.
    pub fn step(&self, state: &mut State, increment: Option<&[f64]>) {
        match self.scheme {
            Scheme::Svm => self.svm_step(state, increment),
            Scheme::Stm => self.stm_step(state, increment),
            Scheme::Sem => self.sem_step(state, increment),
        }
    }

    /// Half drift, kick with stiffness, forcing and noise, half drift.
    pub fn svm_step(&self, state: &mut State, increment: Option<&[f64]>) {
        let tau = self.tau;
        let space = &self.disc.space;
        let u1 = state.u1.coeffs_mut();
        let u2 = state.u2.coeffs_mut();
        for (x, v) in u1.iter_mut().zip(u2.iter()) {
            *x += 0.5 * tau * v;
        }
        let au = self.disc.stiffness.matrix().mul_vec(u1);
        for (v, a) in u2.iter_mut().zip(&au) {
            *v -= tau * a;
        }
        self.f.project_into(space, u1, tau, u2);
        if let Some(w) = increment {
            for (v, dw) in u2.iter_mut().zip(w) {
                *v += dw;
            }
        }
        for (x, v) in u1.iter_mut().zip(u2.iter()) {
            *x += 0.5 * tau * v;
        }
    }

    /// `X' = E(tau) (X + B (tau P_h f(X_1) + P_h Delta W))`.
    pub fn stm_step(&self, state: &mut State, increment: Option<&[f64]>) {
        let [c, sc, ws] = self.trig.as_ref().expect("STM stepper without spectral data");
        let op = self.disc.spectral.as_ref().expect("STM stepper without spectral data");
        let space = &self.disc.space;
        let u1 = state.u1.coeffs_mut();
        let u2 = state.u2.coeffs_mut();
        self.f.project_into(space, u1, self.tau, u2);
        if let Some(w) = increment {
            for (v, dw) in u2.iter_mut().zip(w) {
                *v += dw;
            }
        }
        let phi = op.vectors();
        let a = phi.tr_mul(&DVector::from_column_slice(u1));
        let b = phi.tr_mul(&DVector::from_column_slice(u2));
        let mut na = DVector::zeros(a.len());
        let mut nb = DVector::zeros(a.len());
        for j in 0..a.len() {
            na[j] = c[j] * a[j] + sc[j] * b[j];
            nb[j] = -ws[j] * a[j] + c[j] * b[j];
        }
        u1.copy_from_slice((phi * na).as_slice());
        u2.copy_from_slice((phi * nb).as_slice());
    }

    /// `(I - tau A_h) X' = X + B (tau P_h f(X_1) + P_h Delta W)`.
    pub fn sem_step(&self, state: &mut State, increment: Option<&[f64]>) {
        let tau = self.tau;
        let chol = self.sem.as_ref().expect("SEM stepper without factorization");
        let space = &self.disc.space;
        let u1 = state.u1.coeffs_mut();
        let u2 = state.u2.coeffs_mut();
        self.f.project_into(space, u1, tau, u2);
        if let Some(w) = increment {
            for (v, dw) in u2.iter_mut().zip(w) {
                *v += dw;
            }
        }
        // (I + tau^2 A) X_1' = r_1 + tau r_2, then X_2' = r_2 - tau A X_1'.
        for (x, v) in u1.iter_mut().zip(u2.iter()) {
            *x += tau * v;
        }
        chol.solve_in_place(u1);
        let au = self.disc.stiffness.matrix().mul_vec(u1);
        for (v, a) in u2.iter_mut().zip(&au) {
            *v -= tau * a;
        }
    }
}

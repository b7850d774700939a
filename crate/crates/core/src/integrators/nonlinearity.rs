use std::sync::Arc;

use crate::dg::{DGSpace, Field};
use crate::error::{Error, Result};

type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityKind {
    Zero,
    LinearDamping,
    SineGordon,
    Custom,
}

/// Pointwise forcing `f(u)` with a declared Lipschitz bound and, optionally,
/// a potential `V` with `V' = -f`.
#[derive(Clone)]
pub struct Nonlinearity {
    kind: NonlinearityKind,
    f: ScalarFn,
    potential: Option<ScalarFn>,
    lipschitz: f64,
}

impl std::fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("kind", &self.kind)
            .field("lipschitz", &self.lipschitz)
            .field("has_potential", &self.potential.is_some())
            .finish()
    }
}

impl Nonlinearity {
    pub fn zero() -> Self {
        Self {
            kind: NonlinearityKind::Zero,
            f: Arc::new(|_| 0.0),
            potential: Some(Arc::new(|_| 0.0)),
            lipschitz: 0.0,
        }
    }

    /// `f(u) = -u`, `V(u) = u^2 / 2`.
    pub fn linear_damping() -> Self {
        Self {
            kind: NonlinearityKind::LinearDamping,
            f: Arc::new(|u| -u),
            potential: Some(Arc::new(|u| 0.5 * u * u)),
            lipschitz: 1.0,
        }
    }

    /// `f(u) = -sin(u)`, `V(u) = 1 - cos(u)`.
    pub fn sine_gordon() -> Self {
        Self {
            kind: NonlinearityKind::SineGordon,
            f: Arc::new(|u: f64| -u.sin()),
            potential: Some(Arc::new(|u: f64| 1.0 - u.cos())),
            lipschitz: 1.0,
        }
    }

    /// User forcing without a potential.
    pub fn custom(f: impl Fn(f64) -> f64 + Send + Sync + 'static, lipschitz: f64) -> Result<Self> {
        check_lipschitz(lipschitz)?;
        Ok(Self {
            kind: NonlinearityKind::Custom,
            f: Arc::new(f),
            potential: None,
            lipschitz,
        })
    }

    /// User forcing with potential; `V' = -f` is spot-checked by central
    /// differences at ten points of [-2, 2].
    pub fn custom_with_potential(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        potential: impl Fn(f64) -> f64 + Send + Sync + 'static,
        lipschitz: f64,
    ) -> Result<Self> {
        check_lipschitz(lipschitz)?;
        let step = 1e-5;
        for i in 0..10 {
            let x = -2.0 + 4.0 * i as f64 / 9.0;
            let dv = (potential(x + step) - potential(x - step)) / (2.0 * step);
            let r = (dv + f(x)).abs();
            if r >= 1e-6 {
                return Err(Error::InvalidParameter(format!(
                    "potential does not match forcing at u = {x}: |V' + f| = {r:e}"
                )));
            }
        }
        Ok(Self {
            kind: NonlinearityKind::Custom,
            f: Arc::new(f),
            potential: Some(Arc::new(potential)),
            lipschitz,
        })
    }

    pub fn kind(&self) -> NonlinearityKind {
        self.kind
    }

    pub fn is_zero(&self) -> bool {
        self.kind == NonlinearityKind::Zero
    }

    pub fn lipschitz(&self) -> f64 {
        self.lipschitz
    }

    pub fn has_potential(&self) -> bool {
        self.potential.is_some()
    }

    pub fn eval(&self, u: f64) -> f64 {
        (self.f)(u)
    }

    pub fn potential(&self, u: f64) -> Option<f64> {
        self.potential.as_ref().map(|v| v(u))
    }

    /// `P_h f(u)` by the space's Gauss rule, accumulated into `out`
    /// with weight `scale`.
    pub fn project_into(&self, space: &DGSpace, u: &[f64], scale: f64, out: &mut [f64]) {
        if self.is_zero() {
            return;
        }
        let nb = space.local_dofs();
        let nq = space.quadrature().len();
        for e in 0..space.n_elements() {
            let ue = &u[e * nb..(e + 1) * nb];
            let oe = &mut out[e * nb..(e + 1) * nb];
            for q in 0..nq {
                let mut val = 0.0;
                for (k, c) in ue.iter().enumerate() {
                    val += c * space.basis_at_quad(q, k);
                }
                let g = scale * space.quad_weight(q) * (self.f)(val);
                for (k, o) in oe.iter_mut().enumerate() {
                    *o += g * space.basis_at_quad(q, k);
                }
            }
        }
    }

    pub fn project(&self, space: &DGSpace, u: &Field) -> Result<Field> {
        if u.layout() != space.layout() {
            return Err(Error::SpaceMismatch("field does not belong to space".into()));
        }
        let mut out = vec![0.0; space.n_dofs()];
        self.project_into(space, u.coeffs(), 1.0, &mut out);
        Field::from_coeffs(space, out)
    }

    /// `int V(u) dx` by the space's Gauss rule (zero without a potential).
    pub fn integrate_potential(&self, space: &DGSpace, u: &Field) -> f64 {
        let Some(v) = &self.potential else {
            return 0.0;
        };
        if self.is_zero() {
            return 0.0;
        }
        let nb = space.local_dofs();
        let c = u.coeffs();
        let mut acc = 0.0;
        for e in 0..space.n_elements() {
            for q in 0..space.quadrature().len() {
                let val: f64 = (0..nb).map(|k| c[e * nb + k] * space.basis_at_quad(q, k)).sum();
                acc += space.quad_weight(q) * v(val);
            }
        }
        acc
    }
}

fn check_lipschitz(l: f64) -> Result<()> {
    if !(l >= 0.0 && l.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "Lipschitz bound must be finite and non-negative, got {l}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::l2_project;

    #[test]
    fn potential_pairing_is_checked() {
        assert!(Nonlinearity::custom_with_potential(|u| -u * u * u, |u| 0.25 * u.powi(4), 12.0).is_ok());
        assert!(Nonlinearity::custom_with_potential(|u| -u, |u| u * u, 1.0).is_err());
        assert!(Nonlinearity::custom(|u| u, f64::INFINITY).is_err());
    }

    #[test]
    fn linear_damping_projection_is_exact() {
        let space = DGSpace::unit(6, 2).unwrap();
        let u = l2_project(&space, |x| (3.0 * x).cos());
        let pf = Nonlinearity::linear_damping().project(&space, &u).unwrap();
        for (a, b) in pf.coeffs().iter().zip(u.coeffs()) {
            assert!((a + b).abs() < 1e-14);
        }
    }

    #[test]
    fn sine_gordon_potential_of_zero_is_zero() {
        let space = DGSpace::unit(4, 1).unwrap();
        let z = Field::zeros(&space);
        assert_eq!(Nonlinearity::sine_gordon().integrate_potential(&space, &z), 0.0);
        let one = l2_project(&space, |_| 1.0);
        let v = Nonlinearity::sine_gordon().integrate_potential(&space, &one);
        assert!((v - (1.0 - 1f64.cos())).abs() < 1e-14);
    }
}

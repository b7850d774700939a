use super::assembly::{smooth_load, SmoothFn, StiffnessOperator};
use super::block::BandCholesky;
use super::field::Field;
use super::space::DGSpace;
use crate::error::{Error, Result};

/// Quadrature L2 projection `P_h f`.
pub fn l2_project(space: &DGSpace, f: impl Fn(f64) -> f64) -> Field {
    let nb = space.local_dofs();
    let nq = space.quadrature().len();
    let mut coeffs = vec![0.0; space.n_dofs()];
    for e in 0..space.n_elements() {
        for q in 0..nq {
            let wf = space.quad_weight(q) * f(space.quad_point(e, q));
            for k in 0..nb {
                coeffs[e * nb + k] += wf * space.basis_at_quad(q, k);
            }
        }
    }
    Field::from_layout(space.layout(), coeffs)
}

/// Galerkin (elliptic) projection: `B_h(Pi_h f - f, v) = 0` for all `v`.
pub fn galerkin_project(space: &DGSpace, stiffness: &StiffnessOperator, f: &SmoothFn) -> Result<Field> {
    if stiffness.layout() != space.layout() {
        return Err(Error::SpaceMismatch("stiffness assembled on another space".into()));
    }
    let chol = BandCholesky::factor(stiffness.matrix())?;
    let mut b = smooth_load(space, f);
    chol.solve_in_place(&mut b);
    Ok(Field::from_layout(space.layout(), b))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{assemble_stiffness, broken_norm_error};
    use std::f64::consts::PI;

    fn rates(errs: &[f64]) -> Vec<f64> {
        errs.windows(2).map(|w| (w[0] / w[1]).log2()).collect()
    }

    #[test]
    fn l2_projection_is_idempotent_and_reproduces_polynomials() {
        let space = DGSpace::unit(7, 2).unwrap();
        let u = l2_project(&space, |x| x * (1.0 - x));
        for x in [0.0, 0.2, 0.55, 0.91] {
            assert!((u.evaluate(&space, x).unwrap() - x * (1.0 - x)).abs() < 1e-14);
        }
        let v = l2_project(&space, |x| u.evaluate(&space, x).unwrap());
        for (a, b) in u.coeffs().iter().zip(v.coeffs()) {
            assert!((a - b).abs() < 1e-13);
        }
    }

    #[test]
    fn l2_projection_error_is_second_order_for_linears() {
        let mut errs = Vec::new();
        for n in [16usize, 32, 64, 128] {
            let space = DGSpace::unit(n, 1).unwrap();
            let u = l2_project(&space, |x| (PI * x).sin());
            // ||f - P_h f||^2 = ||f||^2 - ||P_h f||^2 for an orthogonal projection.
            let e2 = 0.5 - u.norm().powi(2);
            errs.push(e2.max(0.0).sqrt());
        }
        for r in rates(&errs) {
            assert!((r - 2.0).abs() < 0.2, "{errs:?}");
        }
    }

    #[test]
    fn galerkin_projection_rates() {
        let f = SmoothFn::sine(1.0, 0.0, 1.0, 1.0);
        let mut e_star = Vec::new();
        let mut e_l2 = Vec::new();
        for n in [16usize, 32, 64, 128] {
            let space = DGSpace::unit(n, 1).unwrap();
            let stiff = assemble_stiffness(&space);
            let u = galerkin_project(&space, &stiff, &f).unwrap();
            e_star.push(broken_norm_error(&space, &f, &u).unwrap());
            let rule = crate::dg::GaussRule::new(8);
            let mut acc = 0.0;
            for e in 0..n {
                let lo = space.mesh().vertex(e);
                let hi = space.mesh().vertex(e + 1);
                acc += rule.integrate(lo, hi, |x| {
                    let d = (PI * x).sin() - u.evaluate(&space, x.min(hi)).unwrap();
                    d * d
                });
            }
            e_l2.push(acc.sqrt());
        }
        for r in rates(&e_star) {
            assert!((r - 1.0).abs() < 0.2, "{e_star:?}");
        }
        for r in rates(&e_l2) {
            assert!((r - 2.0).abs() < 0.2, "{e_l2:?}");
        }
    }

    #[test]
    fn galerkin_projection_fixes_continuous_members() {
        // Continuous piecewise quadratic with zero boundary values and a C^1
        // junction: x(1-x) is a global polynomial, so it lies in V_h.
        let space = DGSpace::unit(5, 2).unwrap();
        let stiff = assemble_stiffness(&space);
        let f = SmoothFn::new(|x| x * (1.0 - x), |x| 1.0 - 2.0 * x, |_| -2.0);
        let u = galerkin_project(&space, &stiff, &f).unwrap();
        let p = l2_project(&space, |x| x * (1.0 - x));
        for (a, b) in u.coeffs().iter().zip(p.coeffs()) {
            assert!((a - b).abs() < 1e-11);
        }
    }

    #[test]
    fn under_penalized_form_is_singular() {
        let mesh = crate::dg::Mesh1D::unit(6).unwrap();
        let space = DGSpace::without_probe(mesh, 1, Some(0.01)).unwrap();
        let stiff = assemble_stiffness(&space);
        let f = SmoothFn::sine(1.0, 0.0, 1.0, 1.0);
        assert!(matches!(
            galerkin_project(&space, &stiff, &f),
            Err(Error::Singular(_))
        ));
    }
}

use crate::dg::{DGSpace, Field, GaussRule};
use crate::error::{Error, Result};

/// `||u_c - u_r||` with the coarse field evaluated at the reference space's
/// quadrature points. The reference mesh must refine the coarse one.
pub fn strong_error(
    coarse_space: &DGSpace,
    coarse: &Field,
    reference_space: &DGSpace,
    reference: &Field,
) -> Result<f64> {
    if !coarse_space.mesh().same_domain(reference_space.mesh()) {
        return Err(Error::SpaceMismatch("coarse and reference cover different domains".into()));
    }
    if coarse.layout() != coarse_space.layout() || reference.layout() != reference_space.layout() {
        return Err(Error::SpaceMismatch("field does not belong to its space".into()));
    }
    let nc = coarse_space.n_elements();
    let nr = reference_space.n_elements();
    if nr < nc || nr % nc != 0 {
        return Err(Error::InvalidParameter(format!(
            "reference mesh ({nr} cells) does not refine the coarse mesh ({nc} cells)"
        )));
    }
    // Enough points for the product of both degrees.
    let rule = GaussRule::new(coarse_space.degree().max(reference_space.degree()) + 2);
    let ratio = nr / nc;
    let (bc, br) = (coarse_space.local_dofs(), reference_space.local_dofs());
    let (cc, cr) = (coarse.coeffs(), reference.coeffs());
    let mut acc = 0.0;
    for e in 0..nr {
        let lo = reference_space.mesh().vertex(e);
        let hi = reference_space.mesh().vertex(e + 1);
        let ec = e / ratio;
        acc += rule.integrate(lo, hi, |x| {
            let (pc, _, _) = coarse_space.basis_at(ec, x);
            let (pr, _, _) = reference_space.basis_at(e, x);
            let uc: f64 = (0..bc).map(|k| cc[ec * bc + k] * pc[k]).sum();
            let ur: f64 = (0..br).map(|k| cr[e * br + k] * pr[k]).sum();
            (uc - ur).powi(2)
        });
    }
    Ok(acc.sqrt())
}

/// `||u_h - g||` by element-wise Gauss quadrature of order `p + 6`.
pub fn l2_error_vs_fn(space: &DGSpace, u: &Field, g: impl Fn(f64) -> f64) -> Result<f64> {
    if u.layout() != space.layout() {
        return Err(Error::SpaceMismatch("field does not belong to space".into()));
    }
    let rule = GaussRule::new(space.degree() + 6);
    let nb = space.local_dofs();
    let c = u.coeffs();
    let mut acc = 0.0;
    for e in 0..space.n_elements() {
        let lo = space.mesh().vertex(e);
        let hi = space.mesh().vertex(e + 1);
        acc += rule.integrate(lo, hi, |x| {
            let (p, _, _) = space.basis_at(e, x);
            let v: f64 = (0..nb).map(|k| c[e * nb + k] * p[k]).sum();
            (v - g(x)).powi(2)
        });
    }
    Ok(acc.sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{l2_project, Mesh1D};
    use std::f64::consts::PI;

    #[test]
    fn identical_fields_have_zero_error() {
        let s = DGSpace::unit(8, 2).unwrap();
        let u = l2_project(&s, |x| (3.0 * x).exp());
        assert!(strong_error(&s, &u, &s, &u).unwrap() < 1e-14);
    }

    #[test]
    fn projection_of_reference_gives_projection_error() {
        let fine = DGSpace::unit(64, 1).unwrap();
        let uf = l2_project(&fine, |x| (PI * x).sin());
        let mut errs = Vec::new();
        for n in [4usize, 8, 16] {
            let coarse = DGSpace::unit(n, 1).unwrap();
            // Exact L2 projection of the fine field onto the coarse space, by
            // integration over the fine cells.
            let rule = GaussRule::new(4);
            let ratio = 64 / n;
            let mut c = vec![0.0; coarse.n_dofs()];
            for e in 0..64 {
                let (lo, hi) = (fine.mesh().vertex(e), fine.mesh().vertex(e + 1));
                for k in 0..2 {
                    c[(e / ratio) * 2 + k] += rule.integrate(lo, hi, |x| {
                        let (pf, _, _) = fine.basis_at(e, x);
                        let (pc, _, _) = coarse.basis_at(e / ratio, x);
                        (uf.coeffs()[2 * e] * pf[0] + uf.coeffs()[2 * e + 1] * pf[1]) * pc[k]
                    });
                }
            }
            let uc = Field::from_coeffs(&coarse, c).unwrap();
            let e = strong_error(&coarse, &uc, &fine, &uf).unwrap();
            // Oracle: Pythagoras, ||uf||^2 - ||uc||^2 for an orthogonal projection.
            let pyth = (uf.norm().powi(2) - uc.norm().powi(2)).sqrt();
            assert!((e - pyth).abs() < 1e-4 * pyth, "{e} vs {pyth}");
            errs.push(e);
        }
        for w in errs.windows(2) {
            assert!(((w[0] / w[1]).log2() - 2.0).abs() < 0.1);
        }
    }

    #[test]
    fn rejects_unrelated_spaces() {
        let a = DGSpace::unit(8, 1).unwrap();
        let b = DGSpace::new(Mesh1D::uniform(0.0, 2.0, 16).unwrap(), 1, None).unwrap();
        let c = DGSpace::unit(12, 1).unwrap();
        let (ua, ub, uc) = (Field::zeros(&a), Field::zeros(&b), Field::zeros(&c));
        assert!(strong_error(&a, &ua, &b, &ub).is_err());
        assert!(strong_error(&a, &ua, &c, &uc).is_err());
    }

    #[test]
    fn error_against_function() {
        let s = DGSpace::unit(16, 1).unwrap();
        let u = l2_project(&s, |x| x * x);
        let e = l2_error_vs_fn(&s, &u, |x| x * x).unwrap();
        // Projection error of x^2 onto linears per cell: h^2 / (6 sqrt 5).
        let h = 1.0 / 16.0;
        assert!((e - h * h / (6.0 * 5f64.sqrt())).abs() < 1e-12, "{e}");
    }
}

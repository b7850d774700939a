use super::space::{DGSpace, SpaceLayout};
use crate::error::{Error, Result};

/// A member of `V_h` stored by its modal coefficients, element-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    layout: SpaceLayout,
    coeffs: Vec<f64>,
}

impl Field {
    pub fn zeros(space: &DGSpace) -> Self {
        Self::from_layout(space.layout(), vec![0.0; space.n_dofs()])
    }

    pub fn from_coeffs(space: &DGSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.n_dofs() {
            return Err(Error::SpaceMismatch(format!(
                "expected {} coefficients, got {}",
                space.n_dofs(),
                coeffs.len()
            )));
        }
        Ok(Self::from_layout(space.layout(), coeffs))
    }

    pub(crate) fn from_layout(layout: SpaceLayout, coeffs: Vec<f64>) -> Self {
        debug_assert_eq!(coeffs.len(), layout.n_dofs());
        Self { layout, coeffs }
    }

    pub fn layout(&self) -> SpaceLayout {
        self.layout
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn coeffs_mut(&mut self) -> &mut [f64] {
        &mut self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn same_space(&self, other: &Field) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::SpaceMismatch(format!(
                "{:?} vs {:?}",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    /// L2 inner product (coefficient dot product, orthonormal basis).
    pub fn dot(&self, other: &Field) -> Result<f64> {
        self.same_space(other)?;
        Ok(self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum())
    }

    /// L2 norm.
    pub fn norm(&self) -> f64 {
        self.coeffs.iter().map(|c| c * c).sum::<f64>().sqrt()
    }

    /// `self += alpha * other`.
    pub fn axpy(&mut self, alpha: f64, other: &Field) -> Result<()> {
        self.same_space(other)?;
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a += alpha * b;
        }
        Ok(())
    }

    pub fn scaled(&self, alpha: f64) -> Field {
        Field::from_layout(self.layout, self.coeffs.iter().map(|c| alpha * c).collect())
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        let mut out = self.clone();
        out.axpy(-1.0, other)?;
        Ok(out)
    }

    /// Point value; at an interface the left element's trace is returned.
    pub fn evaluate(&self, space: &DGSpace, x: f64) -> Result<f64> {
        if self.layout != space.layout() {
            return Err(Error::SpaceMismatch("field does not belong to space".into()));
        }
        let e = space.mesh().locate(x)?;
        let (phi, _, _) = space.basis_at(e, x);
        let nb = space.local_dofs();
        Ok(phi
            .iter()
            .zip(&self.coeffs[e * nb..(e + 1) * nb])
            .map(|(p, c)| p * c)
            .sum())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::Mesh1D;

    #[test]
    fn evaluate_reproduces_constants_and_linears() {
        let space = DGSpace::unit(5, 1).unwrap();
        let h = space.h();
        let mut one = Field::zeros(&space);
        for e in 0..5 {
            one.coeffs_mut()[2 * e] = h.sqrt();
        }
        for x in [0.0, 0.13, 0.4, 0.999, 1.0] {
            assert!((one.evaluate(&space, x).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(one.evaluate(&space, 1.5).is_err());
    }

    #[test]
    fn linear_on_two_elements() {
        // u(x) = x on element 0 of (0, 1) with two elements: center 1/4, slope 1.
        let space = DGSpace::new(Mesh1D::unit(2).unwrap(), 1, None).unwrap();
        let h: f64 = 0.5;
        let c0 = 0.25 * h.sqrt();
        // x = 1/4 + (h/2) xi, and phi_1 = sqrt(3/h) xi.
        let c1 = (h / 2.0) / (3.0 / h).sqrt();
        let u = Field::from_coeffs(&space, vec![c0, c1, 0.0, 0.0]).unwrap();
        assert!((u.evaluate(&space, 0.25).unwrap() - 0.25).abs() < 1e-15);
        assert!((u.evaluate(&space, 0.1).unwrap() - 0.1).abs() < 1e-15);
        // Interface belongs to the left element.
        assert!((u.evaluate(&space, 0.5).unwrap() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn mismatched_spaces_are_rejected() {
        let a = DGSpace::unit(4, 1).unwrap();
        let b = DGSpace::unit(8, 1).unwrap();
        let u = Field::zeros(&a);
        let v = Field::zeros(&b);
        assert!(matches!(u.dot(&v), Err(Error::SpaceMismatch(_))));
        assert!(Field::from_coeffs(&a, vec![0.0; 3]).is_err());
    }
}

use super::legendre::{legendre_with_derivatives, GaussRule};
use super::mesh::Mesh1D;
use crate::error::{Error, Result};

/// Shape of a dG space, carried by every [`Field`](super::Field) so that
/// operations can reject mixing fields from different spaces.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpaceLayout {
    pub n_elements: usize,
    pub degree: usize,
    pub a: f64,
    pub b: f64,
}

impl SpaceLayout {
    pub fn n_dofs(&self) -> usize {
        self.n_elements * (self.degree + 1)
    }
}

/// Broken polynomial space of degree `p` on a uniform 1-D mesh.
///
/// The local basis on element `T` is `phi_k = sqrt((2k+1)/h) P_k(xi)` with
/// `xi` the affine coordinate in [-1, 1]; it is L2-orthonormal, so the mass
/// matrix is the identity and the coefficient dot product is the L2 inner
/// product.
#[derive(Debug, Clone)]
pub struct DGSpace {
    mesh: Mesh1D,
    degree: usize,
    sigma0: f64,
    quad: GaussRule,
    // Reference tables at quadrature nodes: [q * (p+1) + k].
    ref_val: Vec<f64>,
    ref_d1: Vec<f64>,
    ref_d2: Vec<f64>,
    // P_k(±1), P'_k(±1).
    end_val: [Vec<f64>; 2],
    end_d1: [Vec<f64>; 2],
    scale: Vec<f64>,
}

/// Default interior penalty `10 p^2`.
pub fn default_sigma0(degree: usize) -> f64 {
    10.0 * (degree * degree) as f64
}

impl DGSpace {
    /// Build the space and verify that the stiffness matrix is positive
    /// definite for the chosen penalty.
    pub fn new(mesh: Mesh1D, degree: usize, sigma0: Option<f64>) -> Result<Self> {
        let space = Self::without_probe(mesh, degree, sigma0)?;
        space.coercivity_probe()?;
        Ok(space)
    }

    /// Build the space without the coercivity probe (used by diagnostics that
    /// want to report an under-penalized form instead of refusing it).
    pub fn without_probe(mesh: Mesh1D, degree: usize, sigma0: Option<f64>) -> Result<Self> {
        let sigma0 = sigma0.unwrap_or_else(|| default_sigma0(degree));
        validate(degree, sigma0)?;
        let quad = GaussRule::new(degree + 2);
        let nb = degree + 1;
        let mut ref_val = vec![0.0; quad.len() * nb];
        let mut ref_d1 = vec![0.0; quad.len() * nb];
        let mut ref_d2 = vec![0.0; quad.len() * nb];
        for (q, &xi) in quad.nodes.iter().enumerate() {
            let (p, dp, d2p) = legendre_with_derivatives(degree, xi);
            ref_val[q * nb..(q + 1) * nb].copy_from_slice(&p);
            ref_d1[q * nb..(q + 1) * nb].copy_from_slice(&dp);
            ref_d2[q * nb..(q + 1) * nb].copy_from_slice(&d2p);
        }
        let (pl, dpl, _) = legendre_with_derivatives(degree, -1.0);
        let (pr, dpr, _) = legendre_with_derivatives(degree, 1.0);
        let h = mesh.h();
        let scale = (0..nb).map(|k| ((2 * k + 1) as f64 / h).sqrt()).collect();
        Ok(Self {
            mesh,
            degree,
            sigma0,
            quad,
            ref_val,
            ref_d1,
            ref_d2,
            end_val: [pl, pr],
            end_d1: [dpl, dpr],
            scale,
        })
    }

    /// Unit interval, unit coefficient, default penalty.
    pub fn unit(n_elements: usize, degree: usize) -> Result<Self> {
        Self::new(Mesh1D::unit(n_elements)?, degree, None)
    }

    /// Positive definiteness of the assembled stiffness (Cholesky succeeds).
    pub fn coercivity_probe(&self) -> Result<()> {
        let stiff = super::assembly::assemble_matrix(self);
        super::block::BandCholesky::factor(&stiff)
            .map(|_| ())
            .map_err(|e| Error::NotCoercive {
                sigma0: self.sigma0,
                detail: e.to_string(),
            })
    }

    pub fn mesh(&self) -> &Mesh1D {
        &self.mesh
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }

    pub fn h(&self) -> f64 {
        self.mesh.h()
    }

    pub fn n_elements(&self) -> usize {
        self.mesh.n_elements()
    }

    pub fn local_dofs(&self) -> usize {
        self.degree + 1
    }

    pub fn n_dofs(&self) -> usize {
        self.n_elements() * self.local_dofs()
    }

    pub fn layout(&self) -> SpaceLayout {
        SpaceLayout {
            n_elements: self.n_elements(),
            degree: self.degree,
            a: self.mesh.a(),
            b: self.mesh.b(),
        }
    }

    pub fn quadrature(&self) -> &GaussRule {
        &self.quad
    }

    /// Physical coordinate of quadrature node `q` in element `e`.
    #[inline]
    pub fn quad_point(&self, e: usize, q: usize) -> f64 {
        self.mesh.center(e) + 0.5 * self.h() * self.quad.nodes[q]
    }

    /// Physical quadrature weight (includes the Jacobian `h/2`).
    #[inline]
    pub fn quad_weight(&self, q: usize) -> f64 {
        0.5 * self.h() * self.quad.weights[q]
    }

    /// `phi_k` at quadrature node `q` (element independent on a uniform mesh).
    #[inline]
    pub fn basis_at_quad(&self, q: usize, k: usize) -> f64 {
        self.scale[k] * self.ref_val[q * self.local_dofs() + k]
    }

    #[inline]
    pub fn basis_d1_at_quad(&self, q: usize, k: usize) -> f64 {
        self.scale[k] * self.ref_d1[q * self.local_dofs() + k] * 2.0 / self.h()
    }

    #[inline]
    pub fn basis_d2_at_quad(&self, q: usize, k: usize) -> f64 {
        let j = 2.0 / self.h();
        self.scale[k] * self.ref_d2[q * self.local_dofs() + k] * j * j
    }

    /// `phi_k` at the left (`side = 0`) or right (`side = 1`) end of an element.
    #[inline]
    pub fn basis_at_end(&self, side: usize, k: usize) -> f64 {
        self.scale[k] * self.end_val[side][k]
    }

    #[inline]
    pub fn basis_d1_at_end(&self, side: usize, k: usize) -> f64 {
        self.scale[k] * self.end_d1[side][k] * 2.0 / self.h()
    }

    /// Local basis values and derivatives at an arbitrary point of element `e`.
    pub fn basis_at(&self, e: usize, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
        let xi = 2.0 * (x - self.mesh.center(e)) / self.h();
        let (p, dp, d2p) = legendre_with_derivatives(self.degree, xi);
        let j = 2.0 / self.h();
        let v = (0..self.local_dofs()).map(|k| self.scale[k] * p[k]).collect();
        let d = (0..self.local_dofs()).map(|k| self.scale[k] * dp[k] * j).collect();
        let d2 = (0..self.local_dofs())
            .map(|k| self.scale[k] * d2p[k] * j * j)
            .collect();
        (v, d, d2)
    }
}

pub(crate) fn validate(degree: usize, sigma0: f64) -> Result<()> {
    if degree < 1 {
        return Err(Error::InvalidParameter(format!(
            "polynomial degree must be >= 1, got {degree}"
        )));
    }
    if !(sigma0 > 0.0 && sigma0.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "penalty sigma0 must be positive, got {sigma0}"
        )));
    }
    Ok(())
}

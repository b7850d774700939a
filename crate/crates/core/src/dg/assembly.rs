//! SIPG stiffness and broken-norm Gram matrices.

use std::sync::Arc;

use super::block::BlockTridiag;
use super::field::Field;
use super::legendre::GaussRule;
use super::space::{DGSpace, SpaceLayout};
use crate::error::{Error, Result};

/// Matrix of the interior penalty form in the orthonormal modal basis,
/// together with the Gram matrix of the broken norm.
#[derive(Debug, Clone)]
pub struct StiffnessOperator {
    layout: SpaceLayout,
    matrix: BlockTridiag,
    broken: BlockTridiag,
}

/// A smooth function given with its first two derivatives.
#[derive(Clone)]
pub struct SmoothFn {
    f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    df: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    d2f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for SmoothFn {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("SmoothFn")
    }
}

impl SmoothFn {
    pub fn new(
        f: impl Fn(f64) -> f64 + Send + Sync + 'static,
        df: impl Fn(f64) -> f64 + Send + Sync + 'static,
        d2f: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            f: Arc::new(f),
            df: Arc::new(df),
            d2f: Arc::new(d2f),
        }
    }

    /// `amplitude * sin(k pi (x - a) / L)` on `(a, a + L)`.
    pub fn sine(k: f64, a: f64, length: f64, amplitude: f64) -> Self {
        let w = k * std::f64::consts::PI / length;
        Self::new(
            move |x| amplitude * (w * (x - a)).sin(),
            move |x| amplitude * w * (w * (x - a)).cos(),
            move |x| -amplitude * w * w * (w * (x - a)).sin(),
        )
    }

    pub fn value(&self, x: f64) -> f64 {
        (self.f)(x)
    }

    pub fn d1(&self, x: f64) -> f64 {
        (self.df)(x)
    }

    pub fn d2(&self, x: f64) -> f64 {
        (self.d2f)(x)
    }
}

/// Trace data of one face: jump and flux-average vectors over the dofs of the
/// (one or two) neighbouring elements.
struct FaceTrace {
    left: Option<usize>,
    right: Option<usize>,
    // Concatenated [left dofs, right dofs]; absent sides are zero.
    jump: Vec<f64>,
    avg_flux: Vec<f64>,
    penalty: f64,
}

fn face_trace(space: &DGSpace, face: usize) -> FaceTrace {
    let nb = space.local_dofs();
    let ne = space.n_elements();
    let mesh = space.mesh();
    let left = face.checked_sub(1);
    let right = (face < ne).then_some(face);
    let mut jump = vec![0.0; 2 * nb];
    let mut avg_flux = vec![0.0; 2 * nb];
    let weight = if left.is_some() && right.is_some() { 0.5 } else { 1.0 };
    if let Some(l) = left {
        let d = mesh.coefficient(l);
        for k in 0..nb {
            jump[k] = space.basis_at_end(1, k);
            avg_flux[k] = weight * d * space.basis_d1_at_end(1, k);
        }
    }
    if let Some(r) = right {
        let d = mesh.coefficient(r);
        for k in 0..nb {
            jump[nb + k] = -space.basis_at_end(0, k);
            avg_flux[nb + k] = weight * d * space.basis_d1_at_end(0, k);
        }
    }
    let d_face = left
        .map(|l| mesh.coefficient(l))
        .into_iter()
        .chain(right.map(|r| mesh.coefficient(r)))
        .fold(0.0, f64::max);
    FaceTrace {
        left,
        right,
        jump,
        avg_flux,
        penalty: space.sigma0() * d_face / space.h(),
    }
}

/// Scatter a symmetric local face matrix `m` (size `2nb`) into `target`.
fn scatter_face(target: &mut BlockTridiag, tr: &FaceTrace, m: &[f64]) {
    let nb = target.block_size();
    let w = 2 * nb;
    for i in 0..nb {
        for j in 0..nb {
            if let Some(l) = tr.left {
                *target.diag_mut(l, i, j) += m[i * w + j];
            }
            if let Some(r) = tr.right {
                *target.diag_mut(r, i, j) += m[(nb + i) * w + nb + j];
            }
            if let (Some(l), Some(_)) = (tr.left, tr.right) {
                *target.upper_mut(l, i, j) += m[i * w + nb + j];
            }
        }
    }
}

/// Stiffness matrix of `B_h` only (used by the coercivity probe).
pub(crate) fn assemble_matrix(space: &DGSpace) -> BlockTridiag {
    let nb = space.local_dofs();
    let ne = space.n_elements();
    let nq = space.quadrature().len();
    let mut a = BlockTridiag::zeros(ne, nb);
    // Volume term; identical reference block scaled by d_T.
    let mut vol = vec![0.0; nb * nb];
    for i in 0..nb {
        for j in 0..nb {
            vol[i * nb + j] = (0..nq)
                .map(|q| space.quad_weight(q) * space.basis_d1_at_quad(q, i) * space.basis_d1_at_quad(q, j))
                .sum();
        }
    }
    for e in 0..ne {
        let d = space.mesh().coefficient(e);
        for i in 0..nb {
            for j in 0..nb {
                *a.diag_mut(e, i, j) += d * vol[i * nb + j];
            }
        }
    }
    let w = 2 * nb;
    let mut m = vec![0.0; w * w];
    for face in 0..=ne {
        let tr = face_trace(space, face);
        for i in 0..w {
            for j in 0..w {
                m[i * w + j] = -(tr.avg_flux[i] * tr.jump[j] + tr.jump[i] * tr.avg_flux[j])
                    + tr.penalty * tr.jump[i] * tr.jump[j];
            }
        }
        scatter_face(&mut a, &tr, &m);
    }
    a
}

fn assemble_broken(space: &DGSpace) -> BlockTridiag {
    let nb = space.local_dofs();
    let ne = space.n_elements();
    let nq = space.quadrature().len();
    let h = space.h();
    let mut g = BlockTridiag::zeros(ne, nb);
    let mut vol = vec![0.0; nb * nb];
    for i in 0..nb {
        for j in 0..nb {
            vol[i * nb + j] = (0..nq)
                .map(|q| {
                    space.quad_weight(q)
                        * (space.basis_d1_at_quad(q, i) * space.basis_d1_at_quad(q, j)
                            + h * h * space.basis_d2_at_quad(q, i) * space.basis_d2_at_quad(q, j))
                })
                .sum();
        }
    }
    for e in 0..ne {
        for i in 0..nb {
            for j in 0..nb {
                *g.diag_mut(e, i, j) += vol[i * nb + j];
            }
        }
    }
    let w = 2 * nb;
    let mut m = vec![0.0; w * w];
    for face in 0..=ne {
        let tr = face_trace(space, face);
        for i in 0..w {
            for j in 0..w {
                m[i * w + j] = tr.jump[i] * tr.jump[j] / h;
            }
        }
        scatter_face(&mut g, &tr, &m);
    }
    g
}

/// Assemble the SIPG stiffness matrix `A` with `v^T A w = B_h(v, w)`.
pub fn assemble_stiffness(space: &DGSpace) -> StiffnessOperator {
    StiffnessOperator {
        layout: space.layout(),
        matrix: assemble_matrix(space),
        broken: assemble_broken(space),
    }
}

impl StiffnessOperator {
    pub fn layout(&self) -> SpaceLayout {
        self.layout
    }

    pub fn matrix(&self) -> &BlockTridiag {
        &self.matrix
    }

    pub fn broken_gram(&self) -> &BlockTridiag {
        &self.broken
    }

    pub fn dim(&self) -> usize {
        self.matrix.dim()
    }

    fn check(&self, u: &Field) -> Result<()> {
        if u.layout() != self.layout {
            return Err(Error::SpaceMismatch(format!(
                "operator on {:?}, field on {:?}",
                self.layout,
                u.layout()
            )));
        }
        Ok(())
    }

    /// `B_h(u, v)`.
    pub fn bilinear(&self, u: &Field, v: &Field) -> Result<f64> {
        self.check(u)?;
        self.check(v)?;
        Ok(self.matrix.bilinear(u.coeffs(), v.coeffs()))
    }

    /// Coefficients of `Lambda_h u` (the mass matrix is the identity).
    pub fn apply(&self, u: &Field) -> Result<Field> {
        self.check(u)?;
        Ok(Field::from_layout(self.layout, self.matrix.mul_vec(u.coeffs())))
    }

    /// `||u||_*`.
    pub fn broken_norm(&self, u: &Field) -> Result<f64> {
        self.check(u)?;
        Ok(self.broken.bilinear(u.coeffs(), u.coeffs()).max(0.0).sqrt())
    }
}

/// `||u||_*` of a discrete field.
pub fn broken_norm(stiffness: &StiffnessOperator, u: &Field) -> Result<f64> {
    stiffness.broken_norm(u)
}

/// Load vector `b_i = B_h(f, phi_i)` for a smooth `f` (continuous, so only the
/// boundary faces carry a jump of `f`).
pub fn smooth_load(space: &DGSpace, f: &SmoothFn) -> Vec<f64> {
    let nb = space.local_dofs();
    let ne = space.n_elements();
    let mesh = space.mesh();
    let rule = GaussRule::new(space.degree() + 5);
    let h = space.h();
    let mut b = vec![0.0; space.n_dofs()];
    for e in 0..ne {
        let d = mesh.coefficient(e);
        for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = mesh.center(e) + 0.5 * h * xi;
            let (_, dphi, _) = space.basis_at(e, x);
            let g = 0.5 * h * w * d * f.d1(x);
            for k in 0..nb {
                b[e * nb + k] += g * dphi[k];
            }
        }
    }
    for face in 0..=ne {
        let tr = face_trace(space, face);
        let x = mesh.vertex(face);
        let d_avg = match (tr.left, tr.right) {
            (Some(l), Some(r)) => 0.5 * (mesh.coefficient(l) + mesh.coefficient(r)),
            (Some(l), None) => mesh.coefficient(l),
            (None, Some(r)) => mesh.coefficient(r),
            (None, None) => unreachable!(),
        };
        let flux = d_avg * f.d1(x);
        let jump = match (tr.left, tr.right) {
            (Some(_), Some(_)) => 0.0,
            (Some(_), None) => f.value(x),
            (None, _) => -f.value(x),
        };
        for (side, elem) in [(0, tr.left), (1, tr.right)] {
            if let Some(el) = elem {
                for k in 0..nb {
                    let i = side * nb + k;
                    b[el * nb + k] +=
                        -flux * tr.jump[i] - jump * tr.avg_flux[i] + tr.penalty * jump * tr.jump[i];
                }
            }
        }
    }
    b
}

/// `||f - u||_*` for a smooth `f` and a discrete `u`, by high-order quadrature.
pub fn broken_norm_error(space: &DGSpace, f: &SmoothFn, u: &Field) -> Result<f64> {
    if u.layout() != space.layout() {
        return Err(Error::SpaceMismatch("field does not belong to space".into()));
    }
    let nb = space.local_dofs();
    let ne = space.n_elements();
    let mesh = space.mesh();
    let h = space.h();
    let rule = GaussRule::new(space.degree() + 8);
    let c = u.coeffs();
    let mut acc = 0.0;
    for e in 0..ne {
        for (xi, w) in rule.nodes.iter().zip(&rule.weights) {
            let x = mesh.center(e) + 0.5 * h * xi;
            let (_, d1, d2) = space.basis_at(e, x);
            let ce = &c[e * nb..(e + 1) * nb];
            let g = f.d1(x) - dot(ce, &d1);
            let l = f.d2(x) - dot(ce, &d2);
            acc += 0.5 * h * w * (g * g + h * h * l * l);
        }
    }
    for face in 0..=ne {
        let tr = face_trace(space, face);
        let x = mesh.vertex(face);
        let mut jump = match (tr.left, tr.right) {
            (Some(_), Some(_)) => 0.0,
            (Some(_), None) => f.value(x),
            (None, _) => -f.value(x),
        };
        for (side, elem) in [(0, tr.left), (1, tr.right)] {
            if let Some(el) = elem {
                for k in 0..nb {
                    jump -= tr.jump[side * nb + k] * c[el * nb + k];
                }
            }
        }
        acc += jump * jump / h;
    }
    Ok(acc.sqrt())
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{l2_project, Mesh1D};

    fn random_field(space: &DGSpace, seed: u64) -> Field {
        let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
        let coeffs = (0..space.n_dofs())
            .map(|_| {
                s ^= s << 13;
                s ^= s >> 7;
                s ^= s << 17;
                (s >> 11) as f64 / (1u64 << 53) as f64 - 0.5
            })
            .collect();
        Field::from_coeffs(space, coeffs).unwrap()
    }

    #[test]
    fn stiffness_is_symmetric() {
        for p in 1..=3 {
            let mesh = Mesh1D::with_coefficient(0.0, 1.0, vec![1.0, 2.0, 0.5, 3.0, 1.0]).unwrap();
            let space = DGSpace::new(mesh, p, None).unwrap();
            let a = assemble_stiffness(&space).matrix().to_dense();
            let asym = (&a - a.transpose()).abs().max();
            assert!(asym <= 1e-13 * a.abs().max());
        }
    }

    // Hand evaluation of the four terms of the form for a constant on one
    // element of a p=1 mesh: volume and flux terms vanish, only penalties at
    // the element's two faces remain.
    #[test]
    fn constant_on_one_element() {
        let space = DGSpace::unit(4, 1).unwrap();
        let stiff = assemble_stiffness(&space);
        let h = space.h();
        let c = 1.7;
        let mut coeffs = vec![0.0; space.n_dofs()];
        coeffs[2] = c * h.sqrt(); // element 1, P_0 coefficient of the constant c
        let u = Field::from_coeffs(&space, coeffs).unwrap();
        let expect = 2.0 * space.sigma0() * c * c / h;
        let got = stiff.bilinear(&u, &u).unwrap();
        assert!((got - expect).abs() < 1e-10 * expect);
        // Broken norm: two faces with jump c.
        let bn = stiff.broken_norm(&u).unwrap();
        assert!((bn * bn - 2.0 * c * c / h).abs() < 1e-10);
    }

    #[test]
    fn dirichlet_energy_of_sine() {
        let mut errs = Vec::new();
        for n in [8usize, 16, 32] {
            let space = DGSpace::unit(n, 1).unwrap();
            let stiff = assemble_stiffness(&space);
            let u = l2_project(&space, |x| (std::f64::consts::PI * x).sin());
            let e = stiff.bilinear(&u, &u).unwrap();
            errs.push((e - std::f64::consts::PI.powi(2) / 2.0).abs());
        }
        let r1 = (errs[0] / errs[1]).log2();
        let r2 = (errs[1] / errs[2]).log2();
        assert!(r1 > 1.7 && r2 > 1.7, "{errs:?}");
    }

    #[test]
    fn coercive_in_broken_norm_for_linears() {
        let space = DGSpace::unit(16, 1).unwrap();
        let stiff = assemble_stiffness(&space);
        for seed in 0..100 {
            let u = random_field(&space, seed);
            let b = stiff.bilinear(&u, &u).unwrap();
            let n = stiff.broken_norm(&u).unwrap();
            assert!(b >= 0.5 * n * n, "seed {seed}: {b} < {}", 0.5 * n * n);
        }
    }

    #[test]
    fn smooth_load_matches_matrix_on_discrete_members() {
        // f = x(1-x) is in V_h for p=2 and is continuous with zero boundary values.
        let space = DGSpace::unit(6, 2).unwrap();
        let stiff = assemble_stiffness(&space);
        let f = SmoothFn::new(|x| x * (1.0 - x), |x| 1.0 - 2.0 * x, |_| -2.0);
        let u = l2_project(&space, |x| x * (1.0 - x));
        let b = smooth_load(&space, &f);
        let au = stiff.matrix().mul_vec(u.coeffs());
        for (x, y) in b.iter().zip(&au) {
            assert!((x - y).abs() < 1e-10);
        }
        assert!(broken_norm_error(&space, &f, &u).unwrap() < 1e-10);
    }
}

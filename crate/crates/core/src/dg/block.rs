//! Symmetric block-tridiagonal storage and a banded Cholesky solver.
//!
//! In one dimension every dG element couples only to its two neighbours, so
//! all operators assembled here have this structure.

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Symmetric block-tridiagonal matrix with square blocks of size `bs`.
///
/// `upper[e]` holds the block coupling rows of element `e` to columns of
/// element `e + 1`; the lower block is its transpose.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockTridiag {
    n_blocks: usize,
    bs: usize,
    diag: Vec<f64>,
    upper: Vec<f64>,
}

impl BlockTridiag {
    pub fn zeros(n_blocks: usize, bs: usize) -> Self {
        Self {
            n_blocks,
            bs,
            diag: vec![0.0; n_blocks * bs * bs],
            upper: vec![0.0; n_blocks.saturating_sub(1) * bs * bs],
        }
    }

    pub fn dim(&self) -> usize {
        self.n_blocks * self.bs
    }

    pub fn block_size(&self) -> usize {
        self.bs
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    #[inline]
    pub fn diag_mut(&mut self, e: usize, i: usize, j: usize) -> &mut f64 {
        &mut self.diag[(e * self.bs + i) * self.bs + j]
    }

    #[inline]
    pub fn upper_mut(&mut self, e: usize, i: usize, j: usize) -> &mut f64 {
        &mut self.upper[(e * self.bs + i) * self.bs + j]
    }

    /// Entry `(row, col)` of the full matrix.
    pub fn get(&self, row: usize, col: usize) -> f64 {
        let bs = self.bs;
        let (er, i) = (row / bs, row % bs);
        let (ec, j) = (col / bs, col % bs);
        if er == ec {
            self.diag[(er * bs + i) * bs + j]
        } else if ec == er + 1 {
            self.upper[(er * bs + i) * bs + j]
        } else if er == ec + 1 {
            self.upper[(ec * bs + j) * bs + i]
        } else {
            0.0
        }
    }

    /// Half bandwidth of the equivalent banded matrix.
    pub fn half_bandwidth(&self) -> usize {
        2 * self.bs - 1
    }

    /// `y = A x`.
    pub fn mul_vec_into(&self, x: &[f64], y: &mut [f64]) {
        let bs = self.bs;
        debug_assert_eq!(x.len(), self.dim());
        debug_assert_eq!(y.len(), self.dim());
        for e in 0..self.n_blocks {
            let d = &self.diag[e * bs * bs..(e + 1) * bs * bs];
            let xe = &x[e * bs..(e + 1) * bs];
            for i in 0..bs {
                let mut acc = 0.0;
                for j in 0..bs {
                    acc += d[i * bs + j] * xe[j];
                }
                if e + 1 < self.n_blocks {
                    let u = &self.upper[e * bs * bs..(e + 1) * bs * bs];
                    let xn = &x[(e + 1) * bs..(e + 2) * bs];
                    for j in 0..bs {
                        acc += u[i * bs + j] * xn[j];
                    }
                }
                if e > 0 {
                    let u = &self.upper[(e - 1) * bs * bs..e * bs * bs];
                    let xp = &x[(e - 1) * bs..e * bs];
                    for j in 0..bs {
                        acc += u[j * bs + i] * xp[j];
                    }
                }
                y[e * bs + i] = acc;
            }
        }
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.dim()];
        self.mul_vec_into(x, &mut y);
        y
    }

    /// `x^T A y`.
    pub fn bilinear(&self, x: &[f64], y: &[f64]) -> f64 {
        let ay = self.mul_vec(y);
        x.iter().zip(&ay).map(|(a, b)| a * b).sum()
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.dim();
        DMatrix::from_fn(n, n, |i, j| self.get(i, j))
    }

    /// `alpha * I + beta * A` in the same storage.
    pub fn shifted(&self, alpha: f64, beta: f64) -> Self {
        let mut out = self.clone();
        out.diag.iter_mut().for_each(|v| *v *= beta);
        out.upper.iter_mut().for_each(|v| *v *= beta);
        for e in 0..self.n_blocks {
            for i in 0..self.bs {
                *out.diag_mut(e, i, i) += alpha;
            }
        }
        out
    }

    /// Number of eigenvalues strictly below `sigma`, from the signs of the
    /// pivots of an unpivoted `L D L^T` factorization of `A - sigma I`
    /// (Sylvester's law of inertia). A vanishing pivot nudges the shift.
    pub fn count_below(&self, sigma: f64) -> usize {
        let scale = self.gershgorin_max().abs().max(sigma.abs()).max(f64::MIN_POSITIVE);
        let mut shift = sigma;
        for attempt in 0..8 {
            if let Some(c) = self.try_count_below(shift, 1e-14 * scale) {
                return c;
            }
            shift = sigma + 1e-13 * scale * (attempt + 1) as f64;
        }
        self.try_count_below(shift, 0.0).unwrap_or(0)
    }

    fn try_count_below(&self, sigma: f64, tiny: f64) -> Option<usize> {
        let n = self.dim();
        let kd = self.half_bandwidth().min(n.saturating_sub(1));
        let w = kd + 1;
        // Row i stores the multipliers L[i][i-kd..i] and D[i] at offset kd.
        let mut l = vec![0.0; n * w];
        let mut count = 0;
        for i in 0..n {
            let j0 = i.saturating_sub(kd);
            for j in j0..=i {
                let mut s = self.get(i, j) - if i == j { sigma } else { 0.0 };
                let k0 = j0.max(j.saturating_sub(kd));
                for k in k0..j {
                    s -= l[i * w + (k + kd - i)] * l[j * w + (k + kd - j)] * l[k * w + kd];
                }
                if i == j {
                    if s.abs() <= tiny || !s.is_finite() {
                        return None;
                    }
                    if s < 0.0 {
                        count += 1;
                    }
                    l[i * w + kd] = s;
                } else {
                    l[i * w + (j + kd - i)] = s / l[j * w + kd];
                }
            }
        }
        Some(count)
    }

    /// Gershgorin upper bound on the spectrum.
    pub fn gershgorin_max(&self) -> f64 {
        let n = self.dim();
        let kd = self.half_bandwidth();
        (0..n)
            .map(|i| {
                let lo = i.saturating_sub(kd);
                let hi = (i + kd + 1).min(n);
                let off: f64 = (lo..hi).filter(|&j| j != i).map(|j| self.get(i, j).abs()).sum();
                self.get(i, i) + off
            })
            .fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest eigenvalue by bisection on the inertia count.
    pub fn max_eigenvalue(&self, rel_tol: f64) -> f64 {
        let n = self.dim();
        let mut hi = self.gershgorin_max().max(0.0);
        let mut lo = -hi.abs();
        while hi - lo > rel_tol * hi.abs().max(f64::MIN_POSITIVE) {
            let mid = 0.5 * (lo + hi);
            if self.count_below(mid) == n {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }
}

/// Cholesky factor `A = L L^T` of a symmetric positive definite banded matrix.
#[derive(Debug, Clone)]
pub struct BandCholesky {
    n: usize,
    kd: usize,
    // Row i stores L[i][i-kd ..= i] at offsets 0 ..= kd.
    l: Vec<f64>,
}

impl BandCholesky {
    pub fn factor(a: &BlockTridiag) -> Result<Self> {
        let n = a.dim();
        let kd = a.half_bandwidth().min(n.saturating_sub(1));
        let w = kd + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            let j0 = i.saturating_sub(kd);
            for j in j0..=i {
                let mut s = a.get(i, j);
                let k0 = j0.max(j.saturating_sub(kd));
                for k in k0..j {
                    s -= l[i * w + (k + kd - i)] * l[j * w + (k + kd - j)];
                }
                if i == j {
                    if !(s > 0.0) || !s.is_finite() {
                        return Err(Error::Singular(format!(
                            "non-positive pivot {s:e} at row {i}"
                        )));
                    }
                    l[i * w + kd] = s.sqrt();
                } else {
                    l[i * w + (j + kd - i)] = s / l[j * w + kd];
                }
            }
        }
        Ok(Self { n, kd, l })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// Solve `A x = b` in place.
    pub fn solve_in_place(&self, b: &mut [f64]) {
        let (n, kd) = (self.n, self.kd);
        let w = kd + 1;
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(kd)..i {
                s -= self.l[i * w + (k + kd - i)] * b[k];
            }
            b[i] = s / self.l[i * w + kd];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in (i + 1)..(i + 1 + kd).min(n) {
                s -= self.l[k * w + (i + kd - k)] * b[k];
            }
            b[i] = s / self.l[i * w + kd];
        }
    }

    pub fn solve(&self, b: &[f64]) -> Vec<f64> {
        let mut x = b.to_vec();
        self.solve_in_place(&mut x);
        x
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n_blocks: usize, bs: usize) -> BlockTridiag {
        let mut m = BlockTridiag::zeros(n_blocks, bs);
        for e in 0..n_blocks {
            for i in 0..bs {
                for j in 0..bs {
                    let v = if i == j { 6.0 + e as f64 } else { 0.3 * (i + j) as f64 / bs as f64 };
                    *m.diag_mut(e, i, j) = v;
                }
            }
        }
        for e in 0..n_blocks - 1 {
            for i in 0..bs {
                for j in 0..bs {
                    *m.upper_mut(e, i, j) = -0.5 + 0.1 * (i as f64 - j as f64);
                }
            }
        }
        m
    }

    #[test]
    fn matvec_matches_dense() {
        let m = sample(5, 3);
        let x: Vec<f64> = (0..15).map(|i| (i as f64 * 0.37).sin()).collect();
        let y = m.mul_vec(&x);
        let dense = m.to_dense();
        let yd = &dense * nalgebra::DVector::from_vec(x);
        for i in 0..15 {
            assert!((y[i] - yd[i]).abs() < 1e-13);
        }
        assert_eq!(dense, dense.transpose());
    }

    #[test]
    fn band_cholesky_solves() {
        let m = sample(6, 2);
        let chol = BandCholesky::factor(&m).unwrap();
        let b: Vec<f64> = (0..12).map(|i| 1.0 + i as f64).collect();
        let x = chol.solve(&b);
        let r = m.mul_vec(&x);
        for i in 0..12 {
            assert!((r[i] - b[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn inertia_matches_dense_spectrum() {
        let m = sample(7, 3).shifted(-6.5, 1.0);
        let ev = m.to_dense().symmetric_eigenvalues();
        for sigma in [-3.0, -0.4, 0.0, 0.7, 2.5] {
            let expect = ev.iter().filter(|&&l| l < sigma).count();
            assert_eq!(m.count_below(sigma), expect, "sigma {sigma}");
        }
        let lmax = ev.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        assert!((m.max_eigenvalue(1e-14) - lmax).abs() < 1e-12 * lmax.abs());
    }

    #[test]
    fn indefinite_matrix_is_rejected() {
        let m = sample(4, 2).shifted(-20.0, 1.0);
        assert!(matches!(BandCholesky::factor(&m), Err(Error::Singular(_))));
    }
}

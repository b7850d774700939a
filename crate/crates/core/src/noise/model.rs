use std::f64::consts::PI;

use crate::dg::DGSpace;
use crate::error::{Error, Result};

/// Truncated Karhunen–Loève expansion of a Q-Wiener process with
/// `Q = Lambda^{-s}`, where `Lambda` is the Dirichlet Laplacian on `(a, b)`:
/// `lambda_j = (j pi / L)^2`, `psi_j = sqrt(2/L) sin(j pi (x - a) / L)`.
#[derive(Debug, Clone, PartialEq)]
pub struct NoiseModel {
    s: f64,
    n_modes: usize,
    a: f64,
    length: f64,
}

/// Default truncation: four modes per degree of freedom.
pub fn default_truncation(space: &DGSpace) -> usize {
    4 * space.n_dofs()
}

impl NoiseModel {
    pub fn new(s: f64, n_modes: usize, a: f64, b: f64) -> Result<Self> {
        if !(s >= 0.0 && s.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "noise exponent s must be >= 0, got {s}"
            )));
        }
        if !(a < b) {
            return Err(Error::InvalidParameter(format!("bad noise domain ({a}, {b})")));
        }
        Ok(Self {
            s,
            n_modes,
            a,
            length: b - a,
        })
    }

    /// Model on the space's domain with the default truncation.
    pub fn for_space(s: f64, space: &DGSpace) -> Result<Self> {
        let m = space.mesh();
        Self::new(s, default_truncation(space), m.a(), m.b())
    }

    pub fn with_modes(&self, n_modes: usize) -> Self {
        Self { n_modes, ..self.clone() }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    /// `lambda_j`, `j >= 1`.
    pub fn lambda(&self, j: usize) -> f64 {
        let w = j as f64 * PI / self.length;
        w * w
    }

    /// `q_j = lambda_j^{-s}`.
    pub fn q(&self, j: usize) -> f64 {
        if self.s == 0.0 {
            1.0
        } else {
            self.lambda(j).powf(-self.s)
        }
    }

    pub fn sqrt_q(&self) -> Vec<f64> {
        (1..=self.n_modes).map(|j| self.q(j).sqrt()).collect()
    }

    pub fn psi(&self, j: usize, x: f64) -> f64 {
        (2.0 / self.length).sqrt() * (j as f64 * PI * (x - self.a) / self.length).sin()
    }

    /// Partial trace `sum_{j <= J} q_j`.
    pub fn trace_q(&self) -> f64 {
        (1..=self.n_modes).map(|j| self.q(j)).sum()
    }

    /// `sum_{j <= J} lambda_j^{beta-1} q_j`.
    pub fn weighted_partial(&self, beta: f64) -> f64 {
        (1..=self.n_modes)
            .map(|j| self.lambda(j).powf(beta - 1.0) * self.q(j))
            .sum()
    }

    /// Fraction of `sum_j lambda_j^{beta-1} q_j` omitted by the truncation;
    /// `None` when the series diverges (`beta >= 1/2 + s`).
    pub fn tail_fraction(&self, beta: f64) -> Option<f64> {
        // lambda_j^{beta-1} q_j = (pi/L)^{2(beta-1-s)} j^{-p}
        let p = 2.0 * (1.0 + self.s - beta);
        if p <= 1.0 {
            return None;
        }
        let tail = zeta_tail(p, self.n_modes);
        let total = zeta_tail(p, 0);
        Some(tail / total)
    }
}

/// `sum_{j > n} j^{-p}` for `p > 1` (Euler–Maclaurin after a direct block).
pub fn zeta_tail(p: f64, n: usize) -> f64 {
    let m = n + 32;
    let mut direct = 0.0;
    for j in (n + 1)..m {
        direct += (j as f64).powf(-p);
    }
    let x = m as f64;
    // sum_{j >= m} j^{-p} ~ m^{1-p}/(p-1) + m^{-p}/2 + p m^{-p-1}/12
    //                      - p(p+1)(p+2) m^{-p-3}/720 + p..(p+4) m^{-p-5}/30240
    let em = x.powf(1.0 - p) / (p - 1.0) + 0.5 * x.powf(-p) + p * x.powf(-p - 1.0) / 12.0
        - p * (p + 1.0) * (p + 2.0) * x.powf(-p - 3.0) / 720.0
        + p * (p + 1.0) * (p + 2.0) * (p + 3.0) * (p + 4.0) * x.powf(-p - 5.0) / 30240.0;
    direct + em
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn basel_limit() {
        let m = NoiseModel::new(1.0, 200_000, 0.0, 1.0).unwrap();
        assert!((m.trace_q() - 1.0 / 6.0).abs() < 1e-6);
        let mut prev = 0.0;
        for j in [1usize, 2, 10, 100] {
            let t = m.with_modes(j).trace_q();
            assert!(t > prev);
            prev = t;
        }
    }

    #[test]
    fn zeta_values() {
        assert!((zeta_tail(2.0, 0) - PI * PI / 6.0).abs() < 1e-12);
        assert!((zeta_tail(4.0, 0) - PI.powi(4) / 90.0).abs() < 1e-13);
        let direct: f64 = (1..=10).map(|j| (j as f64).powi(-2)).sum();
        assert!((zeta_tail(2.0, 10) - (PI * PI / 6.0 - direct)).abs() < 1e-12);
    }

    #[test]
    fn tail_fraction_of_default_truncation() {
        let space = crate::dg::DGSpace::unit(32, 1).unwrap();
        let m = NoiseModel::for_space(1.0, &space).unwrap();
        assert_eq!(m.n_modes(), 256);
        let f = m.tail_fraction(1.0).unwrap();
        assert!(f < 0.01, "{f}");
        assert!(m.tail_fraction(1.5).is_none());
        let white = NoiseModel::for_space(0.0, &space).unwrap();
        assert!(white.q(7) == 1.0 && white.tail_fraction(0.5).is_none());
    }

    #[test]
    fn rejects_negative_exponent() {
        assert!(NoiseModel::new(-0.5, 4, 0.0, 1.0).is_err());
    }
}

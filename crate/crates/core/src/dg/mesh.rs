use crate::error::{Error, Result};

/// Uniform mesh of an interval with a piecewise-constant diffusion coefficient.
#[derive(Debug, Clone, PartialEq)]
pub struct Mesh1D {
    a: f64,
    b: f64,
    n_elements: usize,
    h: f64,
    coefficient: Vec<f64>,
}

impl Mesh1D {
    /// Uniform mesh of `(a, b)` with unit coefficient.
    pub fn uniform(a: f64, b: f64, n_elements: usize) -> Result<Self> {
        Self::with_coefficient(a, b, vec![1.0; n_elements])
    }

    /// Unit interval `(0, 1)` with `n_elements` cells.
    pub fn unit(n_elements: usize) -> Result<Self> {
        Self::uniform(0.0, 1.0, n_elements)
    }

    /// Mesh with element-wise diffusion values `d_T`.
    pub fn with_coefficient(a: f64, b: f64, coefficient: Vec<f64>) -> Result<Self> {
        let n_elements = coefficient.len();
        if n_elements < 2 {
            return Err(Error::InvalidMesh(format!(
                "need at least 2 elements, got {n_elements}"
            )));
        }
        if !(a.is_finite() && b.is_finite() && a < b) {
            return Err(Error::InvalidMesh(format!("domain ({a}, {b}) is not an interval")));
        }
        if let Some(d) = coefficient.iter().find(|d| !(d.is_finite() && **d > 0.0)) {
            return Err(Error::InvalidMesh(format!(
                "diffusion coefficient must be positive and finite, found {d}"
            )));
        }
        Ok(Self {
            a,
            b,
            n_elements,
            h: (b - a) / n_elements as f64,
            coefficient,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    pub fn n_elements(&self) -> usize {
        self.n_elements
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn coefficient(&self, element: usize) -> f64 {
        self.coefficient[element]
    }

    pub fn coefficients(&self) -> &[f64] {
        &self.coefficient
    }

    /// Left endpoint of element `e`.
    pub fn vertex(&self, i: usize) -> f64 {
        if i == self.n_elements {
            self.b
        } else {
            self.a + i as f64 * self.h
        }
    }

    pub fn center(&self, e: usize) -> f64 {
        self.a + (e as f64 + 0.5) * self.h
    }

    /// Element containing `x`; interface points belong to the left element.
    pub fn locate(&self, x: f64) -> Result<usize> {
        if !(x >= self.a && x <= self.b) {
            return Err(Error::OutOfDomain {
                x,
                a: self.a,
                b: self.b,
            });
        }
        let s = (x - self.a) / self.h;
        let e = s.ceil() as isize - 1;
        Ok(e.clamp(0, self.n_elements as isize - 1) as usize)
    }

    /// Two meshes cover the same interval.
    pub fn same_domain(&self, other: &Mesh1D) -> bool {
        let tol = 1e-14 * (self.b - self.a).abs().max(1.0);
        (self.a - other.a).abs() <= tol && (self.b - other.b).abs() <= tol
    }
}

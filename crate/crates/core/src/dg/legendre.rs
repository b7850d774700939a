//! Legendre polynomials on [-1, 1] and Gauss–Legendre quadrature.

use std::f64::consts::PI;

/// Values `P_0(x) .. P_n(x)`.
pub fn legendre_values(n: usize, x: f64) -> Vec<f64> {
    let mut p = vec![0.0; n + 1];
    p[0] = 1.0;
    if n >= 1 {
        p[1] = x;
    }
    for k in 2..=n {
        let kf = k as f64;
        p[k] = ((2.0 * kf - 1.0) * x * p[k - 1] - (kf - 1.0) * p[k - 2]) / kf;
    }
    p
}

/// Values, first and second derivatives of `P_0 .. P_n` at `x`.
///
/// Uses the derivative recurrences `P'_k = P'_{k-2} + (2k-1) P_{k-1}` and
/// `P''_k = P''_{k-2} + (2k-1) P'_{k-1}`, which stay finite at the endpoints.
pub fn legendre_with_derivatives(n: usize, x: f64) -> (Vec<f64>, Vec<f64>, Vec<f64>) {
    let p = legendre_values(n, x);
    let mut dp = vec![0.0; n + 1];
    let mut d2p = vec![0.0; n + 1];
    if n >= 1 {
        dp[1] = 1.0;
    }
    for k in 2..=n {
        let c = (2 * k - 1) as f64;
        dp[k] = dp[k - 2] + c * p[k - 1];
        d2p[k] = d2p[k - 2] + c * dp[k - 1];
    }
    (p, dp, d2p)
}

/// Gauss–Legendre rule with `n` points on [-1, 1], nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussRule {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "quadrature needs at least one point");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let nf = n as f64;
        for i in 0..(n + 1) / 2 {
            // Tricomi initial guess, then Newton on P_n.
            let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut dp = 1.0;
            for _ in 0..100 {
                let (p_n, p_nm1) = p_n_pair(n, x);
                dp = nf * (x * p_n - p_nm1) / (x * x - 1.0);
                let dx = p_n / dp;
                x -= dx;
                if dx.abs() < 1e-16 {
                    break;
                }
            }
            let (p_n, p_nm1) = p_n_pair(n, x);
            dp = if (x * x - 1.0).abs() > 0.0 {
                nf * (x * p_n - p_nm1) / (x * x - 1.0)
            } else {
                dp
            };
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            nodes[i] = -x;
            nodes[n - 1 - i] = x;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        Self { nodes, weights }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Integrate `f` over `[lo, hi]`.
    pub fn integrate(&self, lo: f64, hi: f64, f: impl Fn(f64) -> f64) -> f64 {
        let half = 0.5 * (hi - lo);
        let mid = 0.5 * (hi + lo);
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&xi, &w)| w * f(mid + half * xi))
            .sum::<f64>()
            * half
    }
}

fn p_n_pair(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    (p1, p0)
}

use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares power law `error ~ C level^rate`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateFit {
    pub levels: Vec<f64>,
    pub errors: Vec<f64>,
    pub rate: f64,
    pub intercept: f64,
    /// Root-mean-square residual in log space.
    pub residual: f64,
}

/// OLS slope of `ln error` against `ln level`.
pub fn fit_rate(levels: &[f64], errors: &[f64]) -> Result<RateFit> {
    if levels.len() != errors.len() {
        return Err(Error::Fit(format!(
            "{} levels but {} errors",
            levels.len(),
            errors.len()
        )));
    }
    if levels.len() < 3 {
        return Err(Error::Fit(format!("need at least 3 levels, got {}", levels.len())));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0 && e.is_finite())) {
        return Err(Error::Fit(format!("errors must be positive and finite, got {e}")));
    }
    if let Some(l) = levels.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::Fit(format!("levels must be positive and finite, got {l}")));
    }
    let x: Vec<f64> = levels.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = errors.iter().map(|v| v.ln()).collect();
    let (slope, intercept) = ols(&x, &y)?;
    let n = x.len() as f64;
    let ss: f64 = x
        .iter()
        .zip(&y)
        .map(|(xi, yi)| (yi - intercept - slope * xi).powi(2))
        .sum();
    Ok(RateFit {
        levels: levels.to_vec(),
        errors: errors.to_vec(),
        rate: slope,
        intercept,
        residual: (ss / n).sqrt(),
    })
}

/// Ordinary least squares `y = intercept + slope x`; returns `(slope, intercept)`.
pub fn ols(x: &[f64], y: &[f64]) -> Result<(f64, f64)> {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Fit("levels are all equal".into()));
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Ok((slope, my - slope * mx))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn exact_power_law() {
        let h: Vec<f64> = (3..8).map(|i| 2f64.powi(-i)).collect();
        let e: Vec<f64> = h.iter().map(|h| 3.7 * h * h).collect();
        let f = fit_rate(&h, &e).unwrap();
        assert!((f.rate - 2.0).abs() < 1e-12);
        assert!((f.intercept - 3.7f64.ln()).abs() < 1e-12);
        assert!(f.residual < 1e-12);
    }

    #[test]
    fn constant_errors_have_zero_rate() {
        let f = fit_rate(&[0.5, 0.25, 0.125], &[1e-3; 3]).unwrap();
        assert!(f.rate.abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(fit_rate(&[0.5, 0.25], &[1.0, 0.5]).is_err());
        assert!(fit_rate(&[0.5, 0.25, 0.1], &[1.0, 0.0, 0.1]).is_err());
        assert!(fit_rate(&[0.5, 0.25, 0.1], &[1.0, -1.0, 0.1]).is_err());
        assert!(fit_rate(&[0.5, 0.5, 0.5], &[1.0, 2.0, 3.0]).is_err());
    }

    proptest! {
        #[test]
        fn perturbed_power_law(noise in proptest::collection::vec(-1.0f64..1.0, 6), c in 0.1f64..10.0) {
            let h: Vec<f64> = (2..8).map(|i| 2f64.powi(-i)).collect();
            let e: Vec<f64> = h.iter().zip(&noise).map(|(h, n)| c * h.powf(1.5) * (1.0 + 0.05 * n)).collect();
            let f = fit_rate(&h, &e).unwrap();
            prop_assert!(f.rate >= 1.35 && f.rate <= 1.65);
        }
    }
}

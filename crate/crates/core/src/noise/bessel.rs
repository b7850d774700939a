//! Spherical Bessel functions of the first kind, `j_0 .. j_n`.

/// Values `j_0(x) .. j_n(x)` for `x >= 0`.
///
/// Power series below `max(n, 1) + 1` (where upward recurrence loses digits),
/// upward recurrence above.
pub fn spherical_bessel(n: usize, x: f64) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    let x = x.abs();
    if x < (n.max(1) + 1) as f64 {
        for (k, o) in out.iter_mut().enumerate() {
            *o = series(k, x);
        }
        return out;
    }
    let (s, c) = x.sin_cos();
    out[0] = s / x;
    if n >= 1 {
        out[1] = s / (x * x) - c / x;
    }
    for k in 2..=n {
        out[k] = (2 * k - 1) as f64 / x * out[k - 1] - out[k - 2];
    }
    out
}

// j_k(x) = x^k / (2k+1)!! * sum_m (-x^2/2)^m / (m! (2k+3)(2k+5)..(2k+2m+1))
fn series(k: usize, x: f64) -> f64 {
    let mut lead = 1.0;
    for i in 0..k {
        lead *= x / (2 * i + 3) as f64;
    }
    let y = -0.5 * x * x;
    let mut term = 1.0;
    let mut sum = 1.0;
    for m in 1..200 {
        term *= y / (m as f64 * (2 * k + 2 * m + 1) as f64);
        sum += term;
        if term.abs() < 1e-17 * sum.abs() {
            break;
        }
    }
    lead * sum
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_forms() {
        for &x in &[1e-6, 0.3, 1.0, 2.5, 3.9, 7.0, 20.0, 60.0] {
            let j = spherical_bessel(3, x);
            let (s, c) = (f64::sin(x), f64::cos(x));
            let j0 = s / x;
            let j1 = s / (x * x) - c / x;
            let j2 = (3.0 / (x * x) - 1.0) * s / x - 3.0 * c / (x * x);
            let j3 = (15.0 / x.powi(3) - 6.0 / x) * s / x - (15.0 / (x * x) - 1.0) * c / x;
            // The closed forms cancel catastrophically for tiny x; compare only
            // where they are trustworthy.
            let tol = if x < 0.5 { 1e-8 } else { 1e-12 };
            assert!((j[0] - j0).abs() < tol, "x={x}");
            assert!((j[1] - j1).abs() < tol, "x={x}");
            if x > 0.2 {
                assert!((j[2] - j2).abs() < 1e-9, "x={x}");
            }
            if x > 1.0 {
                assert!((j[3] - j3).abs() < 1e-9, "x={x}");
            }
        }
        let z = spherical_bessel(4, 0.0);
        assert_eq!(z, vec![1.0, 0.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn series_and_recurrence_agree_near_switch() {
        for n in 1..6 {
            for &x in &[(n + 1) as f64, (n + 1) as f64 + 0.5, 1.5 * (n + 1) as f64] {
                let up = spherical_bessel(n, x.max((n + 1) as f64));
                for k in 0..=n {
                    assert!((series(k, x) - spherical_bessel(n, x)[k]).abs() < 1e-12, "n={n} k={k} x={x}");
                    if x >= (n + 1) as f64 {
                        assert!((series(k, x) - up[k]).abs() < 1e-12);
                    }
                }
            }
        }
    }
}

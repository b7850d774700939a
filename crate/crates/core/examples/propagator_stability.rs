//! The noiseless Verlet propagator per mode: unit-modulus eigenvalues below
//! the CFL bound, growth above it.

use stochwave::integrators::ModeKernel;

fn main() {
    let lambda: f64 = 100.0;
    for r in [0.5f64, 1.0, 1.9, 3.9, 5.0] {
        // tau^2 lambda = r
        let tau = (r / lambda).sqrt();
        let k = ModeKernel::svm(lambda, tau);
        let (m1, m2) = k.eigenvalues();
        let (mut a, mut b) = (1.0, 0.0);
        let mut peak: f64 = 1.0;
        for _ in 0..100 {
            (a, b) = k.apply(a, b, 0.0);
            peak = peak.max((a * a + b * b).sqrt());
        }
        println!(
            "tau^2 lambda = {r:>3}: |mu| = {:.15}, {:.15}; max |v| over 100 steps = {peak:.3e}",
            m1.norm(),
            m2.norm()
        );
    }
}

//! Eigenvalues of the discrete operator and the resulting step-size limit of
//! the explicit Verlet scheme.

use std::f64::consts::PI;

use stochwave::dg::{assemble_stiffness, DGSpace};
use stochwave::harness::dyadic_cfl_exponent;
use stochwave::spectral::decompose;

fn main() -> stochwave::Result<()> {
    println!("{:>2} {:>5} {:>14} {:>14} {:>10} {:>12} {:>6}", "p", "cells", "lambda_min/pi^2", "lambda_max", "C_s", "tau_max", "2^-k");
    for p in 1..=3 {
        for k in 2..=6 {
            let space = DGSpace::unit(1 << k, p)?;
            let op = decompose(&assemble_stiffness(&space))?;
            let lmax = op.lambda_max();
            println!(
                "{p:>2} {:>5} {:>14.8} {:>14.6e} {:>10.2} {:>12.4e} {:>6}",
                1 << k,
                op.lambda_min() / (PI * PI),
                lmax,
                op.cs_estimate(),
                op.max_stable_tau(0.9),
                dyadic_cfl_exponent(lmax, 0.9),
            );
        }
    }
    Ok(())
}

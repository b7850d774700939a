//! Standing wave u = sin(pi x) sin(pi t) / pi with the three time
//! integrators, compared with the closed form at t = 1.

use std::f64::consts::PI;

use stochwave::dg::{DGSpace, SmoothFn};
use stochwave::harness::l2_error_vs_fn;
use stochwave::integrators::{
    run, CflPolicy, Discretization, NoNoise, Nonlinearity, Scheme, State, Stepper, VelocityProjection,
};

fn main() -> stochwave::Result<()> {
    let disc = Discretization::with_spectral(DGSpace::unit(16, 2)?)?;
    let zero = Nonlinearity::zero();
    let u0 = SmoothFn::new(|_| 0.0, |_| 0.0, |_| 0.0);
    let v0 = SmoothFn::sine(1.0, 0.0, 1.0, 1.0);
    let s0 = State::from_initial(&disc, &u0, &v0, VelocityProjection::L2)?;
    let exact = |x: f64| (PI * x).sin() * PI.sin() / PI;
    println!("tau_max(0.9) = {:.3e}", disc.max_stable_tau(0.9));
    for scheme in Scheme::ALL {
        print!("{scheme}:");
        for k in 9..=12 {
            let n = 1usize << k;
            let st = Stepper::new(scheme, 1.0 / n as f64, &disc, &zero, CflPolicy::default())?;
            let out = run(&st, s0.clone(), n, &mut NoNoise, &mut [])?;
            print!("  2^-{k}: {:.3e}", l2_error_vs_fn(&disc.space, &out.state.u1, exact)?);
        }
        println!();
    }
    Ok(())
}

//! One path of the stochastic sine-Gordon equation with the Verlet scheme,
//! reporting the Hamiltonian and the displacement at the midpoint.

use stochwave::harness::ExperimentConfig;
use stochwave::integrators::{run, Discretization, State, Stepper, StreamNoise};
use stochwave::noise::{NoiseProjector, NoiseStream};
use stochwave::observables::hamiltonian;

fn main() -> stochwave::Result<()> {
    let cfg = ExperimentConfig::from_kv_text("ladder.mesh = 5\nproblem.T = 2\nnoise.s = 1")?;
    let disc = Discretization::new(cfg.space(cfg.ladder.mesh)?);
    let tau = 1.0 / 1024.0;
    let f = cfg.nonlinearity();
    let st = Stepper::new(cfg.scheme, tau, &disc, &f, cfg.cfl_policy())?;
    let model = cfg.noise_model(&disc.space)?;
    let proj = NoiseProjector::new(&model, &disc.space)?;
    let mut noise = StreamNoise::new(&model, &proj, tau, NoiseStream::new(cfg.noise.seed, 0));
    let s0 = State::from_initial(&disc, &cfg.u0(), &cfg.v0(), cfg.problem.velocity_projection)?;
    let n = (cfg.problem.final_time / tau) as usize;

    let mut obs = (128usize, |_: usize, t: f64, s: &State| {
        let h = hamiltonian(&disc, s, &f).unwrap();
        let mid = s.u1.evaluate(&disc.space, 0.5).unwrap();
        println!("t = {t:6.3}  H = {h:.6}  u(1/2) = {mid:+.6}");
    });
    run(&st, s0, n, &mut noise, &mut [&mut obs])?;
    Ok(())
}

//! Karhunen-Loeve noise projected onto the dG space: the projected trace
//! approaches Tr Q as the mesh is refined, and sampled increments satisfy the
//! Ito isometry.

use stochwave::dg::DGSpace;
use stochwave::integrators::{NoiseSource, StreamNoise};
use stochwave::noise::{projected_trace, NoiseModel, NoiseProjector, NoiseStream};

fn main() -> stochwave::Result<()> {
    for s in [0.0, 1.0] {
        println!("s = {s}");
        for k in 2..=7 {
            let space = DGSpace::unit(1 << k, 1)?;
            let model = NoiseModel::for_space(s, &space)?;
            let tr = projected_trace(&model, &space)?;
            println!(
                "  {:>4} cells, J = {:>4}: Tr(P_h Q P_h) = {tr:.6}  (truncated Tr Q = {:.6})",
                1 << k,
                model.n_modes(),
                model.trace_q()
            );
        }
    }

    let space = DGSpace::unit(32, 1)?;
    let model = NoiseModel::for_space(1.0, &space)?;
    let proj = NoiseProjector::new(&model, &space)?;
    let tau = 1e-3;
    let mut src = StreamNoise::new(&model, &proj, tau, NoiseStream::new(7, 0));
    let mut inc = vec![0.0; space.n_dofs()];
    let n = 20_000;
    let mut acc = 0.0;
    for step in 0..n {
        src.increment(step, &mut inc);
        acc += inc.iter().map(|v| v * v).sum::<f64>() / tau;
    }
    println!(
        "mean |P_h dW|^2 / tau over {n} draws: {:.6}, expected {:.6}",
        acc / n as f64,
        projected_trace(&model, &space)?
    );
    Ok(())
}

//! Strong temporal convergence on a fixed mesh with coupled dyadic noise,
//! for all three integrators.

use stochwave::harness::{converge_time, ExperimentConfig};

fn main() -> stochwave::Result<()> {
    let cfg = ExperimentConfig::from_kv_text(
        "ladder.mesh = 2\nladder.time = 5..8\nschemes = svm,stm,sem\nmc.realizations = 16\nnoise.s = 1",
    )?;
    let t = converge_time(&cfg)?;
    println!("reference: {}", t.reference);
    for r in &t.rows {
        println!("{}  tau = 2^{:.0}  rms = {:.3e}", r.scheme, r.tau.log2(), r.rms_u1);
    }
    for f in &t.fits {
        if let Some(fit) = &f.fit {
            println!("{}: rate {:.3} (nominal {:?})", f.scheme, fit.rate, f.nominal);
        }
    }
    Ok(())
}

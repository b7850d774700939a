//! Strong spatial convergence of the stochastic sine-Gordon problem against
//! a fine reference driven by the same noise. Pass the number of
//! realizations as the first argument (default 8).

use stochwave::harness::{converge_space, ExperimentConfig};

fn main() -> stochwave::Result<()> {
    let m: usize = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(8);
    let mut cfg = ExperimentConfig::from_kv_text(
        "ladder.space = 3..6\nladder.space_ref = 8\nnoise.s = 1\nproblem.T = 0.5",
    )?;
    cfg.mc.realizations = m;
    let t = converge_space(&cfg)?;
    println!("reference: {}", t.reference);
    for r in &t.rows {
        println!("h = {:.5}  tau = {:.3e}  rms = {:.3e} +- {:.1e}", r.h, r.tau, r.rms_u1, r.se_u1);
    }
    for f in &t.fits {
        if let Some(fit) = &f.fit {
            println!("{}: rate {:.3} (nominal {:?})", f.scheme, fit.rate, f.nominal);
        }
    }
    Ok(())
}

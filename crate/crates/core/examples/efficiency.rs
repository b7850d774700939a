//! Error against wall-clock cost over the spatial ladder for each scheme.

use stochwave::harness::{efficiency, efficiency_csv, ExperimentConfig};

fn main() -> stochwave::Result<()> {
    let cfg = ExperimentConfig::from_kv_text(
        "ladder.space = 2..5\nladder.space_ref = 7\nschemes = svm,stm,sem\nmc.realizations = 4\nproblem.T = 0.5",
    )?;
    print!("{}", efficiency_csv(&efficiency(&cfg)?));
    Ok(())
}

//! Monte Carlo drivers: strong convergence, efficiency and energy growth.

pub mod config;
mod convergence;
mod coupled;
mod energy;
mod pool;
mod rate;
mod strong;

pub use config::{dyadic_cfl_exponent, ExperimentConfig, ForcingChoice, InitialData, Observe};
pub use convergence::{
    beta_sup, converge_space, converge_time, efficiency, efficiency_csv, nominal_rate, Axis,
    ConvergenceRow, ConvergenceTable, EfficiencyRow, SchemeFit, EFFICIENCY_CSV_HEADER,
};
pub use coupled::{summarize, CoupledPlan, PathError, Reference, Target, TargetSummary};
pub use energy::{energy_growth, observation_steps, EnergyRow, EnergySeries, SlopeEstimate};
pub use pool::ordered_map;
pub use rate::{fit_rate, ols, RateFit};
pub use strong::{l2_error_vs_fn, strong_error};

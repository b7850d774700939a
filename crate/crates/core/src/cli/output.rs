//! `simulate` and the JSON sidecar written next to every CSV.

use serde::Serialize;

use super::default_tau;
use crate::error::{Error, Result};
use crate::harness::{observation_steps, ordered_map, ExperimentConfig, Observe};
use crate::integrators::{
    run, Discretization, NoNoise, NoiseSource, Observer, Scheme, State, Stepper, StreamNoise,
};
use crate::noise::{NoiseProjector, NoiseStream};
use crate::observables::{discrete_energy, hamiltonian, modified_energy};

// Dense eigendecomposition is only attempted up to this size for E_m.
const SPECTRAL_LIMIT: usize = 2048;

#[derive(Debug, Clone, Serialize)]
pub struct RunMetadata {
    pub command: String,
    pub version: String,
    pub seed: u64,
    pub realizations: usize,
    pub noise_modes: usize,
    pub lambda_max: Option<f64>,
    pub cs_estimate: Option<f64>,
    pub tau: Option<f64>,
    /// `tau sqrt(lambda_max) / 2`; below 1 means strictly CFL-stable.
    pub cfl_margin: Option<f64>,
    pub wall_clock_seconds: f64,
    pub config: ExperimentConfig,
    pub extra: serde_json::Value,
}

impl RunMetadata {
    pub fn new(cfg: &ExperimentConfig, command: &str) -> Self {
        Self {
            command: command.to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: cfg.noise.seed,
            realizations: if cfg.noise.enabled { cfg.mc.realizations } else { 1 },
            noise_modes: 0,
            lambda_max: None,
            cs_estimate: None,
            tau: None,
            cfl_margin: None,
            wall_clock_seconds: 0.0,
            config: cfg.clone(),
            extra: serde_json::Value::Null,
        }
    }

    pub fn with_discretization(mut self, disc: &Discretization, tau: Option<f64>) -> Self {
        self.lambda_max = Some(disc.lambda_max);
        self.cs_estimate = Some(disc.cs_estimate());
        self.tau = tau;
        self.cfl_margin = tau.map(|t| 0.5 * t * disc.lambda_max.sqrt());
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("metadata serializes") + "\n"
    }
}

#[derive(Debug, Clone)]
pub struct SimulationOutput {
    pub csv: String,
    pub rows: usize,
    pub metadata: RunMetadata,
}

/// Monte Carlo means along the trajectory on the mesh `2^ladder.mesh`.
///
/// In `energy` mode each row holds the means and standard errors of `H`,
/// `E` and `E_m`; in `probes` mode the mean of `u_1` at each probe point.
pub fn simulate(cfg: &ExperimentConfig) -> Result<SimulationOutput> {
    cfg.validate()?;
    let space = cfg.space(cfg.ladder.mesh)?;
    let want_spectral = cfg.scheme == Scheme::Stm
        || (cfg.output.observe == Observe::Energy && space.n_dofs() <= SPECTRAL_LIMIT);
    let disc = if want_spectral {
        Discretization::with_spectral(space)?
    } else {
        Discretization::new(space)
    };
    let tau = default_tau(cfg, disc.lambda_max);
    let n_steps = (cfg.problem.final_time / tau).round() as usize;
    if ((n_steps as f64) * tau - cfg.problem.final_time).abs() > 1e-9 * cfg.problem.final_time.max(1.0) {
        return Err(Error::Config(format!(
            "T = {} is not a multiple of tau = {tau}",
            cfg.problem.final_time
        )));
    }
    let f = cfg.nonlinearity();
    let stepper = Stepper::new(cfg.scheme, tau, &disc, &f, cfg.cfl_policy())?;
    let s0 = State::from_initial(&disc, &cfg.u0(), &cfg.v0(), cfg.problem.velocity_projection)?;
    let stride = cfg.output.stride.unwrap_or((n_steps / 100).max(1));
    let obs = observation_steps(n_steps, stride);
    let m = if cfg.noise.enabled { cfg.mc.realizations } else { 1 };
    let noise = if cfg.noise.enabled {
        let model = cfg.noise_model(&disc.space)?;
        let proj = NoiseProjector::new(&model, &disc.space)?;
        Some((model, proj))
    } else {
        None
    };
    let em_ok = disc.spectral.is_some() && tau * tau * disc.lambda_max < 4.0;
    let mode = cfg.output.observe;
    let probes = cfg.output.probes.clone();
    let width = match mode {
        Observe::Energy => 3,
        Observe::Probes => probes.len(),
    };

    let paths: Vec<Vec<Vec<f64>>> = ordered_map(m, cfg.mc.jobs, |r| {
        let mut rows: Vec<Vec<f64>> = Vec::with_capacity(obs.len());
        let mut failure: Option<Error> = None;
        {
            let mut record = |_: usize, _: f64, s: &State| {
                let row = match mode {
                    Observe::Energy => {
                        let h = hamiltonian(&disc, s, &f);
                        let e = discrete_energy(&disc, s);
                        let em = if em_ok {
                            modified_energy(s, tau, disc.spectral.as_ref().unwrap()).unwrap_or(f64::NAN)
                        } else {
                            f64::NAN
                        };
                        match (h, e) {
                            (Ok(h), Ok(e)) => vec![h, e, em],
                            (Err(err), _) | (_, Err(err)) => {
                                failure.get_or_insert(err);
                                vec![f64::NAN; 3]
                            }
                        }
                    }
                    Observe::Probes => probes
                        .iter()
                        .map(|&x| s.u1.evaluate(&disc.space, x).unwrap_or(f64::NAN))
                        .collect(),
                };
                rows.push(row);
            };
            let mut ob = (stride, &mut record);
            let observers: &mut [&mut dyn Observer] = &mut [&mut ob];
            let mut src: Box<dyn NoiseSource> = match &noise {
                Some((model, proj)) => Box::new(StreamNoise::new(
                    model,
                    proj,
                    tau,
                    NoiseStream::new(cfg.noise.seed, r as u64),
                )),
                None => Box::new(NoNoise),
            };
            run(&stepper, s0.clone(), n_steps, src.as_mut(), observers)?;
        }
        match failure {
            Some(e) => Err(e),
            None => Ok(rows),
        }
    })?;

    let mut csv = String::new();
    match mode {
        Observe::Energy => csv.push_str(
            "t,hamiltonian,hamiltonian_se,discrete_energy,discrete_energy_se,modified_energy,modified_energy_se\n",
        ),
        Observe::Probes => {
            csv.push('t');
            for x in &probes {
                csv.push_str(&format!(",u1_at_{x}"));
            }
            csv.push('\n');
        }
    }
    let mf = m as f64;
    for (i, &step) in obs.iter().enumerate() {
        csv.push_str(&format!("{:.16e}", step as f64 * tau));
        for k in 0..width {
            let mean = paths.iter().map(|p| p[i][k]).sum::<f64>() / mf;
            csv.push_str(&format!(",{mean:.16e}"));
            if mode == Observe::Energy {
                let var = if m > 1 {
                    paths.iter().map(|p| (p[i][k] - mean).powi(2)).sum::<f64>() / (mf - 1.0)
                } else {
                    0.0
                };
                csv.push_str(&format!(",{:.16e}", (var / mf).sqrt()));
            }
        }
        csv.push('\n');
    }

    let mut metadata = RunMetadata::new(cfg, "simulate").with_discretization(&disc, Some(tau));
    metadata.noise_modes = noise.as_ref().map(|(model, _)| model.n_modes()).unwrap_or(0);
    metadata.extra = serde_json::json!({
        "scheme": cfg.scheme,
        "steps": n_steps,
        "stride": stride,
        "observe": mode,
    });
    Ok(SimulationOutput {
        csv,
        rows: obs.len(),
        metadata,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small() -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.ladder.mesh = 3;
        c.problem.final_time = 0.25;
        c.mc.realizations = 3;
        c.output.stride = Some(8);
        c
    }

    #[test]
    fn zero_final_time_gives_initial_row_only() {
        let mut c = small();
        c.problem.final_time = 0.0;
        let out = simulate(&c).unwrap();
        assert_eq!(out.rows, 1);
        assert_eq!(out.csv.lines().count(), 2);
    }

    #[test]
    fn output_independent_of_thread_count() {
        let mut c = small();
        c.mc.jobs = 1;
        let a = simulate(&c).unwrap();
        c.mc.jobs = 3;
        let b = simulate(&c).unwrap();
        assert_eq!(a.csv, b.csv);
    }

    #[test]
    fn probes_of_single_deterministic_path() {
        let mut c = small();
        c.noise.enabled = false;
        c.problem.nonlinearity = crate::harness::ForcingChoice::Zero;
        c.output.observe = Observe::Probes;
        c.output.probes = vec![0.5];
        let out = simulate(&c).unwrap();
        let last = out.csv.lines().last().unwrap();
        let v: f64 = last.split(',').nth(1).unwrap().parse().unwrap();
        // Standing wave sin(pi x) sin(pi t) / pi at x = 1/2, t = 1/4.
        let exact = (std::f64::consts::PI * 0.25).sin() / std::f64::consts::PI;
        assert!((v - exact).abs() < 5e-3, "{v} vs {exact}");
    }
}

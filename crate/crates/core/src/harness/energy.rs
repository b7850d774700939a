//! Monte Carlo means of the energy functionals over long times.
//!
//! For the linear problem the ensemble is advanced in modal coordinates in
//! batches, with increments sampled from the exact modal covariance of
//! `P_h Delta W` (one matrix product per batch and step). Nonlinear problems
//! step each path in dG coordinates.

use nalgebra::DMatrix;
use serde::Serialize;

use super::config::ExperimentConfig;
use super::pool::ordered_map;
use super::rate::ols;
use crate::error::{Error, Result};
use crate::integrators::{
    run, Discretization, ModeKernel, NoNoise, NoiseSource, Observer, Scheme, State, Stepper,
    StreamNoise,
};
use crate::noise::{projected_trace, ModalCovariance, NoiseModel, NoiseProjector, NoiseStream};
use crate::observables::{discrete_energy, hamiltonian, modified_energy, modified_energy_rate};
use crate::spectral::mode_norm_m_sq;

const BATCH: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyRow {
    pub t: f64,
    pub hamiltonian: f64,
    pub hamiltonian_se: f64,
    pub discrete_energy: f64,
    pub discrete_energy_se: f64,
    /// NaN when `tau` violates the strict CFL bound.
    pub modified_energy: f64,
    pub modified_energy_se: f64,
}

/// Slope of a mean series with its Monte Carlo standard error, from the
/// per-path least-squares slopes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeEstimate {
    pub slope: f64,
    pub se: f64,
    pub intercept: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergySeries {
    pub scheme: Scheme,
    pub tau: f64,
    pub h: f64,
    pub realizations: usize,
    pub noise_modes: usize,
    pub rows: Vec<EnergyRow>,
    /// `1/2 Tr(P_h Q P_h)`, or 0 without noise.
    pub trace_rate: f64,
    /// Growth rate of the expected modified energy under the Verlet scheme.
    pub modified_rate: Option<f64>,
    pub hamiltonian_slope: SlopeEstimate,
    pub discrete_slope: SlopeEstimate,
    pub modified_slope: Option<SlopeEstimate>,
}

impl EnergySeries {
    pub const CSV_HEADER: &'static str = "t,hamiltonian,hamiltonian_se,discrete_energy,discrete_energy_se,modified_energy,modified_energy_se,trace_line";

    /// Rows with the trace-formula line `H(0) + trace_rate t` appended.
    pub fn csv(&self) -> String {
        let h0 = self.rows.first().map(|r| r.hamiltonian).unwrap_or(0.0);
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.t,
                r.hamiltonian,
                r.hamiltonian_se,
                r.discrete_energy,
                r.discrete_energy_se,
                r.modified_energy,
                r.modified_energy_se,
                h0 + self.trace_rate * r.t
            ));
        }
        s
    }
}

// Per path, per observation: [H, E, E_m].
type PathSeries = Vec<[f64; 3]>;

/// Step 0, every `stride`-th step and the last step.
pub fn observation_steps(n_steps: usize, stride: usize) -> Vec<usize> {
    let stride = stride.max(1);
    let mut v: Vec<usize> = (0..=n_steps).step_by(stride).collect();
    if *v.last().unwrap() != n_steps {
        v.push(n_steps);
    }
    v
}

fn slope(times: &[f64], series: &[PathSeries], k: usize) -> Result<SlopeEstimate> {
    let m = series.len() as f64;
    let mut slopes = Vec::with_capacity(series.len());
    let mut icpts = Vec::with_capacity(series.len());
    for p in series {
        let y: Vec<f64> = p.iter().map(|v| v[k]).collect();
        let (s, c) = ols(times, &y)?;
        slopes.push(s);
        icpts.push(c);
    }
    let mean = slopes.iter().sum::<f64>() / m;
    let var = if m > 1.0 {
        slopes.iter().map(|s| (s - mean).powi(2)).sum::<f64>() / (m - 1.0)
    } else {
        0.0
    };
    Ok(SlopeEstimate {
        slope: mean,
        se: (var / m).sqrt(),
        intercept: icpts.iter().sum::<f64>() / m,
    })
}

/// Energy time series for `scheme` on the mesh `2^ladder.mesh` up to
/// `energy.T`, with step `energy.tau` (scheme-dependent default), observed
/// every `output.stride` steps (default: `energy.samples` rows).
pub fn energy_growth(cfg: &ExperimentConfig, scheme: Scheme) -> Result<EnergySeries> {
    cfg.validate()?;
    let tau = cfg.energy_tau(scheme);
    let disc = Discretization::with_spectral(cfg.space(cfg.ladder.mesh)?)?;
    let n_steps = (cfg.energy.final_time / tau).round() as usize;
    if ((n_steps as f64) * tau - cfg.energy.final_time).abs() > 1e-9 * cfg.energy.final_time.max(1.0) {
        return Err(Error::Config(format!(
            "energy.T = {} is not a multiple of tau = {tau}",
            cfg.energy.final_time
        )));
    }
    let stride = cfg
        .output
        .stride
        .unwrap_or((n_steps / cfg.energy.samples).max(1));
    let obs = observation_steps(n_steps, stride);
    let times: Vec<f64> = obs.iter().map(|&n| n as f64 * tau).collect();
    let model = cfg.noise_model(&disc.space)?;
    let m = if cfg.noise.enabled { cfg.mc.realizations } else { 1 };
    let f = cfg.nonlinearity();
    let s0 = State::from_initial(&disc, &cfg.u0(), &cfg.v0(), cfg.problem.velocity_projection)?;
    let op = disc.spectral()?;
    let cfl_ok = tau * tau * op.lambda_max() < 4.0;
    let cov = if cfg.noise.enabled {
        Some(ModalCovariance::new(&model, &disc.space, op)?)
    } else {
        None
    };
    // Refuse unstable explicit steps unless explicitly allowed.
    Stepper::new(scheme, tau, &disc, &f, cfg.cfl_policy())?;

    let series: Vec<PathSeries> = if f.is_zero() {
        linear_ensemble(cfg, scheme, tau, &disc, cov.as_ref(), &s0, &obs, m)?
    } else {
        pathwise(cfg, scheme, tau, &disc, &model, &s0, &obs, m)?
    };

    let mf = m as f64;
    let mut rows = Vec::with_capacity(obs.len());
    for (i, &t) in times.iter().enumerate() {
        let mut out = [0.0; 6];
        for k in 0..3 {
            let mean = series.iter().map(|p| p[i][k]).sum::<f64>() / mf;
            let var = if m > 1 {
                series.iter().map(|p| (p[i][k] - mean).powi(2)).sum::<f64>() / (mf - 1.0)
            } else {
                0.0
            };
            out[2 * k] = mean;
            out[2 * k + 1] = (var / mf).sqrt();
        }
        rows.push(EnergyRow {
            t,
            hamiltonian: out[0],
            hamiltonian_se: out[1],
            discrete_energy: out[2],
            discrete_energy_se: out[3],
            modified_energy: out[4],
            modified_energy_se: out[5],
        });
    }
    let trace_rate = if cfg.noise.enabled {
        0.5 * projected_trace(&model, &disc.space)?
    } else {
        0.0
    };
    let modified_rate = match (&cov, cfl_ok) {
        (Some(c), true) => Some(modified_energy_rate(&c.diagonal(), op.eigenvalues(), tau)?),
        (None, true) => Some(0.0),
        _ => None,
    };
    let fit = times.len() >= 2;
    let zero = SlopeEstimate {
        slope: 0.0,
        se: 0.0,
        intercept: rows.first().map(|r| r.hamiltonian).unwrap_or(0.0),
    };
    Ok(EnergySeries {
        scheme,
        tau,
        h: disc.space.h(),
        realizations: m,
        noise_modes: model.n_modes(),
        trace_rate,
        modified_rate,
        hamiltonian_slope: if fit { slope(&times, &series, 0)? } else { zero },
        discrete_slope: if fit { slope(&times, &series, 1)? } else { zero },
        modified_slope: if fit && cfl_ok { Some(slope(&times, &series, 2)?) } else { None },
        rows,
    })
}

#[allow(clippy::too_many_arguments)]
fn linear_ensemble(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    tau: f64,
    disc: &Discretization,
    cov: Option<&ModalCovariance>,
    s0: &State,
    obs: &[usize],
    m: usize,
) -> Result<Vec<PathSeries>> {
    let op = disc.spectral()?;
    let n = op.n_modes();
    let lam = op.eigenvalues();
    let kern: Vec<ModeKernel> = lam.iter().map(|&l| ModeKernel::for_scheme(scheme, l, tau)).collect();
    let phi = op.vectors();
    let gram = phi.transpose() * disc.stiffness.broken_gram().to_dense() * phi;
    let m0 = op.modal_state(&s0.u1, &s0.u2)?;
    let cfl_ok = tau * tau * op.lambda_max() < 4.0;
    let weights: Vec<(f64, f64)> = if cfl_ok {
        lam.iter()
            .map(|&l| Ok((mode_norm_m_sq(l, tau, 1.0, 0.0, 1.0)?, mode_norm_m_sq(l, tau, 0.0, 1.0, 1.0)?)))
            .collect::<Result<_>>()?
    } else {
        vec![(f64::NAN, f64::NAN); n]
    };
    let root = cov.map(|c| c.root().scale(tau.sqrt()));
    let seed = cfg.noise.seed;
    let n_batches = m.div_ceil(BATCH);
    let n_last = *obs.last().unwrap();
    let batches = ordered_map(n_batches, cfg.mc.jobs, |bi| {
        let first = bi * BATCH;
        let width = BATCH.min(m - first);
        let mut a = DMatrix::from_fn(n, width, |j, _| m0.a[j]);
        let mut b = DMatrix::from_fn(n, width, |j, _| m0.b[j]);
        let mut z = DMatrix::zeros(n, width);
        let mut g = DMatrix::zeros(n, width);
        let streams: Vec<NoiseStream> = (0..width).map(|c| NoiseStream::new(seed, (first + c) as u64)).collect();
        let mut out: Vec<PathSeries> = vec![Vec::with_capacity(obs.len()); width];
        let mut next_obs = 0;
        for step in 0..=n_last {
            if step > 0 {
                if let Some(r) = &root {
                    for (c, s) in streams.iter().enumerate() {
                        s.normals(step as u64 - 1, z.column_mut(c).as_mut_slice());
                    }
                    g.gemm(1.0, r, &z, 0.0);
                }
                for c in 0..width {
                    for j in 0..n {
                        let gj = if root.is_some() { g[(j, c)] } else { 0.0 };
                        let (x, y) = kern[j].apply(a[(j, c)], b[(j, c)], gj);
                        a[(j, c)] = x;
                        b[(j, c)] = y;
                    }
                }
            }
            if next_obs < obs.len() && obs[next_obs] == step {
                let ga = &gram * &a;
                for c in 0..width {
                    let mut hq = 0.0;
                    let mut eq = 0.0;
                    let mut em = 0.0;
                    let mut kin = 0.0;
                    for j in 0..n {
                        let (x, y) = (a[(j, c)], b[(j, c)]);
                        hq += x * ga[(j, c)];
                        eq += lam[j] * x * x;
                        kin += y * y;
                        em += weights[j].0 * x * x + weights[j].1 * y * y;
                    }
                    out[c].push([0.5 * hq + 0.5 * kin, 0.5 * eq + 0.5 * kin, em]);
                }
                next_obs += 1;
            }
        }
        Ok(out)
    })?;
    Ok(batches.into_iter().flatten().collect())
}

struct EnergyObserver<'a> {
    disc: &'a Discretization,
    f: &'a crate::integrators::Nonlinearity,
    tau: f64,
    obs: &'a [usize],
    next: usize,
    out: PathSeries,
    err: Option<Error>,
}

impl Observer for EnergyObserver<'_> {
    fn stride(&self) -> usize {
        1
    }
    fn observe(&mut self, step: usize, _t: f64, state: &State) {
        if self.next >= self.obs.len() || self.obs[self.next] != step {
            return;
        }
        self.next += 1;
        let h = hamiltonian(self.disc, state, self.f);
        let e = discrete_energy(self.disc, state);
        let em = match self.disc.spectral.as_ref() {
            Some(op) => modified_energy(state, self.tau, op).unwrap_or(f64::NAN),
            None => f64::NAN,
        };
        match (h, e) {
            (Ok(h), Ok(e)) => self.out.push([h, e, em]),
            (Err(x), _) | (_, Err(x)) => self.err = Some(x),
        }
    }
}

#[allow(clippy::too_many_arguments)]
fn pathwise(
    cfg: &ExperimentConfig,
    scheme: Scheme,
    tau: f64,
    disc: &Discretization,
    model: &NoiseModel,
    s0: &State,
    obs: &[usize],
    m: usize,
) -> Result<Vec<PathSeries>> {
    let f = cfg.nonlinearity();
    let stepper = Stepper::new(scheme, tau, disc, &f, cfg.cfl_policy())?;
    let projector = NoiseProjector::new(model, &disc.space)?;
    let n_last = *obs.last().unwrap();
    ordered_map(m, cfg.mc.jobs, |r| {
        let mut ob = EnergyObserver {
            disc,
            f: &f,
            tau,
            obs,
            next: 0,
            out: Vec::with_capacity(obs.len()),
            err: None,
        };
        let mut noise: Box<dyn NoiseSource> = if cfg.noise.enabled {
            Box::new(StreamNoise::new(model, &projector, tau, NoiseStream::new(cfg.noise.seed, r as u64)))
        } else {
            Box::new(NoNoise)
        };
        run(&stepper, s0.clone(), n_last, noise.as_mut(), &mut [&mut ob])?;
        match ob.err {
            Some(e) => Err(e),
            None => Ok(ob.out),
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::ForcingChoice;

    fn linear(mesh: u32, m: usize, t: f64) -> ExperimentConfig {
        let mut c = ExperimentConfig::default();
        c.problem.nonlinearity = ForcingChoice::Zero;
        c.ladder.mesh = mesh;
        c.mc.realizations = m;
        c.energy.final_time = t;
        c.energy.samples = 20;
        c
    }

    #[test]
    fn noiseless_svm_conserves_modified_energy() {
        let mut c = linear(3, 1, 1.0);
        c.noise.enabled = false;
        c.energy.tau = Some(1.0 / 200.0);
        let s = energy_growth(&c, Scheme::Svm).unwrap();
        let e0 = s.rows[0].modified_energy;
        for r in &s.rows {
            assert!((r.modified_energy - e0).abs() < 1e-12 * e0);
        }
        assert_eq!(s.trace_rate, 0.0);
    }

    #[test]
    fn ensemble_matches_pathwise_stepping_in_law() {
        // Same law, different samplers: compare slopes within MC error.
        let mut c = linear(2, 400, 2.0);
        c.energy.tau = Some(1.0 / 100.0);
        let a = energy_growth(&c, Scheme::Stm).unwrap();
        let mut cd = c.clone();
        cd.problem.nonlinearity = ForcingChoice::Zero;
        let b = {
            let disc = Discretization::with_spectral(cd.space(2).unwrap()).unwrap();
            let model = cd.noise_model(&disc.space).unwrap();
            let s0 = State::from_initial(&disc, &cd.u0(), &cd.v0(), cd.problem.velocity_projection).unwrap();
            let obs = observation_steps(200, 10);
            pathwise(&cd, Scheme::Stm, 0.01, &disc, &model, &s0, &obs, 400).unwrap()
        };
        let times: Vec<f64> = observation_steps(200, 10).iter().map(|&n| n as f64 * 0.01).collect();
        let sb = slope(&times, &b, 0).unwrap();
        let sa = a.hamiltonian_slope;
        let se = (sa.se.powi(2) + sb.se.powi(2)).sqrt();
        assert!((sa.slope - sb.slope).abs() < 4.0 * se, "{sa:?} {sb:?}");
        assert!((sa.slope - a.trace_rate).abs() < 4.0 * sa.se + 0.1 * a.trace_rate, "{sa:?} {}", a.trace_rate);
    }

    #[test]
    fn parallel_and_serial_agree() {
        let mut c = linear(2, 130, 0.5);
        c.energy.tau = Some(1.0 / 100.0);
        c.mc.jobs = 1;
        let a = energy_growth(&c, Scheme::Sem).unwrap();
        c.mc.jobs = 3;
        let b = energy_growth(&c, Scheme::Sem).unwrap();
        assert_eq!(a.rows, b.rows);
    }

    #[test]
    fn observation_schedule() {
        assert_eq!(observation_steps(10, 1), (0..=10).collect::<Vec<_>>());
        assert_eq!(observation_steps(10, 2), vec![0, 2, 4, 6, 8, 10]);
        assert_eq!(observation_steps(7, 3), vec![0, 3, 6, 7]);
        assert_eq!(observation_steps(0, 5), vec![0]);
        assert_eq!(observation_steps(5, 50), vec![0, 5]);
    }
}

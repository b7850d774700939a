use serde::Serialize;

use super::config::{dyadic_cfl_exponent, ExperimentConfig};
use super::coupled::{CoupledPlan, Reference, Target};
use super::rate::{fit_rate, RateFit};
use crate::error::{Error, Result};
use crate::integrators::{Discretization, Scheme, State};
use crate::noise::NoiseProjector;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Space,
    Time,
}

impl std::str::FromStr for Axis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "space" => Ok(Axis::Space),
            "time" => Ok(Axis::Time),
            _ => Err(Error::Config(format!("unknown axis '{s}' (expected space or time)"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub scheme: Scheme,
    pub h: f64,
    pub tau: f64,
    pub n_dofs: usize,
    pub rms_u1: f64,
    pub se_u1: f64,
    pub rms_u2: f64,
    pub se_u2: f64,
    pub seconds_per_path: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeFit {
    pub scheme: Scheme,
    pub fit: Option<RateFit>,
    /// Theoretical displacement rate, when one is known.
    pub nominal: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceTable {
    pub axis: Axis,
    pub rows: Vec<ConvergenceRow>,
    pub fits: Vec<SchemeFit>,
    pub reference: String,
    pub realizations: usize,
    pub noise_modes: Option<usize>,
}

impl ConvergenceTable {
    pub const CSV_HEADER: &'static str =
        "scheme,h,tau,n_dofs,rms_u1,se_u1,rms_u2,se_u2,seconds_per_path";

    pub fn csv(&self) -> String {
        let mut s = String::from(Self::CSV_HEADER);
        s.push('\n');
        for r in &self.rows {
            s.push_str(&format!(
                "{},{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}\n",
                r.scheme, r.h, r.tau, r.n_dofs, r.rms_u1, r.se_u1, r.rms_u2, r.se_u2, r.seconds_per_path
            ));
        }
        s
    }

    pub fn fit_for(&self, scheme: Scheme) -> Option<&SchemeFit> {
        self.fits.iter().find(|f| f.scheme == scheme)
    }
}

/// Noise regularity bound: `beta` just below `1 + s - 1/2`.
pub fn beta_sup(s: f64) -> f64 {
    0.5 + s
}

/// Nominal displacement rate for the configured problem.
pub fn nominal_rate(cfg: &ExperimentConfig, axis: Axis, scheme: Scheme) -> Option<f64> {
    let p = cfg.problem.degree as f64;
    let beta = beta_sup(cfg.noise.s);
    match (axis, cfg.noise.enabled) {
        (Axis::Space, false) => Some(p + 1.0),
        (Axis::Space, true) => Some(((p + 1.0) / (p + 2.0) * beta).min(p + 1.0)),
        (Axis::Time, false) => match scheme {
            Scheme::Svm => Some(2.0),
            Scheme::Sem => Some(1.0),
            Scheme::Stm => None,
        },
        (Axis::Time, true) => match scheme {
            Scheme::Svm => Some((2.0 * beta / 3.0).min(1.0)),
            Scheme::Stm => Some(beta.min(1.0)),
            Scheme::Sem => None,
        },
    }
}

fn tau_exponent(tau: f64) -> Result<u32> {
    let k = -tau.log2();
    if (k - k.round()).abs() > 1e-9 || k < 0.0 {
        return Err(Error::Config(format!("time.tau = {tau} is not a power of two")));
    }
    Ok(k.round() as u32)
}

fn discretization(cfg: &ExperimentConfig, exponent: u32, spectral: bool) -> Result<Discretization> {
    let space = cfg.space(exponent)?;
    if spectral {
        Discretization::with_spectral(space)
    } else {
        Ok(Discretization::new(space))
    }
}

struct Builder<'c> {
    cfg: &'c ExperimentConfig,
    exps: Vec<u32>,
    discs: Vec<Discretization>,
}

impl<'c> Builder<'c> {
    fn disc(&mut self, exponent: u32, spectral: bool) -> Result<usize> {
        if let Some(i) = self.exps.iter().position(|&e| e == exponent) {
            if spectral && self.discs[i].spectral.is_none() {
                self.discs[i] = discretization(self.cfg, exponent, true)?;
            }
            return Ok(i);
        }
        self.discs.push(discretization(self.cfg, exponent, spectral)?);
        self.exps.push(exponent);
        Ok(self.discs.len() - 1)
    }

    fn finish(self, targets: Vec<Target>, reference: Reference) -> Result<CoupledPlan> {
        let cfg = self.cfg;
        let (u0, v0) = (cfg.u0(), cfg.v0());
        let initial = self
            .discs
            .iter()
            .map(|d| State::from_initial(d, &u0, &v0, cfg.problem.velocity_projection))
            .collect::<Result<Vec<_>>>()?;
        let noise = if cfg.noise.enabled {
            let finest = self
                .discs
                .iter()
                .max_by_key(|d| d.space.n_dofs())
                .expect("at least one discretization");
            let model = cfg.noise_model(&finest.space)?;
            let projectors = self
                .discs
                .iter()
                .map(|d| NoiseProjector::new(&model, &d.space))
                .collect::<Result<Vec<_>>>()?;
            Some((model, projectors))
        } else {
            None
        };
        Ok(CoupledPlan {
            discs: self.discs,
            initial,
            targets,
            reference,
            noise,
            f: cfg.nonlinearity(),
            final_time: cfg.problem.final_time,
            seed: cfg.noise.seed,
            policy: cfg.cfl_policy(),
        })
    }
}

fn table(
    cfg: &ExperimentConfig,
    axis: Axis,
    plan: &CoupledPlan,
    reference: String,
) -> Result<ConvergenceTable> {
    let summaries = plan.execute(cfg.mc.realizations, cfg.mc.jobs)?;
    let rows: Vec<ConvergenceRow> = plan
        .targets
        .iter()
        .zip(&summaries)
        .map(|(t, s)| {
            let d = &plan.discs[t.disc];
            ConvergenceRow {
                scheme: t.scheme,
                h: d.space.h(),
                tau: t.tau(),
                n_dofs: d.space.n_dofs(),
                rms_u1: s.rms_u1,
                se_u1: s.se_u1,
                rms_u2: s.rms_u2,
                se_u2: s.se_u2,
                seconds_per_path: s.seconds_per_path,
            }
        })
        .collect();
    let fits = cfg
        .schemes
        .iter()
        .map(|&scheme| {
            let mine: Vec<&ConvergenceRow> = rows.iter().filter(|r| r.scheme == scheme).collect();
            let levels: Vec<f64> = mine
                .iter()
                .map(|r| if axis == Axis::Space { r.h } else { r.tau })
                .collect();
            let errors: Vec<f64> = mine.iter().map(|r| r.rms_u1).collect();
            SchemeFit {
                scheme,
                fit: fit_rate(&levels, &errors).ok(),
                nominal: nominal_rate(cfg, axis, scheme),
            }
        })
        .collect();
    Ok(ConvergenceTable {
        axis,
        rows,
        fits,
        reference,
        realizations: if cfg.noise.enabled { cfg.mc.realizations } else { 1 },
        noise_modes: plan.noise.as_ref().map(|(m, _)| m.n_modes()),
    })
}

/// Spatial study: one target per scheme and mesh level, each stepped at the
/// largest CFL-admissible power of two (or `time.tau`), against a finer
/// reference on the same noise path, or against the closed-form solution for
/// the deterministic linear problem.
pub fn converge_space(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    let plan = space_plan(cfg)?;
    let reference = match &plan.reference {
        Reference::Exact(_) => "closed-form solution".to_string(),
        Reference::Discrete(t) => format!(
            "{} on {} cells with tau = 2^-{}",
            t.scheme,
            plan.discs[t.disc].space.n_elements(),
            t.tau_exp
        ),
    };
    table(cfg, Axis::Space, &plan, reference)
}

pub(crate) fn space_plan(cfg: &ExperimentConfig) -> Result<CoupledPlan> {
    cfg.validate()?;
    let mut b = Builder {
        cfg,
        exps: Vec::new(),
        discs: Vec::new(),
    };
    let safety = cfg.time.safety;
    let fixed = cfg.time.tau.map(tau_exponent).transpose()?;
    let mut targets = Vec::new();
    for &scheme in &cfg.schemes {
        for &e in &cfg.ladder.space {
            let i = b.disc(e, scheme == Scheme::Stm)?;
            let k = fixed.unwrap_or_else(|| dyadic_cfl_exponent(b.discs[i].lambda_max, safety));
            targets.push(Target {
                scheme,
                disc: i,
                tau_exp: k,
            });
        }
    }
    let reference = match cfg.exact_solution() {
        Some(u) => Reference::Exact(Box::new(u)),
        None => {
            let scheme = cfg.ladder.reference_scheme.unwrap_or(Scheme::Svm);
            let i = b.disc(cfg.space_ref(), scheme == Scheme::Stm)?;
            let mut k = cfg.space_ref_tau_exponent();
            if scheme == Scheme::Svm {
                k = k.max(dyadic_cfl_exponent(b.discs[i].lambda_max, safety));
            }
            Reference::Discrete(Target {
                scheme,
                disc: i,
                tau_exp: k,
            })
        }
    };
    b.finish(targets, reference)
}

/// Temporal study on the fixed mesh `2^ladder.mesh` against a same-mesh
/// reference at step `2^-time_ref`.
pub fn converge_time(cfg: &ExperimentConfig) -> Result<ConvergenceTable> {
    cfg.validate()?;
    let mut b = Builder {
        cfg,
        exps: Vec::new(),
        discs: Vec::new(),
    };
    let ref_scheme = cfg.ladder.reference_scheme.unwrap_or(Scheme::Stm);
    let needs_spectral = ref_scheme == Scheme::Stm || cfg.schemes.contains(&Scheme::Stm);
    let i = b.disc(cfg.ladder.mesh, needs_spectral)?;
    let mut targets = Vec::new();
    for &scheme in &cfg.schemes {
        for &k in &cfg.ladder.time {
            targets.push(Target {
                scheme,
                disc: i,
                tau_exp: k,
            });
        }
    }
    let rt = Target {
        scheme: ref_scheme,
        disc: i,
        tau_exp: cfg.time_ref(),
    };
    let plan = b.finish(targets, Reference::Discrete(rt))?;
    let reference = format!(
        "{} on the same {} cells with tau = 2^-{}",
        ref_scheme,
        plan.discs[i].space.n_elements(),
        rt.tau_exp
    );
    table(cfg, Axis::Time, &plan, reference)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyRow {
    pub scheme: Scheme,
    pub h: f64,
    pub tau: f64,
    pub error: f64,
    pub seconds_per_path: f64,
}

pub const EFFICIENCY_CSV_HEADER: &str = "scheme,h,tau,error,seconds_per_path";

/// Error against cost of every scheme over the spatial ladder. Wall-clock
/// covers stepping only; noise synthesis is shared and excluded.
pub fn efficiency(cfg: &ExperimentConfig) -> Result<Vec<EfficiencyRow>> {
    let t = converge_space(cfg)?;
    Ok(t.rows
        .iter()
        .map(|r| EfficiencyRow {
            scheme: r.scheme,
            h: r.h,
            tau: r.tau,
            error: r.rms_u1,
            seconds_per_path: r.seconds_per_path,
        })
        .collect())
}

pub fn efficiency_csv(rows: &[EfficiencyRow]) -> String {
    let mut s = String::from(EFFICIENCY_CSV_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!(
            "{},{:.16e},{:.16e},{:.16e},{:.16e}\n",
            r.scheme, r.h, r.tau, r.error, r.seconds_per_path
        ));
    }
    s
}

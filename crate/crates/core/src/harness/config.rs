//! Experiment configuration as flat `key = value` text.
//!
//! Lines are `key = value`; `#` starts a comment. Unknown keys are errors.
//! Level lists are exponents: `ladder.space = 4,5,6` means meshes with
//! `2^4, 2^5, 2^6` cells, and `ladder.time = 4..8` means steps `2^-4 .. 2^-8`.

use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::dg::{DGSpace, Mesh1D, SmoothFn};
use crate::error::{Error, Result};
use crate::integrators::{CflPolicy, Nonlinearity, Scheme, VelocityProjection};
use crate::noise::NoiseModel;
use crate::spectral::DEFAULT_SAFETY;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ForcingChoice {
    Zero,
    LinearDamping,
    SineGordon,
}

impl ForcingChoice {
    pub fn build(&self) -> Nonlinearity {
        match self {
            ForcingChoice::Zero => Nonlinearity::zero(),
            ForcingChoice::LinearDamping => Nonlinearity::linear_damping(),
            ForcingChoice::SineGordon => Nonlinearity::sine_gordon(),
        }
    }
}

impl FromStr for ForcingChoice {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "zero" | "linear" | "none" => Ok(Self::Zero),
            "linear-damping" => Ok(Self::LinearDamping),
            "sine-gordon" => Ok(Self::SineGordon),
            _ => Err(Error::Config(format!("unknown nonlinearity '{s}'"))),
        }
    }
}

/// Initial data: zero or `amplitude sin(k pi (x - a) / L)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum InitialData {
    Zero,
    Sine { k: f64, amplitude: f64 },
}

impl InitialData {
    pub fn smooth(&self, a: f64, length: f64) -> SmoothFn {
        match *self {
            InitialData::Zero => SmoothFn::new(|_| 0.0, |_| 0.0, |_| 0.0),
            InitialData::Sine { k, amplitude } => SmoothFn::sine(k, a, length, amplitude),
        }
    }

    fn mode(&self) -> Option<(f64, f64)> {
        match *self {
            InitialData::Zero => None,
            InitialData::Sine { k, amplitude } => Some((k, amplitude)),
        }
    }
}

impl FromStr for InitialData {
    type Err = Error;
    /// `zero`, `sin`, `sin:K` or `sin:K:AMPLITUDE`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::Config(format!("bad initial data '{s}'"));
        let mut parts = s.split(':');
        match parts.next() {
            Some("zero") if parts.next().is_none() => Ok(Self::Zero),
            Some("sin") => {
                let k = parts.next().map(|v| v.parse::<f64>().map_err(|_| bad())).transpose()?;
                let amp = parts.next().map(|v| v.parse::<f64>().map_err(|_| bad())).transpose()?;
                if parts.next().is_some() {
                    return Err(bad());
                }
                Ok(Self::Sine {
                    k: k.unwrap_or(1.0),
                    amplitude: amp.unwrap_or(1.0),
                })
            }
            _ => Err(bad()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Observe {
    Energy,
    Probes,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProblemConfig {
    pub a: f64,
    pub b: f64,
    pub degree: usize,
    pub sigma0: Option<f64>,
    pub nonlinearity: ForcingChoice,
    pub u0: InitialData,
    pub v0: InitialData,
    pub final_time: f64,
    pub velocity_projection: VelocityProjection,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NoiseConfig {
    pub enabled: bool,
    pub s: f64,
    /// Truncation `J`; default four modes per dof of the finest space used.
    pub modes: Option<usize>,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LadderConfig {
    /// Mesh exponents of the spatial study.
    pub space: Vec<u32>,
    /// Step exponents of the temporal study.
    pub time: Vec<u32>,
    /// Mesh exponent for single-mesh runs (temporal study, simulate, energy).
    pub mesh: u32,
    pub space_ref: Option<u32>,
    pub time_ref: Option<u32>,
    pub reference_scheme: Option<Scheme>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TimeConfig {
    /// Fixed step; default is the largest CFL-admissible power of two.
    pub tau: Option<f64>,
    pub safety: f64,
    pub allow_unstable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McConfig {
    pub realizations: usize,
    /// Worker threads; 0 picks the rayon default.
    pub jobs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EnergyConfig {
    pub final_time: f64,
    /// Default `1/6400` for SVM and `1/500` otherwise.
    pub tau: Option<f64>,
    /// Number of output rows after the initial one.
    pub samples: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputConfig {
    pub dir: PathBuf,
    pub stride: Option<usize>,
    pub probes: Vec<f64>,
    pub observe: Observe,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: ProblemConfig,
    pub noise: NoiseConfig,
    pub ladder: LadderConfig,
    pub time: TimeConfig,
    pub mc: McConfig,
    pub energy: EnergyConfig,
    pub output: OutputConfig,
    pub scheme: Scheme,
    pub schemes: Vec<Scheme>,
}

impl Default for ExperimentConfig {
    /// Stochastic sine-Gordon on (0, 1) with `u_0 = 0`, `v_0 = sin(pi x)`.
    fn default() -> Self {
        Self {
            problem: ProblemConfig {
                a: 0.0,
                b: 1.0,
                degree: 1,
                sigma0: None,
                nonlinearity: ForcingChoice::SineGordon,
                u0: InitialData::Zero,
                v0: InitialData::Sine { k: 1.0, amplitude: 1.0 },
                final_time: 1.0,
                velocity_projection: VelocityProjection::L2,
            },
            noise: NoiseConfig {
                enabled: true,
                s: 1.0,
                modes: None,
                seed: 20240101,
            },
            ladder: LadderConfig {
                space: (4..=8).collect(),
                time: (8..=11).collect(),
                mesh: 5,
                space_ref: None,
                time_ref: None,
                reference_scheme: None,
            },
            time: TimeConfig {
                tau: None,
                safety: DEFAULT_SAFETY,
                allow_unstable: false,
            },
            mc: McConfig {
                realizations: 100,
                jobs: 0,
            },
            energy: EnergyConfig {
                final_time: 50.0,
                tau: None,
                samples: 100,
            },
            output: OutputConfig {
                dir: PathBuf::from("out"),
                stride: None,
                probes: vec![0.25, 0.5, 0.75],
                observe: Observe::Energy,
            },
            scheme: Scheme::Svm,
            schemes: vec![Scheme::Svm],
        }
    }
}

fn parse<T: FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse::<T>()
        .map_err(|_| Error::Config(format!("invalid value '{v}' for {key}")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(Error::Config(format!("invalid boolean '{v}' for {key}"))),
    }
}

fn parse_optional<T: FromStr>(key: &str, v: &str) -> Result<Option<T>> {
    if v == "auto" || v.is_empty() {
        Ok(None)
    } else {
        parse(key, v).map(Some)
    }
}

/// `4,5,6` or `4..6` (inclusive).
fn parse_levels(key: &str, v: &str) -> Result<Vec<u32>> {
    if let Some((lo, hi)) = v.split_once("..") {
        let lo: u32 = parse(key, lo.trim())?;
        let hi: u32 = parse(key, hi.trim())?;
        if hi < lo {
            return Err(Error::Config(format!("empty range '{v}' for {key}")));
        }
        return Ok((lo..=hi).collect());
    }
    v.split(',').map(|t| parse(key, t.trim())).collect()
}

fn parse_list<T: FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(',').map(|t| parse(key, t.trim())).collect()
}

impl ExperimentConfig {
    /// Defaults overridden by the given text.
    pub fn from_kv_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("line {}: expected 'key = value', got '{raw}'", lineno + 1))
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_kv_text(&text)
    }

    /// Set one key.
    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "problem.a" => self.problem.a = parse(key, v)?,
            "problem.b" => self.problem.b = parse(key, v)?,
            "problem.degree" => self.problem.degree = parse(key, v)?,
            "problem.sigma0" => self.problem.sigma0 = parse_optional(key, v)?,
            "problem.nonlinearity" => self.problem.nonlinearity = parse(key, v)?,
            "problem.u0" => self.problem.u0 = parse(key, v)?,
            "problem.v0" => self.problem.v0 = parse(key, v)?,
            "problem.T" | "problem.final_time" => self.problem.final_time = parse(key, v)?,
            "problem.velocity_projection" => {
                self.problem.velocity_projection = match v {
                    "l2" => VelocityProjection::L2,
                    "galerkin" => VelocityProjection::Galerkin,
                    _ => return Err(Error::Config(format!("invalid value '{v}' for {key}"))),
                }
            }
            "noise.enabled" => self.noise.enabled = parse_bool(key, v)?,
            "noise.s" => self.noise.s = parse(key, v)?,
            "noise.modes" => self.noise.modes = parse_optional(key, v)?,
            "noise.seed" => self.noise.seed = parse(key, v)?,
            "ladder.space" => self.ladder.space = parse_levels(key, v)?,
            "ladder.time" => self.ladder.time = parse_levels(key, v)?,
            "ladder.mesh" => self.ladder.mesh = parse(key, v)?,
            "ladder.space_ref" => self.ladder.space_ref = parse_optional(key, v)?,
            "ladder.time_ref" => self.ladder.time_ref = parse_optional(key, v)?,
            "ladder.reference_scheme" => self.ladder.reference_scheme = parse_optional(key, v)?,
            "time.tau" => self.time.tau = parse_optional(key, v)?,
            "time.safety" => self.time.safety = parse(key, v)?,
            "time.allow_unstable" => self.time.allow_unstable = parse_bool(key, v)?,
            "mc.realizations" => self.mc.realizations = parse(key, v)?,
            "mc.jobs" => self.mc.jobs = parse(key, v)?,
            "energy.T" | "energy.final_time" => self.energy.final_time = parse(key, v)?,
            "energy.tau" => self.energy.tau = parse_optional(key, v)?,
            "energy.samples" => self.energy.samples = parse(key, v)?,
            "output.dir" => self.output.dir = PathBuf::from(v),
            "output.stride" => self.output.stride = parse_optional(key, v)?,
            "output.probes" => self.output.probes = parse_list(key, v)?,
            "output.observe" => {
                self.output.observe = match v {
                    "energy" => Observe::Energy,
                    "probes" => Observe::Probes,
                    _ => return Err(Error::Config(format!("invalid value '{v}' for {key}"))),
                }
            }
            "scheme" => self.scheme = parse(key, v)?,
            "schemes" => self.schemes = parse_list(key, v)?,
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// Checks that do not require building operators.
    pub fn validate(&self) -> Result<()> {
        let p = &self.problem;
        let err = |m: String| Err(Error::Config(m));
        if !(p.a < p.b) || !p.a.is_finite() || !p.b.is_finite() {
            return err(format!("bad domain ({}, {})", p.a, p.b));
        }
        if p.degree == 0 || p.degree > 8 {
            return err(format!("degree must be in 1..=8, got {}", p.degree));
        }
        if let Some(s) = p.sigma0 {
            if !(s > 0.0) {
                return err(format!("sigma0 must be positive, got {s}"));
            }
        }
        if !(p.final_time >= 0.0 && p.final_time.is_finite()) {
            return err(format!("final time must be >= 0, got {}", p.final_time));
        }
        if !(self.noise.s >= 0.0) {
            return err(format!("noise.s must be >= 0, got {}", self.noise.s));
        }
        if self.noise.modes == Some(0) && self.noise.enabled {
            return err("noise.modes = 0 with noise enabled".into());
        }
        if self.ladder.space.is_empty() || self.ladder.time.is_empty() {
            return err("level lists must not be empty".into());
        }
        if self.ladder.space.iter().chain(&self.ladder.time).any(|&e| e > 20) || self.ladder.mesh > 20 {
            return err("level exponents above 20 are not supported".into());
        }
        let sref = self.space_ref();
        if let Some(&m) = self.ladder.space.iter().max() {
            if sref <= m {
                return err(format!("space reference 2^{sref} cells is not finer than level 2^{m}"));
            }
        }
        let tref = self.time_ref();
        if let Some(&m) = self.ladder.time.iter().max() {
            if tref <= m {
                return err(format!("time reference 2^-{tref} is not finer than level 2^-{m}"));
            }
        }
        if let Some(t) = self.time.tau {
            if !(t > 0.0 && t.is_finite()) {
                return err(format!("time.tau must be positive, got {t}"));
            }
        }
        if let Some(t) = self.energy.tau {
            if !(t > 0.0 && t.is_finite()) {
                return err(format!("energy.tau must be positive, got {t}"));
            }
        }
        if !(self.time.safety > 0.0 && self.time.safety <= 1.0) {
            return err(format!("time.safety must be in (0, 1], got {}", self.time.safety));
        }
        if self.mc.realizations == 0 {
            return err("mc.realizations must be positive".into());
        }
        if self.energy.samples == 0 || !(self.energy.final_time >= 0.0) {
            return err("energy.samples must be positive and energy.T >= 0".into());
        }
        if self.schemes.is_empty() {
            return err("schemes must not be empty".into());
        }
        if self.output.stride == Some(0) {
            return err("output.stride must be positive".into());
        }
        for &x in &self.output.probes {
            if !(x >= p.a && x <= p.b) {
                return err(format!("probe {x} outside ({}, {})", p.a, p.b));
            }
        }
        Ok(())
    }

    /// Reference mesh exponent: 10 for `p = 1`, 9 otherwise, unless set.
    pub fn space_ref(&self) -> u32 {
        self.ladder
            .space_ref
            .unwrap_or(if self.problem.degree == 1 { 10 } else { 9 })
    }

    /// Reference step exponent: four halvings below the finest level, unless set.
    pub fn time_ref(&self) -> u32 {
        self.ladder
            .time_ref
            .unwrap_or_else(|| self.ladder.time.iter().max().copied().unwrap_or(0) + 4)
    }

    /// Cap on the spatial study's reference step: `2^-12` for `p = 1`,
    /// `2^-11` otherwise, unless set.
    pub fn space_ref_tau_exponent(&self) -> u32 {
        self.ladder
            .time_ref
            .unwrap_or(if self.problem.degree == 1 { 12 } else { 11 })
    }

    pub fn length(&self) -> f64 {
        self.problem.b - self.problem.a
    }

    pub fn space(&self, exponent: u32) -> Result<DGSpace> {
        let mesh = Mesh1D::uniform(self.problem.a, self.problem.b, 1usize << exponent)?;
        DGSpace::new(mesh, self.problem.degree, self.problem.sigma0)
    }

    pub fn nonlinearity(&self) -> Nonlinearity {
        self.problem.nonlinearity.build()
    }

    pub fn u0(&self) -> SmoothFn {
        self.problem.u0.smooth(self.problem.a, self.length())
    }

    pub fn v0(&self) -> SmoothFn {
        self.problem.v0.smooth(self.problem.a, self.length())
    }

    /// Noise model whose truncation defaults to four modes per dof of `finest`.
    pub fn noise_model(&self, finest: &DGSpace) -> Result<NoiseModel> {
        let j = self.noise.modes.unwrap_or(4 * finest.n_dofs());
        NoiseModel::new(self.noise.s, j, self.problem.a, self.problem.b)
    }

    pub fn cfl_policy(&self) -> CflPolicy {
        CflPolicy {
            safety: self.time.safety,
            allow_unstable: self.time.allow_unstable,
        }
    }

    /// The closed-form solution, when the problem is linear, deterministic
    /// and has single-mode sine (or zero) data.
    pub fn exact_solution(&self) -> Option<impl Fn(f64, f64) -> f64> {
        if self.noise.enabled || self.problem.nonlinearity != ForcingChoice::Zero {
            return None;
        }
        let (a, l) = (self.problem.a, self.length());
        let (ku, au) = self.problem.u0.mode().unwrap_or((1.0, 0.0));
        let (kv, av) = self.problem.v0.mode().unwrap_or((ku, 0.0));
        if ku != kv && au != 0.0 && av != 0.0 {
            return None;
        }
        let k = if au != 0.0 { ku } else { kv };
        let w = k * std::f64::consts::PI / l;
        Some(move |x: f64, t: f64| {
            (w * (x - a)).sin() * (au * (w * t).cos() + av / w * (w * t).sin())
        })
    }

    /// Energy step for a scheme.
    pub fn energy_tau(&self, scheme: Scheme) -> f64 {
        self.energy.tau.unwrap_or(match scheme {
            Scheme::Svm => 1.0 / 6400.0,
            _ => 1.0 / 500.0,
        })
    }
}

/// Largest power of two `2^-k` with `tau sqrt(lambda_max) <= 2 safety`.
pub fn dyadic_cfl_exponent(lambda_max: f64, safety: f64) -> u32 {
    let limit = 2.0 * safety / lambda_max.sqrt();
    let mut k = 0u32;
    while 2f64.powi(-(k as i32)) > limit {
        k += 1;
    }
    k
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        let c = ExperimentConfig::default();
        c.validate().unwrap();
        assert_eq!(c.space_ref(), 10);
        assert_eq!(c.time_ref(), 15);
    }

    #[test]
    fn parses_keys_and_rejects_garbage() {
        let c = ExperimentConfig::from_kv_text(
            "# comment\nproblem.degree = 2\nnoise.s = 0 # white\nladder.space = 2..4\nschemes = svm, stm\nproblem.v0 = sin:2:0.5\n",
        )
        .unwrap();
        assert_eq!(c.problem.degree, 2);
        assert_eq!(c.noise.s, 0.0);
        assert_eq!(c.ladder.space, vec![2, 3, 4]);
        assert_eq!(c.schemes, vec![Scheme::Svm, Scheme::Stm]);
        assert_eq!(c.problem.v0, InitialData::Sine { k: 2.0, amplitude: 0.5 });
        assert_eq!(c.space_ref(), 9);
        assert!(ExperimentConfig::from_kv_text("bogus.key = 1").is_err());
        assert!(ExperimentConfig::from_kv_text("noise.s").is_err());
        assert!(ExperimentConfig::from_kv_text("noise.s = abc").is_err());
        assert!(ExperimentConfig::from_kv_text("problem.u0 = cos").is_err());
    }

    #[test]
    fn validation_catches_inconsistent_ladders() {
        let mut c = ExperimentConfig::default();
        c.ladder.space_ref = Some(8);
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.ladder.time = vec![4, 20];
        c.ladder.time_ref = Some(12);
        assert!(c.validate().is_err());
        let mut c = ExperimentConfig::default();
        c.mc.realizations = 0;
        assert!(c.validate().is_err());
    }

    #[test]
    fn exact_solution_for_linear_wave() {
        let mut c = ExperimentConfig::default();
        assert!(c.exact_solution().is_none());
        c.noise.enabled = false;
        c.problem.nonlinearity = ForcingChoice::Zero;
        let u = c.exact_solution().unwrap();
        let pi = std::f64::consts::PI;
        let x = 0.3;
        let t = 0.7;
        assert!((u(x, t) - (pi * x).sin() * (pi * t).sin() / pi).abs() < 1e-15);
    }

    #[test]
    fn dyadic_exponent_respects_limit() {
        let k = dyadic_cfl_exponent(1.1325e8, 0.9);
        assert_eq!(k, 13);
        assert!(2f64.powi(-(k as i32)) * 1.1325e8f64.sqrt() <= 1.8);
        assert!(2f64.powi(-(k as i32 - 1)) * 1.1325e8f64.sqrt() > 1.8);
    }
}

//! Command-line front end.
//!
//! Precedence: built-in defaults, then the `--config` file, then `--set`
//! overrides in order, then the dedicated flags (`--seed`, `--jobs`,
//! `--allow-unstable`, `--out`).
//!
//! Exit codes: 0 success, 1 a `check` item failed, 2 configuration or input
//! error, 3 CFL violation.

mod check;
mod output;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use crate::error::{Error, Result};
use crate::integrators::Discretization;
use crate::harness::{
    converge_space, converge_time, dyadic_cfl_exponent, efficiency_csv, energy_growth, Axis,
    EfficiencyRow, ExperimentConfig,
};

pub use check::{run_checks, CheckItem};
pub use output::{simulate, RunMetadata, SimulationOutput};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_CFL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "stochwave", version, about = "Stochastic wave equation: dG in space, Verlet-type schemes in time")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: CommonArgs,
}

#[derive(Debug, Args, Clone, Default)]
pub struct CommonArgs {
    /// Configuration file with `key = value` lines.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Master seed of the noise.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads (1 gives the same output as any other count).
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    /// Step the explicit scheme even when the CFL bound is violated.
    #[arg(long, global = true)]
    pub allow_unstable: bool,
    /// Output directory.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Extra `key=value` overrides, applied after the file.
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate paths and write energies or probe values at a stride.
    Simulate,
    /// Strong convergence study in space or time.
    Converge {
        #[arg(long, default_value = "space")]
        axis: String,
    },
    /// Monte Carlo energy growth for every configured scheme.
    Energy,
    /// Fast invariant checks.
    Check,
}

/// Map an error to its documented exit code.
pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Cfl { .. } => EXIT_CFL,
        _ => EXIT_CONFIG,
    }
}

/// Merge file, overrides and flags into a validated configuration.
pub fn load_config(common: &CommonArgs) -> Result<ExperimentConfig> {
    let mut cfg = match &common.config {
        Some(p) => ExperimentConfig::from_file(p)?,
        None => ExperimentConfig::default(),
    };
    for kv in &common.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(s) = common.seed {
        cfg.noise.seed = s;
    }
    if let Some(j) = common.jobs {
        cfg.mc.jobs = j;
    }
    if common.allow_unstable {
        cfg.time.allow_unstable = true;
    }
    if let Some(o) = &common.out {
        cfg.output.dir = o.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write(dir: &std::path::Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)
        .map_err(|e| Error::Io(format!("cannot create {}: {e}", dir.display())))?;
    let p = dir.join(name);
    std::fs::write(&p, content).map_err(|e| Error::Io(format!("cannot write {}: {e}", p.display())))
}

/// Run one parsed command; returns the process exit code.
pub fn execute(cli: &Cli) -> i32 {
    match dispatch(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let cfg = load_config(&cli.common)?;
    let dir = cfg.output.dir.clone();
    let start = Instant::now();
    match &cli.command {
        Command::Simulate => {
            let out = simulate(&cfg)?;
            write(&dir, "simulate.csv", &out.csv)?;
            let mut meta = out.metadata;
            meta.wall_clock_seconds = start.elapsed().as_secs_f64();
            write(&dir, "simulate.metadata.json", &meta.to_json())?;
            println!("wrote {} rows to {}", out.rows, dir.join("simulate.csv").display());
            Ok(EXIT_OK)
        }
        Command::Converge { axis } => {
            let axis: Axis = axis.parse()?;
            let table = match axis {
                Axis::Space => converge_space(&cfg)?,
                Axis::Time => converge_time(&cfg)?,
            };
            let name = match axis {
                Axis::Space => "converge_space",
                Axis::Time => "converge_time",
            };
            write(&dir, &format!("{name}.csv"), &table.csv())?;
            if axis == Axis::Space {
                let rows: Vec<EfficiencyRow> = table
                    .rows
                    .iter()
                    .map(|r| EfficiencyRow {
                        scheme: r.scheme,
                        h: r.h,
                        tau: r.tau,
                        error: r.rms_u1,
                        seconds_per_path: r.seconds_per_path,
                    })
                    .collect();
                write(&dir, "efficiency.csv", &efficiency_csv(&rows))?;
            }
            for f in &table.fits {
                let fitted = f
                    .fit
                    .as_ref()
                    .map(|r| format!("{:.4} (residual {:.2e})", r.rate, r.residual))
                    .unwrap_or_else(|| "n/a".into());
                let nominal = f.nominal.map(|v| format!("{v:.4}")).unwrap_or_else(|| "n/a".into());
                println!("{}: fitted rate {fitted}, nominal {nominal}", f.scheme);
            }
            let mesh = match axis {
                Axis::Space => cfg.ladder.space.iter().copied().max().unwrap_or(cfg.ladder.mesh),
                Axis::Time => cfg.ladder.mesh,
            };
            let disc = Discretization::new(cfg.space(mesh)?);
            let tau = table.rows.iter().map(|r| r.tau).fold(f64::INFINITY, f64::min);
            let mut meta = RunMetadata::new(&cfg, name).with_discretization(&disc, Some(tau));
            meta.noise_modes = table.noise_modes.unwrap_or(0);
            meta.extra = serde_json::json!({ "reference": table.reference, "fits": table.fits });
            meta.wall_clock_seconds = start.elapsed().as_secs_f64();
            write(&dir, &format!("{name}.metadata.json"), &meta.to_json())?;
            Ok(EXIT_OK)
        }
        Command::Energy => {
            let mut summaries = Vec::new();
            for &scheme in &cfg.schemes {
                let s = energy_growth(&cfg, scheme)?;
                write(&dir, &format!("energy_{scheme}.csv"), &s.csv())?;
                println!(
                    "{scheme}: H slope {:.6} +- {:.6}, trace-formula slope {:.6}",
                    s.hamiltonian_slope.slope, s.hamiltonian_slope.se, s.trace_rate
                );
                summaries.push(serde_json::json!({
                    "scheme": scheme,
                    "tau": s.tau,
                    "realizations": s.realizations,
                    "noise_modes": s.noise_modes,
                    "trace_rate": s.trace_rate,
                    "modified_rate": s.modified_rate,
                    "hamiltonian_slope": s.hamiltonian_slope,
                    "discrete_slope": s.discrete_slope,
                    "modified_slope": s.modified_slope,
                }));
            }
            let disc = Discretization::new(cfg.space(cfg.ladder.mesh)?);
            let tau = cfg.energy_tau(cfg.schemes[0]);
            let mut meta = RunMetadata::new(&cfg, "energy").with_discretization(&disc, Some(tau));
            meta.extra = serde_json::Value::Array(summaries);
            meta.wall_clock_seconds = start.elapsed().as_secs_f64();
            write(&dir, "energy.metadata.json", &meta.to_json())?;
            Ok(EXIT_OK)
        }
        Command::Check => {
            let items = run_checks(&cfg)?;
            let mut csv = String::from("item,status,value,limit,detail\n");
            let mut all = true;
            for it in &items {
                println!("{} {}: {}", if it.pass { "PASS" } else { "FAIL" }, it.name, it.detail);
                csv.push_str(&format!(
                    "{},{},{:.16e},{:.16e},\"{}\"\n",
                    it.name,
                    if it.pass { "pass" } else { "fail" },
                    it.value,
                    it.limit,
                    it.detail.replace('"', "'")
                ));
                all &= it.pass;
            }
            write(&dir, "check.csv", &csv)?;
            let mut meta = RunMetadata::new(&cfg, "check");
            meta.wall_clock_seconds = start.elapsed().as_secs_f64();
            write(&dir, "check.metadata.json", &meta.to_json())?;
            Ok(if all { EXIT_OK } else { EXIT_CHECK_FAILED })
        }
    }
}

/// Step used by `simulate` and `check`: `time.tau`, or the largest
/// CFL-admissible power of two.
pub fn default_tau(cfg: &ExperimentConfig, lambda_max: f64) -> f64 {
    cfg.time
        .tau
        .unwrap_or_else(|| 2f64.powi(-(dyadic_cfl_exponent(lambda_max, cfg.time.safety) as i32)))
}

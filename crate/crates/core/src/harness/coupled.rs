//! Pathwise-coupled runs of several discretizations driven by one noise path.
//!
//! Each realization draws mode amplitudes once at the finest step, sums them
//! pairwise up the dyadic tree for coarser steps, and projects them onto each
//! space, so every level sees the same Brownian path.

use std::collections::BTreeMap;
use std::time::Instant;

use super::pool::ordered_map;
use super::strong::{l2_error_vs_fn, strong_error};
use crate::error::{Error, Result};
use crate::integrators::{
    run, CflPolicy, Discretization, NoNoise, NoiseSource, Nonlinearity, Scheme, State, Stepper,
};
use crate::noise::{DyadicCascade, NoiseModel, NoiseProjector, NoiseStream};

/// One trajectory family: scheme, discretization index and step `2^-tau_exp`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Target {
    pub scheme: Scheme,
    pub disc: usize,
    pub tau_exp: u32,
}

impl Target {
    pub fn tau(&self) -> f64 {
        2f64.powi(-(self.tau_exp as i32))
    }
}

/// What the targets are measured against.
pub enum Reference {
    /// A finer discretization run on the same noise path.
    Discrete(Target),
    /// A closed-form solution `u(x, t)` (deterministic problems only).
    Exact(Box<dyn Fn(f64, f64) -> f64 + Send + Sync>),
}

pub struct CoupledPlan {
    pub discs: Vec<Discretization>,
    pub initial: Vec<State>,
    pub targets: Vec<Target>,
    pub reference: Reference,
    pub noise: Option<(NoiseModel, Vec<NoiseProjector>)>,
    pub f: Nonlinearity,
    pub final_time: f64,
    pub seed: u64,
    pub policy: CflPolicy,
}

/// Per-target outcome of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathError {
    pub u1_sq: f64,
    pub u2_sq: f64,
    pub seconds: f64,
}

/// Monte Carlo summary of one target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetSummary {
    pub rms_u1: f64,
    pub se_u1: f64,
    pub rms_u2: f64,
    pub se_u2: f64,
    pub seconds_per_path: f64,
}

fn steps_for(final_time: f64, tau: f64) -> Result<usize> {
    let n = (final_time / tau).round();
    if (n * tau - final_time).abs() > 1e-9 * final_time.max(1.0) {
        return Err(Error::InvalidParameter(format!(
            "final time {final_time} is not a multiple of tau = {tau}"
        )));
    }
    Ok(n as usize)
}

struct Recorded<'a> {
    data: &'a [f64],
    dofs: usize,
}

impl NoiseSource for Recorded<'_> {
    fn increment(&mut self, step: u64, out: &mut [f64]) -> bool {
        let s = step as usize * self.dofs;
        out.copy_from_slice(&self.data[s..s + self.dofs]);
        true
    }
}

impl CoupledPlan {
    fn all_runs(&self) -> Vec<Target> {
        let mut v = self.targets.clone();
        if let Reference::Discrete(r) = &self.reference {
            v.push(*r);
        }
        v
    }

    fn fine_exp(&self) -> u32 {
        self.all_runs().iter().map(|t| t.tau_exp).max().unwrap_or(0)
    }

    /// Build every stepper once; fails fast on CFL violations.
    fn steppers(&self) -> Result<Vec<Stepper<'_>>> {
        self.all_runs()
            .iter()
            .map(|t| Stepper::new(t.scheme, t.tau(), &self.discs[t.disc], &self.f, self.policy))
            .collect()
    }

    /// Errors of every target for realization `r`.
    fn realization(&self, steppers: &[Stepper], r: u64) -> Result<Vec<PathError>> {
        let runs = self.all_runs();
        let fine = self.fine_exp();
        // Recorded increments per (disc, shift).
        let mut recorded: BTreeMap<(usize, u32), Vec<f64>> = BTreeMap::new();
        if let Some((model, projectors)) = &self.noise {
            let max_shift = runs.iter().map(|t| fine - t.tau_exp).max().unwrap_or(0);
            for t in &runs {
                recorded.entry((t.disc, fine - t.tau_exp)).or_default();
            }
            let n_fine = steps_for(self.final_time, 2f64.powi(-(fine as i32)))?;
            let stream = NoiseStream::new(self.seed, r);
            let sq = model.sqrt_q();
            let mut amp = vec![0.0; model.n_modes()];
            let mut cascade = DyadicCascade::new(max_shift, model.n_modes());
            let mut buf = Vec::new();
            for n in 0..n_fine {
                stream.amplitudes(model, &sq, 2f64.powi(-(fine as i32)), n as u64, &mut amp);
                cascade.push(&amp);
                for (&(d, shift), store) in recorded.iter_mut() {
                    if let Some(c) = cascade.completed(shift)? {
                        let dofs = self.discs[d].space.n_dofs();
                        buf.resize(dofs, 0.0);
                        projectors[d].project_into(c, &mut buf);
                        store.extend_from_slice(&buf);
                    }
                }
            }
        }
        let mut finals = Vec::with_capacity(runs.len());
        let mut times = Vec::with_capacity(runs.len());
        for (t, st) in runs.iter().zip(steppers) {
            let n = steps_for(self.final_time, t.tau())?;
            let s0 = self.initial[t.disc].clone();
            let start = Instant::now();
            let out = match recorded.get(&(t.disc, fine - t.tau_exp)) {
                Some(data) => {
                    let mut src = Recorded {
                        data,
                        dofs: self.discs[t.disc].space.n_dofs(),
                    };
                    run(st, s0, n, &mut src, &mut [])?
                }
                None => run(st, s0, n, &mut NoNoise, &mut [])?,
            };
            times.push(start.elapsed().as_secs_f64());
            finals.push(out.state);
        }
        let mut errs = Vec::with_capacity(self.targets.len());
        for (i, t) in self.targets.iter().enumerate() {
            let space = &self.discs[t.disc].space;
            let s = &finals[i];
            let (e1, e2) = match &self.reference {
                Reference::Discrete(rt) => {
                    let rs = &finals[runs.len() - 1];
                    let rspace = &self.discs[rt.disc].space;
                    (
                        strong_error(space, &s.u1, rspace, &rs.u1)?,
                        strong_error(space, &s.u2, rspace, &rs.u2)?,
                    )
                }
                Reference::Exact(u) => {
                    let tt = self.final_time;
                    let h = 1e-6;
                    (
                        l2_error_vs_fn(space, &s.u1, |x| u(x, tt))?,
                        l2_error_vs_fn(space, &s.u2, |x| (u(x, tt + h) - u(x, tt - h)) / (2.0 * h))?,
                    )
                }
            };
            errs.push(PathError {
                u1_sq: e1 * e1,
                u2_sq: e2 * e2,
                seconds: times[i],
            });
        }
        Ok(errs)
    }

    /// Run `m` realizations on `jobs` workers and reduce in realization order.
    pub fn execute(&self, m: usize, jobs: usize) -> Result<Vec<TargetSummary>> {
        let steppers = self.steppers()?;
        let m = if self.noise.is_some() { m } else { 1 };
        let per_path = ordered_map(m, jobs, |r| self.realization(&steppers, r as u64))?;
        Ok(summarize(&per_path, self.targets.len()))
    }
}

/// RMS errors and their standard errors (delta method on the mean square).
pub fn summarize(per_path: &[Vec<PathError>], n_targets: usize) -> Vec<TargetSummary> {
    let m = per_path.len() as f64;
    (0..n_targets)
        .map(|i| {
            let stats = |get: &dyn Fn(&PathError) -> f64| {
                let mean = per_path.iter().map(|p| get(&p[i])).sum::<f64>() / m;
                let var = if m > 1.0 {
                    per_path.iter().map(|p| (get(&p[i]) - mean).powi(2)).sum::<f64>() / (m - 1.0)
                } else {
                    0.0
                };
                let rms = mean.sqrt();
                let se = if rms > 0.0 { (var / m).sqrt() / (2.0 * rms) } else { 0.0 };
                (rms, se)
            };
            let (rms_u1, se_u1) = stats(&|p| p.u1_sq);
            let (rms_u2, se_u2) = stats(&|p| p.u2_sq);
            TargetSummary {
                rms_u1,
                se_u1,
                rms_u2,
                se_u2,
                seconds_per_path: per_path.iter().map(|p| p[i].seconds).sum::<f64>() / m,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{DGSpace, SmoothFn};
    use crate::integrators::VelocityProjection;

    fn plan(n_levels: &[usize], seed: u64, noise: bool) -> CoupledPlan {
        let mut discs = Vec::new();
        for &n in n_levels {
            discs.push(Discretization::new(DGSpace::unit(n, 1).unwrap()));
        }
        let zero = SmoothFn::new(|_| 0.0, |_| 0.0, |_| 0.0);
        let v0 = SmoothFn::sine(1.0, 0.0, 1.0, 1.0);
        let initial = discs
            .iter()
            .map(|d| State::from_initial(d, &zero, &v0, VelocityProjection::L2).unwrap())
            .collect();
        let last = discs.len() - 1;
        let model = NoiseModel::for_space(1.0, &discs[last].space).unwrap();
        let projectors = discs
            .iter()
            .map(|d| NoiseProjector::new(&model, &d.space).unwrap())
            .collect();
        CoupledPlan {
            targets: (0..last)
                .map(|d| Target {
                    scheme: Scheme::Svm,
                    disc: d,
                    tau_exp: 8,
                })
                .collect(),
            reference: Reference::Discrete(Target {
                scheme: Scheme::Svm,
                disc: last,
                tau_exp: 10,
            }),
            discs,
            initial,
            noise: noise.then_some((model, projectors)),
            f: Nonlinearity::sine_gordon(),
            final_time: 0.25,
            seed,
            policy: CflPolicy::default(),
        }
    }

    #[test]
    fn errors_shrink_with_refinement_and_are_reproducible() {
        let p = plan(&[4, 8, 16, 64], 5, true);
        let a = p.execute(6, 1).unwrap();
        let b = p.execute(6, 3).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert_eq!(x.rms_u1, y.rms_u1);
            assert_eq!(x.rms_u2, y.rms_u2);
        }
        assert!(a[0].rms_u1 > a[1].rms_u1 && a[1].rms_u1 > a[2].rms_u1, "{a:?}");
    }

    #[test]
    fn coarse_step_sees_summed_increments() {
        // Same space at two dyadic steps: the coarse run must equal a run fed
        // with pairwise sums of the fine projected increments.
        let mut p = plan(&[8, 8], 3, true);
        p.targets = vec![Target {
            scheme: Scheme::Sem,
            disc: 0,
            tau_exp: 7,
        }];
        p.reference = Reference::Discrete(Target {
            scheme: Scheme::Sem,
            disc: 1,
            tau_exp: 8,
        });
        let steppers = p.steppers().unwrap();
        let e = p.realization(&steppers, 0).unwrap();
        // Oracle: rebuild the coarse path by direct sums of fine draws.
        let (model, proj) = p.noise.as_ref().unwrap();
        let stream = NoiseStream::new(3, 0);
        let sq = model.sqrt_q();
        let tf = 2f64.powi(-8);
        let mut s = p.initial[0].clone();
        let mut a = vec![0.0; model.n_modes()];
        let mut b = vec![0.0; model.n_modes()];
        let mut inc = vec![0.0; p.discs[0].space.n_dofs()];
        for n in 0..32u64 {
            stream.amplitudes(model, &sq, tf, 2 * n, &mut a);
            stream.amplitudes(model, &sq, tf, 2 * n + 1, &mut b);
            let sum: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x + y).collect();
            proj[0].project_into(&sum, &mut inc);
            steppers[0].step(&mut s, Some(&inc));
        }
        let mut r = p.initial[1].clone();
        for n in 0..64u64 {
            stream.amplitudes(model, &sq, tf, n, &mut a);
            proj[1].project_into(&a, &mut inc);
            steppers[1].step(&mut r, Some(&inc));
        }
        let direct = s.u1.sub(&r.u1).unwrap().norm();
        assert!((e[0].u1_sq.sqrt() - direct).abs() < 1e-12 * direct.max(1e-300), "{} vs {direct}", e[0].u1_sq.sqrt());
    }

    #[test]
    fn deterministic_plan_runs_once() {
        let p = plan(&[4, 8, 32], 0, false);
        let a = p.execute(50, 1).unwrap();
        assert!(a[0].se_u1 == 0.0 && a[0].rms_u1 > a[1].rms_u1);
    }

    #[test]
    fn cfl_violation_fails_fast() {
        let mut p = plan(&[4, 16], 0, true);
        p.targets[0].tau_exp = 1;
        assert!(matches!(p.execute(2, 1), Err(Error::Cfl { .. })));
    }
}

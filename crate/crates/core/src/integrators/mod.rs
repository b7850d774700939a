//! Time stepping: position Verlet, trigonometric and semi-implicit Euler.

mod nonlinearity;
mod propagator;
mod stepper;

pub use nonlinearity::{Nonlinearity, NonlinearityKind};
pub use propagator::{block_eigenvalues, propagator_apply, ModeKernel, PropagatorM};
pub use stepper::{CflPolicy, Discretization, Scheme, State, Stepper, VelocityProjection};

use crate::dg::SpaceLayout;
use crate::error::{Error, Result};
use crate::noise::{NoiseModel, NoiseProjector, NoiseStream};

/// Supplies `P_h Delta W^n` for each step.
pub trait NoiseSource {
    /// Write the increment of step `step` (0-based) into `out`; `false`
    /// means no noise for this step and `out` is left untouched.
    fn increment(&mut self, step: u64, out: &mut [f64]) -> bool;
}

/// Deterministic dynamics.
#[derive(Debug, Clone, Copy, Default)]
pub struct NoNoise;

impl NoiseSource for NoNoise {
    fn increment(&mut self, _step: u64, _out: &mut [f64]) -> bool {
        false
    }
}

/// Increments of one realization drawn directly at step size `tau`.
pub struct StreamNoise<'a> {
    model: &'a NoiseModel,
    projector: &'a NoiseProjector,
    sqrt_q: Vec<f64>,
    tau: f64,
    stream: NoiseStream,
    amp: Vec<f64>,
}

impl<'a> StreamNoise<'a> {
    pub fn new(model: &'a NoiseModel, projector: &'a NoiseProjector, tau: f64, stream: NoiseStream) -> Self {
        Self {
            model,
            projector,
            sqrt_q: model.sqrt_q(),
            tau,
            stream,
            amp: vec![0.0; model.n_modes()],
        }
    }
}

impl NoiseSource for StreamNoise<'_> {
    fn increment(&mut self, step: u64, out: &mut [f64]) -> bool {
        self.stream
            .amplitudes(self.model, &self.sqrt_q, self.tau, step, &mut self.amp);
        self.projector.project_into(&self.amp, out);
        true
    }
}

/// Read-only callback invoked at step 0, every `stride` steps, and at the
/// final step.
pub trait Observer {
    fn stride(&self) -> usize;
    fn observe(&mut self, step: usize, t: f64, state: &State);
}

impl<F: FnMut(usize, f64, &State)> Observer for (usize, F) {
    fn stride(&self) -> usize {
        self.0
    }
    fn observe(&mut self, step: usize, t: f64, state: &State) {
        (self.1)(step, t, state)
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub state: State,
    pub steps: usize,
    pub final_time: f64,
    pub observations: usize,
}

fn due(step: usize, n_steps: usize, stride: usize) -> bool {
    step == 0 || step == n_steps || (stride > 0 && step % stride == 0)
}

/// Advance `n_steps` from `state0`.
pub fn run(
    stepper: &Stepper,
    state0: State,
    n_steps: usize,
    noise: &mut dyn NoiseSource,
    observers: &mut [&mut dyn Observer],
) -> Result<RunSummary> {
    let layout: SpaceLayout = stepper.discretization().space.layout();
    if state0.u1.layout() != layout || state0.u2.layout() != layout {
        return Err(Error::SpaceMismatch("initial state is not on the stepper's space".into()));
    }
    let tau = stepper.tau();
    let mut state = state0;
    let mut inc = vec![0.0; layout.n_dofs()];
    let mut observations = 0;
    for step in 0..=n_steps {
        if step > 0 {
            let noisy = noise.increment(step as u64 - 1, &mut inc);
            stepper.step(&mut state, noisy.then_some(inc.as_slice()));
        }
        let t = step as f64 * tau;
        for ob in observers.iter_mut() {
            if due(step, n_steps, ob.stride()) {
                ob.observe(step, t, &state);
                observations += 1;
            }
        }
    }
    Ok(RunSummary {
        state,
        steps: n_steps,
        final_time: n_steps as f64 * tau,
        observations,
    })
}

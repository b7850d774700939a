//! Energy functionals along numerical trajectories.

use crate::dg::DGSpace;
use crate::error::Result;
use crate::integrators::{Discretization, Nonlinearity, State};
use crate::noise::{projected_trace, NoiseModel};
use crate::spectral::{mode_norm_m_sq, SpectralOperator};

/// `1/2 ||u_1||_*^2 + 1/2 ||u_2||^2 + int V(u_1)`.
pub fn hamiltonian(disc: &Discretization, state: &State, f: &Nonlinearity) -> Result<f64> {
    let b = disc.stiffness.broken_norm(&state.u1)?;
    let v = f.integrate_potential(&disc.space, &state.u1);
    Ok(0.5 * b * b + 0.5 * state.u2.norm().powi(2) + v)
}

/// `1/2 ||Lambda_h^{1/2} u_1||^2 + 1/2 ||u_2||^2`; the basis is orthonormal,
/// so the first term is `u_1^T A u_1 / 2`.
pub fn discrete_energy(disc: &Discretization, state: &State) -> Result<f64> {
    let a = disc.stiffness.bilinear(&state.u1, &state.u1)?;
    Ok(0.5 * a + 0.5 * state.u2.norm().powi(2))
}

/// `||X||_{m,1}^2`.
pub fn modified_energy(state: &State, tau: f64, spectral: &SpectralOperator) -> Result<f64> {
    let m = spectral.modal_state(&state.u1, &state.u2)?;
    Ok(spectral.norm_m_alpha(tau, &m, 1.0)?.powi(2))
}

/// `1/2 Tr(P_h Q P_h)`.
pub fn trace_rate(model: &NoiseModel, space: &DGSpace) -> Result<f64> {
    Ok(0.5 * projected_trace(model, space)?)
}

/// Growth per unit time of the expected modified energy under the noisy
/// linear Verlet scheme, `sum_k ||D P_h Q^{1/2} e_k||_{m,1}^2`, given the
/// per-mode noise variance rates `C_jj`.
pub fn modified_energy_rate(variance_rates: &[f64], eigenvalues: &[f64], tau: f64) -> Result<f64> {
    let mut acc = 0.0;
    for (&c, &l) in variance_rates.iter().zip(eigenvalues) {
        acc += c * mode_norm_m_sq(l, tau, 0.5 * tau, 1.0, 1.0)?;
    }
    Ok(acc)
}

/// One row of an energy time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnergyReport {
    pub t: f64,
    pub hamiltonian: f64,
    pub discrete_energy: f64,
    /// Absent when `tau` violates the strict CFL bound.
    pub modified_energy: Option<f64>,
    pub trace_rate: f64,
}

impl EnergyReport {
    pub const CSV_HEADER: &'static str = "t,hamiltonian,discrete_energy,modified_energy,trace_rate";

    pub fn compute(
        disc: &Discretization,
        state: &State,
        f: &Nonlinearity,
        t: f64,
        tau: f64,
        trace_rate: f64,
    ) -> Result<Self> {
        let modified_energy = match &disc.spectral {
            Some(op) => modified_energy(state, tau, op).ok(),
            None => None,
        };
        Ok(Self {
            t,
            hamiltonian: hamiltonian(disc, state, f)?,
            discrete_energy: discrete_energy(disc, state)?,
            modified_energy,
            trace_rate,
        })
    }

    pub fn csv_row(&self) -> String {
        let m = self
            .modified_energy
            .map(|v| format!("{v:.16e}"))
            .unwrap_or_else(|| "nan".into());
        format!(
            "{:.16e},{:.16e},{:.16e},{},{:.16e}",
            self.t, self.hamiltonian, self.discrete_energy, m, self.trace_rate
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dg::{l2_project, Field};
    use crate::integrators::{run, CflPolicy, NoNoise, Scheme, Stepper};
    use std::f64::consts::PI;

    fn disc() -> Discretization {
        Discretization::with_spectral(DGSpace::unit(8, 1).unwrap()).unwrap()
    }

    #[test]
    fn zero_state_has_zero_energy() {
        let d = disc();
        let s = State::zeros(&d.space);
        assert_eq!(hamiltonian(&d, &s, &Nonlinearity::zero()).unwrap(), 0.0);
        assert_eq!(hamiltonian(&d, &s, &Nonlinearity::sine_gordon()).unwrap(), 0.0);
        assert_eq!(discrete_energy(&d, &s).unwrap(), 0.0);
        let m = NoiseModel::new(1.0, 0, 0.0, 1.0).unwrap();
        assert_eq!(trace_rate(&m, &d.space).unwrap(), 0.0);
    }

    #[test]
    fn velocity_only_state_splits_evenly() {
        let d = disc();
        let u2 = l2_project(&d.space, |x| (PI * x).sin());
        let s = State::new(Field::zeros(&d.space), u2.clone()).unwrap();
        let e = 0.5 * u2.norm().powi(2);
        assert!((hamiltonian(&d, &s, &Nonlinearity::zero()).unwrap() - e).abs() < 1e-15);
        assert!((discrete_energy(&d, &s).unwrap() - e).abs() < 1e-15);
    }

    #[test]
    fn discrete_energy_matches_spectral_norm() {
        let d = disc();
        let op = d.spectral().unwrap();
        let u1 = l2_project(&d.space, |x| x * (1.0 - x));
        let s = State::new(u1.clone(), Field::zeros(&d.space)).unwrap();
        let via_op = 0.5 * op.norm_h_alpha(&u1, 1.0).unwrap().powi(2);
        assert!((discrete_energy(&d, &s).unwrap() - via_op).abs() < 1e-12 * via_op);
    }

    #[test]
    fn trace_rate_approaches_basel_limit() {
        let space = DGSpace::unit(64, 1).unwrap();
        let m = NoiseModel::for_space(1.0, &space).unwrap();
        let r = trace_rate(&m, &space).unwrap();
        assert!(r < 1.0 / 12.0 && (r - 1.0 / 12.0).abs() < 1e-3, "{r}");
    }

    #[test]
    fn modified_energy_is_conserved_and_close_to_discrete_energy() {
        let d = disc();
        let op = d.spectral().unwrap();
        let zero = Nonlinearity::zero();
        let tau = d.max_stable_tau(0.05);
        let st = Stepper::new(Scheme::Svm, tau, &d, &zero, CflPolicy::default()).unwrap();
        let s0 = State::new(
            l2_project(&d.space, |x| (PI * x).sin()),
            l2_project(&d.space, |x| x - 0.5),
        )
        .unwrap();
        let e0 = modified_energy(&s0, tau, op).unwrap();
        let de = discrete_energy(&d, &s0).unwrap();
        // Multipliers differ by 1/(1 - tau^2 lambda/4) <= 1/(1 - 0.05^2).
        assert!(e0 >= de && e0 <= de / (1.0 - 0.0025) + 1e-14);
        let out = run(&st, s0, 2000, &mut NoNoise, &mut []).unwrap();
        let e1 = modified_energy(&out.state, tau, op).unwrap();
        assert!((e1 - e0).abs() < 1e-12 * e0);
    }

    #[test]
    fn csv_row_has_five_fields() {
        let r = EnergyReport {
            t: 0.5,
            hamiltonian: 1.0,
            discrete_energy: 0.9,
            modified_energy: None,
            trace_rate: 0.08,
        };
        assert_eq!(r.csv_row().split(',').count(), 5);
        assert_eq!(EnergyReport::CSV_HEADER.split(',').count(), 5);
    }
}

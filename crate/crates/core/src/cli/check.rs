//! Fast invariant checks on the configured mesh `2^ladder.mesh`.

use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;
use rand_xoshiro::Xoshiro256PlusPlus;

use super::default_tau;
use crate::dg::{DGSpace, Field, Mesh1D};
use crate::error::Result;
use crate::harness::ExperimentConfig;
use crate::integrators::{
    run, CflPolicy, Discretization, NoNoise, NoiseSource, Nonlinearity, PropagatorM, Scheme, State,
    Stepper, StreamNoise,
};
use crate::noise::{projected_trace, NoiseProjector, NoiseStream};
use crate::observables::modified_energy;

const COERCIVITY_SAMPLES: usize = 100;
const NORM_STEPS: usize = 1000;
const ISOMETRY_SAMPLES: u64 = 10_000;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckItem {
    pub name: &'static str,
    pub pass: bool,
    pub value: f64,
    pub limit: f64,
    pub detail: String,
}

fn item(name: &'static str, pass: bool, value: f64, limit: f64, detail: String) -> CheckItem {
    CheckItem {
        name,
        pass,
        value,
        limit,
        detail,
    }
}

fn random_field(space: &DGSpace, rng: &mut Xoshiro256PlusPlus) -> Result<Field> {
    let c: Vec<f64> = (0..space.n_dofs()).map(|_| rng.sample(StandardNormal)).collect();
    Field::from_coeffs(space, c)
}

/// Run every check. The space is built without the coercivity probe so that
/// an under-penalized form is reported rather than refused.
pub fn run_checks(cfg: &ExperimentConfig) -> Result<Vec<CheckItem>> {
    cfg.validate()?;
    let p = &cfg.problem;
    let mesh = Mesh1D::uniform(p.a, p.b, 1usize << cfg.ladder.mesh)?;
    let space = DGSpace::without_probe(mesh, p.degree, p.sigma0)?;
    // An indefinite form has no spectral decomposition in the usual sense;
    // the banded data and the raw eigenvalues are still available.
    let disc = Discretization::with_spectral(space.clone()).unwrap_or_else(|_| Discretization::new(space));
    let op = disc.spectral.as_ref();
    let tau = default_tau(cfg, disc.lambda_max);
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(cfg.noise.seed);
    let mut items = Vec::new();

    // Symmetry of the assembled matrix.
    let a = disc.stiffness.matrix().to_dense();
    let scale = a.amax().max(f64::MIN_POSITIVE);
    let asym = (&a - a.transpose()).amax() / scale;
    items.push(item(
        "symmetry",
        asym <= 1e-12,
        asym,
        1e-12,
        format!("max |A - A^T| / max |A| = {asym:.3e}"),
    ));

    // Coercivity on random fields, and positivity of the spectrum.
    let mut worst = f64::INFINITY;
    for _ in 0..COERCIVITY_SAMPLES {
        let u = random_field(&disc.space, &mut rng)?;
        let b = disc.stiffness.bilinear(&u, &u)?;
        let n = disc.stiffness.broken_norm(&u)?;
        worst = worst.min(b / (n * n));
    }
    items.push(item(
        "coercivity",
        worst >= 0.5,
        worst,
        0.5,
        format!("min B_h(u,u) / ||u||_*^2 over {COERCIVITY_SAMPLES} random fields = {worst:.4}"),
    ));
    let eigs = a.clone().symmetric_eigenvalues();
    let lmin = eigs.min();
    items.push(item(
        "positive_spectrum",
        lmin > 0.0,
        lmin,
        0.0,
        format!("smallest eigenvalue {lmin:.6e} (sigma0 = {})", disc.space.sigma0()),
    ));

    // Conservation of the modified energy by the noiseless linear Verlet step.
    let zero = Nonlinearity::zero();
    let policy = CflPolicy {
        safety: 1.0,
        allow_unstable: true,
    };
    let stepper = Stepper::new(Scheme::Svm, tau, &disc, &zero, policy)?;
    let s0 = State::new(random_field(&disc.space, &mut rng)?, random_field(&disc.space, &mut rng)?)?;
    let stable = tau * tau * disc.lambda_max < 4.0;
    let (drift, note) = match op {
        Some(op) if stable => {
            let e0 = modified_energy(&s0, tau, op)?;
            let out = run(&stepper, s0, NORM_STEPS, &mut NoNoise, &mut [])?;
            let e1 = modified_energy(&out.state, tau, op)?;
            ((e1 - e0).abs() / e0, format!("relative drift over {NORM_STEPS} steps"))
        }
        Some(_) => (f64::INFINITY, "tau above the CFL bound, the modified norm is undefined".to_string()),
        None => (f64::INFINITY, "indefinite stiffness, the modified norm is undefined".to_string()),
    };
    items.push(item(
        "m_norm_preservation",
        drift <= 1e-12,
        drift,
        1e-12,
        format!("{note}: {drift:.3e} (tau = {tau:e})"),
    ));

    // Propagator eigenvalues on the unit circle.
    let prop = PropagatorM::from_eigenvalues(eigs.as_slice(), tau);
    let dev = prop
        .eigenvalues()
        .iter()
        .flat_map(|&(m1, m2)| [m1.norm(), m2.norm()])
        .map(|r| (r - 1.0).abs())
        .fold(0.0, f64::max);
    items.push(item(
        "unit_modulus",
        dev <= 1e-12,
        dev,
        1e-12,
        format!("max ||mu| - 1| = {dev:.3e} at tau sqrt(lambda_max) / 2 = {:.4}", 0.5 * tau * disc.lambda_max.sqrt()),
    ));

    // E ||P_h dW||^2 = tau Tr(P_h Q P_h).
    let model = cfg.noise_model(&disc.space)?;
    let proj = NoiseProjector::new(&model, &disc.space)?;
    let mut noise = StreamNoise::new(&model, &proj, tau, NoiseStream::new(cfg.noise.seed, 0));
    let mut inc = vec![0.0; disc.space.n_dofs()];
    let (mut s1, mut s2) = (0.0, 0.0);
    for k in 0..ISOMETRY_SAMPLES {
        noise.increment(k, &mut inc);
        let q: f64 = inc.iter().map(|v| v * v).sum();
        s1 += q;
        s2 += q * q;
    }
    let n = ISOMETRY_SAMPLES as f64;
    let mean = s1 / n;
    let se = ((s2 / n - mean * mean).max(0.0) / (n - 1.0)).sqrt();
    let expect = tau * projected_trace(&model, &disc.space)?;
    let z = (mean - expect).abs() / se.max(f64::MIN_POSITIVE);
    items.push(item(
        "ito_isometry",
        z <= 3.0,
        z,
        3.0,
        format!("mean {mean:.6e} vs tau Tr = {expect:.6e}, |z| = {z:.2} over {ISOMETRY_SAMPLES} increments"),
    ));
    Ok(items)
}
